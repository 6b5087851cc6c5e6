from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPACES = ("sphere", "hamming", "euclidean")


@dataclass
class PointSet:
    """Rows of ``data`` are points. ``space`` is one of ``SPACES``.

    Hamming sets hold int8 entries in {-1, +1}. ``meta`` carries provenance
    (seeds, generation parameters, projection matrices).
    """

    data: np.ndarray
    space: str = "sphere"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.space not in SPACES:
            raise ValueError(f"unknown space {self.space!r}")
        if self.data.ndim != 2:
            raise ValueError("point data must be a 2-D array")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.n
