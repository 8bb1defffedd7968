from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class PhysicalParams:
    """Coefficients of the coupled problem.

    ``K`` is the hydraulic conductivity, either a scalar (meaning ``K * I``)
    or a symmetric positive definite 2x2 matrix given as nested tuples.
    """

    nu: float = 1.0
    g: float = 1.0
    S: float = 1.0
    K: float | tuple = 1.0
    alpha_bj: float = 1.0
    gamma_f: float = 1.0
    gamma_p: float = 1.0

    def __post_init__(self):
        for name in ("nu", "g", "S"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.alpha_bj < 0:
            raise ValueError("alpha_bj must be non-negative")
        if self.gamma_f < 0 or self.gamma_p < 0:
            raise ValueError("stabilization parameters must be non-negative")
        K = self.K_matrix
        if not np.allclose(K, K.T) or np.linalg.eigvalsh(K)[0] <= 0:
            raise ValueError(f"K must be symmetric positive definite, got {self.K!r}")

    @property
    def K_matrix(self) -> np.ndarray:
        K = np.asarray(self.K, dtype=float)
        if K.ndim == 0:
            return float(K) * np.eye(2)
        return K.reshape(2, 2)

    @property
    def K_min(self) -> float:
        return float(np.linalg.eigvalsh(self.K_matrix)[0])

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)
