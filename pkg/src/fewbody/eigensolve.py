"""Generalized eigenvalue problems ``H c = E S c`` over non-orthogonal bases.

The overlap is diagonalized first; directions whose overlap eigenvalue falls
below ``threshold * max_eigenvalue`` are discarded and the remaining ones are
scaled to an orthonormal set (canonical orthogonalization).  The Hamiltonian
is then solved as a standard problem in that subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateBasis, NumericalFailure, ShapeMismatch

__all__ = ["AssembledSystem", "Spectrum", "truncate_overlap", "solve_gevp"]

REAL_SYMMETRIC = "real_symmetric"
COMPLEX_SYMMETRIC = "complex_symmetric"


@dataclass
class AssembledSystem:
    H: np.ndarray
    S: np.ndarray
    kind: str = REAL_SYMMETRIC

    def __post_init__(self):
        self.H = np.asarray(self.H)
        self.S = np.asarray(self.S)
        if self.H.ndim != 2 or self.H.shape[0] != self.H.shape[1] or self.H.shape != self.S.shape:
            raise ShapeMismatch(f"H {self.H.shape} and S {self.S.shape} must be square and equal")
        if self.kind not in (REAL_SYMMETRIC, COMPLEX_SYMMETRIC):
            raise ValueError(f"unknown system kind {self.kind!r}")
        if self.kind == REAL_SYMMETRIC and (np.iscomplexobj(self.H) or np.iscomplexobj(self.S)):
            raise ValueError("real_symmetric system with complex matrices")

    @property
    def dim(self) -> int:
        return self.H.shape[0]


@dataclass
class Spectrum:
    energies: np.ndarray
    vectors: np.ndarray | None = None
    kept_dim: int = 0
    channels: np.ndarray | None = None  # per-state tag, e.g. the angular momentum
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.energies)


def truncate_overlap(S: np.ndarray, threshold: float = 1e-10) -> tuple[np.ndarray, int]:
    """Rectangular ``X`` with ``X.T @ S @ X = 1`` spanning the well-conditioned part of ``S``."""
    S = np.asarray(S, dtype=float)
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold!r}")
    if not np.all(np.isfinite(S)):
        raise NumericalFailure("overlap matrix has non-finite entries")
    s, U = sla.eigh(S)
    smax = s[-1]
    if not smax > 0:
        raise DegenerateBasis("overlap matrix has no positive eigenvalue")
    keep = s >= threshold * smax
    kept = int(keep.sum())
    if kept == 0:
        raise DegenerateBasis("every overlap eigenvalue is below the cutoff")
    X = U[:, keep] / np.sqrt(s[keep])
    return X, kept


def solve_gevp(
    sys: AssembledSystem,
    threshold: float = 1e-10,
    want_vectors: bool = False,
) -> Spectrum:
    """Solve ``H c = E S c``; vectors come back in the original basis with ``c^T S c = 1``."""
    H, S = sys.H, sys.S
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(S))):
        raise NumericalFailure("assembled matrices have non-finite entries")
    if np.iscomplexobj(S):
        if np.max(np.abs(S.imag), initial=0.0) > 0:
            raise NotImplementedError("complex overlap matrices are not supported")
        S = S.real
    X, kept = truncate_overlap(S, threshold)
    Hp = X.T @ H @ X
    if sys.kind == REAL_SYMMETRIC:
        Hp = 0.5 * (Hp + Hp.T)
        if want_vectors:
            E, Y = sla.eigh(Hp)
        else:
            E, Y = sla.eigh(Hp, eigvals_only=True), None
    else:
        Hp = 0.5 * (Hp + Hp.T)
        if want_vectors:
            E, Y = sla.eig(Hp)
        else:
            E, Y = sla.eig(Hp, right=False), None
        order = np.lexsort((E.imag, E.real))
        E = E[order]
        if Y is not None:
            Y = Y[:, order]
            # complex-orthogonal normalization y^T y = 1
            Y = Y / np.sqrt(np.sum(Y * Y, axis=0))
    if not np.all(np.isfinite(E)):
        raise NumericalFailure("eigenvalue solver returned non-finite values")
    vectors = X @ Y if Y is not None else None
    return Spectrum(energies=E, vectors=vectors, kept_dim=kept)
