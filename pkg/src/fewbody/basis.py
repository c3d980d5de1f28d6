"""Gaussian basis sets with ranges in geometric progression.

A radial basis function is ``N r^l exp(-nu r^2)`` times an angular factor
(1 in 1D, ``exp(i m phi)`` in 2D, ``Y_lm`` in 3D).  Complex-ranged functions
carry an extra ``cos(omega nu r^2)`` or ``sin(omega nu r^2)`` factor; they are
represented as combinations of two Gaussians with complex conjugate ranges
``nu (1 +- i omega)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .errors import InvalidBasis

__all__ = [
    "RangeProgression",
    "BasisFunction",
    "BasisSet",
    "geometric_ranges",
    "angular_measure",
    "gaussian_moment",
    "normalization",
    "make_basis_2b",
]


def geometric_ranges(nmax: int, r1: float, rnmax: float) -> np.ndarray:
    """Lengths ``r_n = r1 * a**(n-1)`` with ``a = (rnmax/r1)**(1/(nmax-1))``."""
    if int(nmax) != nmax or nmax < 2:
        raise InvalidBasis(f"nmax must be an integer >= 2, got {nmax!r}")
    if not (r1 > 0 and rnmax > r1):
        raise InvalidBasis(f"need 0 < r1 < rnmax, got r1={r1!r}, rnmax={rnmax!r}")
    nmax = int(nmax)
    ratio = (rnmax / r1) ** (1.0 / (nmax - 1))
    r = r1 * ratio ** np.arange(nmax, dtype=float)
    # pin the endpoints exactly
    r[0], r[-1] = r1, rnmax
    return r


@dataclass(frozen=True)
class RangeProgression:
    nmax: int
    r1: float
    rnmax: float

    def lengths(self) -> np.ndarray:
        return geometric_ranges(self.nmax, self.r1, self.rnmax)

    def ranges(self) -> np.ndarray:
        return 1.0 / self.lengths() ** 2


def angular_measure(dim: int) -> float:
    """Integral of |f|^2 over directions; 1D counts the two half-lines."""
    if dim == 1:
        return 2.0
    if dim == 2:
        return 2.0 * np.pi
    if dim == 3:
        return 1.0  # Y_lm are normalized
    raise InvalidBasis(f"dim must be 1, 2 or 3, got {dim!r}")


def gaussian_moment(p, a):
    """``int_0^inf r^p exp(-a r^2) dr`` for Re(a) > 0 (principal branch)."""
    a = np.asarray(a)
    return gamma((p + 1) / 2.0) / (2.0 * a ** ((p + 1) / 2.0))


def normalization(nu, l: int, dim: int, osc: str | None = None, omega: float = 0.0):
    """Normalization constant of ``r^l exp(-nu r^2) [cos|sin](omega nu r^2)``."""
    p = 2 * l + dim - 1
    omega_measure = angular_measure(dim)
    base = gaussian_moment(p, 2.0 * np.asarray(nu, dtype=float))
    if osc is None:
        integral = base
    else:
        rotated = gaussian_moment(p, 2.0 * np.asarray(nu, dtype=float) * (1 + 1j * omega)).real
        integral = 0.5 * (base + rotated) if osc == "cos" else 0.5 * (base - rotated)
    return 1.0 / np.sqrt(omega_measure * integral)


@dataclass(frozen=True)
class BasisFunction:
    range: float
    power: int
    dim: int
    norm: float
    oscillation: str | None = None
    omega: float = 0.0

    def primitives(self) -> list[tuple[complex, complex]]:
        """``(complex range, weight)`` pairs whose weighted sum is this function."""
        nu = self.range
        if self.oscillation is None:
            return [(complex(nu), complex(self.norm))]
        z = nu * (1 + 1j * self.omega)
        zc = np.conj(z)
        # exp(-z r^2) = exp(-nu r^2) (cos - i sin)
        if self.oscillation == "cos":
            return [(z, 0.5 * self.norm), (zc, 0.5 * self.norm)]
        return [(z, 0.5j * self.norm), (zc, -0.5j * self.norm)]

    def __call__(self, r):
        r = np.asarray(r)
        val = self.norm * r**self.power * np.exp(-self.range * r**2)
        if self.oscillation == "cos":
            val = val * np.cos(self.omega * self.range * r**2)
        elif self.oscillation == "sin":
            val = val * np.sin(self.omega * self.range * r**2)
        return val


@dataclass
class BasisSet:
    functions: list[BasisFunction]
    channels: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    @property
    def ranges(self) -> np.ndarray:
        return np.array([f.range for f in self.functions])

    @property
    def norms(self) -> np.ndarray:
        return np.array([f.norm for f in self.functions])

    def primitive_expansion(self) -> tuple[np.ndarray, np.ndarray]:
        """Complex ranges ``z`` (P,) and weight matrix ``W`` (P, F).

        Function ``f`` equals ``sum_p W[p, f] exp(-z[p] r^2) r^l``.
        """
        zs: list[complex] = []
        cols: list[tuple[int, int, complex]] = []
        for f_idx, func in enumerate(self.functions):
            for z, w in func.primitives():
                cols.append((len(zs), f_idx, w))
                zs.append(z)
        weights = np.zeros((len(zs), len(self.functions)), dtype=complex)
        for p_idx, f_idx, w in cols:
            weights[p_idx, f_idx] = w
        return np.array(zs, dtype=complex), weights

    def evaluate(self, r) -> np.ndarray:
        """Matrix of function values, shape (len(r), len(basis))."""
        r = np.asarray(r, dtype=float)
        return np.stack([f(r) for f in self.functions], axis=-1)


def make_basis_2b(
    prog: RangeProgression,
    l: int,
    dim: int,
    cr: bool = False,
    omega_cr: float = 0.0,
) -> BasisSet:
    """Two-body basis over the ``prog.nmax`` ranges of the progression.

    With ``cr`` every range yields a cos and a sin member, giving
    ``2 * nmax`` functions.
    """
    if dim not in (1, 2, 3):
        raise InvalidBasis(f"dim must be 1, 2 or 3, got {dim!r}")
    if l < 0 or (dim == 1 and l > 1):
        raise InvalidBasis(f"invalid power l={l} for dim={dim}")
    if not cr:
        nus = prog.ranges()
        return BasisSet([BasisFunction(float(nu), l, dim, float(normalization(nu, l, dim))) for nu in nus])
    if not omega_cr > 0:
        raise InvalidBasis(f"complex-ranged basis needs omega_cr > 0, got {omega_cr!r}")
    nus = prog.ranges()
    funcs = []
    for nu in nus:
        for osc in ("cos", "sin"):
            norm = float(normalization(nu, l, dim, osc, omega_cr))
            funcs.append(BasisFunction(float(nu), l, dim, norm, osc, float(omega_cr)))
    return BasisSet(funcs)
