"""Pair potentials and the universal radial kernel.

Every central-potential matrix element between Gaussian basis functions
reduces to

    K(n, alpha) = int dr r^n exp(-alpha r^2) V(r)

over the half line (radial problems) or the full line (1D problems with a
signed coordinate).  Gaussian and 1D contact potentials have closed forms;
everything else goes through composite Gauss-Legendre quadrature.  For many
alpha values an :class:`AlphaInterpolant` tabulates the kernel on a log grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma

from .errors import IntegrationFailure, OutOfRange, UnsupportedComplexEvaluation, ValidationError
from .expr import parse_potential_expr

__all__ = [
    "PotentialModel",
    "GaussianPotential",
    "ContactPotential1D",
    "CallablePotential",
    "TabulatedPotential",
    "LinearCombination",
    "KernelRequest",
    "AlphaInterpolant",
    "as_potential",
    "eval_potential",
    "radial_kernel",
    "build_alpha_interpolant",
    "load_tabulated",
    "HALF_LINE",
    "FULL_LINE",
]

HALF_LINE = "half_line"
FULL_LINE = "full_line"

# Integration stops where exp(-Re(alpha) r^2) drops below 1e-30.
LOG_CUTOFF = 30.0 * math.log(10.0)
GL_NODES = 64
GL_PANELS = 16
_CHUNK = 1 << 21


@lru_cache(maxsize=None)
def _unit_rule() -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [0, 1]; panel widths double outward."""
    x, w = np.polynomial.legendre.leggauss(GL_NODES)
    h0 = 1.0 / (2.0**GL_PANELS - 1.0)
    nodes, weights = [], []
    a = 0.0
    for k in range(GL_PANELS):
        b = a + h0 * 2.0**k
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
        a = b
    return np.concatenate(nodes), np.concatenate(weights)


def _check_domain(domain: str) -> None:
    if domain not in (HALF_LINE, FULL_LINE):
        raise ValueError(f"domain must be {HALF_LINE!r} or {FULL_LINE!r}, got {domain!r}")


class PotentialModel:
    """Base class.  Subclasses provide ``__call__`` and, optionally, a closed-form kernel."""

    complex_capable: bool = True
    analytic: bool = False

    def __call__(self, r):
        raise NotImplementedError

    def kernel(self, n: int, alpha, domain: str = HALF_LINE, theta: float = 0.0):
        """``int r^n exp(-alpha r^2) V(r e^{i theta}) dr`` evaluated elementwise over ``alpha``."""
        _check_domain(domain)
        if theta and not self.complex_capable:
            raise UnsupportedComplexEvaluation(f"{type(self).__name__} cannot be complex scaled")
        return _quadrature_kernel(self, n, alpha, domain, theta)

    def scaled(self, factor: float) -> "PotentialModel":
        return LinearCombination(((factor, self),))

    def __add__(self, other):
        return LinearCombination(((1.0, self), (1.0, as_potential(other))))

    def __mul__(self, factor):
        return self.scaled(factor)

    __rmul__ = __mul__


@dataclass(frozen=True)
class GaussianPotential(PotentialModel):
    """``v0 exp(-mu_g r^2)``."""

    v0: float
    mu_g: float
    analytic = True

    def __post_init__(self):
        if not self.mu_g > 0:
            raise ValidationError(f"GaussianPotential needs mu_g > 0, got {self.mu_g!r}")

    def __call__(self, r):
        return self.v0 * np.exp(-self.mu_g * np.asarray(r) ** 2)

    def kernel(self, n, alpha, domain=HALF_LINE, theta=0.0):
        _check_domain(domain)
        beta = np.asarray(alpha) + self.mu_g * np.exp(2j * theta) if theta else np.asarray(alpha) + self.mu_g
        half = self.v0 * gamma((n + 1) / 2.0) / (2.0 * beta ** ((n + 1) / 2.0))
        if domain == HALF_LINE:
            return half
        return 2.0 * half if n % 2 == 0 else np.zeros_like(half)

    def scaled(self, factor):
        return GaussianPotential(self.v0 * factor, self.mu_g)


@dataclass(frozen=True)
class ContactPotential1D(PotentialModel):
    """``g delta(x - x0)`` on the signed 1D coordinate."""

    g: float
    x0: float = 0.0
    analytic = True

    def __call__(self, r):
        raise TypeError("a contact potential has no pointwise value; use its kernel")

    def kernel(self, n, alpha, domain=FULL_LINE, theta=0.0):
        _check_domain(domain)
        alpha = np.asarray(alpha)
        if domain == HALF_LINE and self.x0 < 0:
            return np.zeros_like(alpha, dtype=float)
        # delta(x e^{i theta} - x0) = e^{-i theta} delta(x - x0 e^{-i theta})
        g, x0 = self.g, self.x0
        if theta:
            g = g * np.exp(-1j * theta)
            x0 = x0 * np.exp(-1j * theta)
        return g * x0**n * np.exp(-alpha * x0**2)

    def scaled(self, factor):
        return ContactPotential1D(self.g * factor, self.x0)


@dataclass(frozen=True)
class CallablePotential(PotentialModel):
    """Arbitrary function of ``r``; called with numpy arrays."""

    func: Callable
    complex_capable: bool = True

    def __call__(self, r):
        r = np.asarray(r)
        try:
            out = self.func(r)
        except (TypeError, ValueError):
            out = np.vectorize(self.func, otypes=[complex if np.iscomplexobj(r) else float])(r)
        return np.broadcast_to(np.asarray(out), r.shape)


@dataclass(frozen=True, eq=False)
class TabulatedPotential(PotentialModel):
    """Values on a strictly increasing grid, zero beyond the last point."""

    r: np.ndarray
    values: np.ndarray
    rule: str = "cubic"
    complex_capable = False
    _interp: Callable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
            raise ValidationError("tabulated potential needs two equal-length 1D arrays")
        if np.any(np.diff(r) <= 0):
            raise ValidationError("tabulated grid must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValidationError("tabulated values must be finite")
        if self.rule == "cubic":
            interp = CubicSpline(r, v, extrapolate=True)
        elif self.rule == "linear":
            def interp(x, _r=r, _v=v):
                return np.interp(x, _r, _v)
        else:
            raise ValidationError(f"unknown interpolation rule {self.rule!r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_interp", interp)

    def __call__(self, r):
        r = np.asarray(r)
        if np.iscomplexobj(r):
            raise UnsupportedComplexEvaluation("tabulated potentials accept real arguments only")
        out = np.asarray(self._interp(r), dtype=float)
        return np.where(r > self.r[-1], 0.0, out)

    @classmethod
    def from_file(cls, path, rule: str = "cubic") -> "TabulatedPotential":
        return load_tabulated(path, rule)


@dataclass(frozen=True)
class LinearCombination(PotentialModel):
    """``sum_i c_i V_i``; kernels combine linearly."""

    terms: tuple

    @property
    def complex_capable(self):
        return all(p.complex_capable for _, p in self.terms)

    @property
    def analytic(self):
        return all(p.analytic for _, p in self.terms)

    def __call__(self, r):
        return sum(c * p(r) for c, p in self.terms)

    def kernel(self, n, alpha, domain=HALF_LINE, theta=0.0):
        return sum(c * p.kernel(n, alpha, domain, theta) for c, p in self.terms)

    def scaled(self, factor):
        return LinearCombination(tuple((c * factor, p) for c, p in self.terms))


def as_potential(obj) -> PotentialModel:
    """Accept a model, a callable of ``r`` or an expression string such as ``"-1/r"``."""
    if isinstance(obj, PotentialModel):
        return obj
    if isinstance(obj, str):
        return CallablePotential(parse_potential_expr(obj))
    if callable(obj):
        return CallablePotential(obj)
    raise TypeError(f"cannot interpret {obj!r} as a potential")


def eval_potential(p, r):
    p = as_potential(p)
    if np.iscomplexobj(r) and not p.complex_capable:
        raise UnsupportedComplexEvaluation(f"{type(p).__name__} cannot be evaluated at complex r")
    return p(r)


def load_tabulated(path, rule: str = "cubic") -> TabulatedPotential:
    """Two whitespace-separated columns ``r V``; ``#`` starts a comment."""
    data = np.loadtxt(Path(path), comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValidationError(f"{path}: expected two columns, found {data.shape[1]}")
    return TabulatedPotential(data[:, 0], data[:, 1], rule)


def _check_integrable(p: PotentialModel, n: int, domain: str, theta: float) -> None:
    """Reject ``r^n V(r)`` behaving like ``r^q`` with ``q <= -1`` at the origin."""
    phase = np.exp(1j * theta) if theta else 1.0
    r = np.array([1e-10, 1e-6])
    with np.errstate(all="ignore"):
        f = np.abs(p(r * phase))
        if domain == FULL_LINE:
            f = f + np.abs(p(-r * phase))
    if not (np.all(np.isfinite(f)) and np.all(f > 0)):
        return
    q = n + np.log(f[1] / f[0]) / np.log(r[1] / r[0])
    if q <= -0.99:
        raise IntegrationFailure(f"r^{n} V(r) is not integrable at the origin (local power {q:.2f})")


def _quadrature_kernel(p: PotentialModel, n: int, alpha, domain: str, theta: float):
    _check_integrable(p, n, domain, theta)
    alpha = np.asarray(alpha)
    shape = alpha.shape
    flat = alpha.reshape(-1)
    t, w = _unit_rule()
    phase = np.exp(1j * theta) if theta else 1.0
    out_complex = np.iscomplexobj(flat) or bool(theta)
    out = np.empty(flat.shape, dtype=complex if out_complex else float)
    step = max(1, _CHUNK // len(t))
    for start in range(0, len(flat), step):
        a = flat[start : start + step]
        re = np.real(a)
        if np.any(re <= 0):
            raise IntegrationFailure("kernel requires Re(alpha) > 0")
        rmax = np.sqrt(LOG_CUTOFF / re)
        r = rmax[:, None] * t[None, :]
        with np.errstate(invalid="ignore", over="ignore"):  # non-finite results are reported below
            v = p(r * phase)
            if domain == FULL_LINE:
                v = v + (-1) ** n * p(-r * phase)
            vals = np.sum(r**n * np.exp(-a[:, None] * r**2) * v * w[None, :], axis=1) * rmax
        if not out_complex and np.iscomplexobj(vals):
            vals = vals.real
        out[start : start + step] = vals
    if not np.all(np.isfinite(out)):
        raise IntegrationFailure(f"non-finite kernel value for {type(p).__name__} (n={n})")
    return out.reshape(shape)


@dataclass(frozen=True)
class KernelRequest:
    l_eff: int
    alpha: object
    domain: str = HALF_LINE
    csm_theta: float = 0.0  # radians

    def __post_init__(self):
        if self.l_eff < 0 or int(self.l_eff) != self.l_eff:
            raise ValidationError(f"l_eff must be a nonnegative integer, got {self.l_eff!r}")
        if np.any(np.real(np.asarray(self.alpha)) <= 0):
            raise ValidationError("alpha must have a positive real part")
        _check_domain(self.domain)


def radial_kernel(p, req: KernelRequest):
    return as_potential(p).kernel(req.l_eff, req.alpha, req.domain, req.csm_theta)


@dataclass
class AlphaInterpolant:
    """Cubic spline of ``K(alpha) * alpha**((l_eff+1)/2)`` in ``log(alpha)``.

    The scaling removes the leading power law so the spline only has to
    follow the potential's own structure.
    """

    l_eff: int
    alpha_min: float
    alpha_max: float
    knots: np.ndarray
    values: np.ndarray
    _re: CubicSpline = field(repr=False)
    _im: CubicSpline | None = field(default=None, repr=False)

    def __call__(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        lo, hi = self.alpha_min * (1 - 1e-12), self.alpha_max * (1 + 1e-12)
        if alpha.size and (alpha.min() < lo or alpha.max() > hi):
            raise OutOfRange(
                f"alpha in [{alpha.min():.3e}, {alpha.max():.3e}] outside "
                f"interpolation range [{self.alpha_min:.3e}, {self.alpha_max:.3e}]"
            )
        x = np.log(alpha)
        scaled = self._re(x) if self._im is None else self._re(x) + 1j * self._im(x)
        return scaled * alpha ** (-(self.l_eff + 1) / 2.0)


def build_alpha_interpolant(
    p,
    l_eff: int,
    alpha_min: float,
    alpha_max: float,
    kmax_interpol: int = 1000,
    domain: str = HALF_LINE,
    theta: float = 0.0,
) -> AlphaInterpolant:
    if not 0 < alpha_min < alpha_max:
        raise ValidationError(f"need 0 < alpha_min < alpha_max, got {alpha_min!r}, {alpha_max!r}")
    if kmax_interpol < 4:
        raise ValidationError(f"kmax_interpol must be >= 4, got {kmax_interpol!r}")
    knots = np.linspace(math.log(alpha_min), math.log(alpha_max), int(kmax_interpol))
    alphas = np.exp(knots)
    values = as_potential(p).kernel(l_eff, alphas, domain, theta) * alphas ** ((l_eff + 1) / 2.0)
    if np.iscomplexobj(values):
        re, im = CubicSpline(knots, values.real), CubicSpline(knots, values.imag)
    else:
        re, im = CubicSpline(knots, values), None
    return AlphaInterpolant(l_eff, float(alpha_min), float(alpha_max), knots, values, re, im)
