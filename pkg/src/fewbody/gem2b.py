"""Two-body solver in 1, 2 or 3 dimensions.

The relative motion ``-1/(2 mu) nabla^2 + V(r)`` is expanded in Gaussians of
fixed angular momentum ``l`` (1D: parity 0/1, 2D: ``|m|``, 3D: orbital ``l``).
All matrix elements are bilinear in the basis functions, so complex-ranged
functions and complex scaling reuse the same formulas with complex
arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize

from .basis import BasisSet, RangeProgression, angular_measure, gaussian_moment, make_basis_2b
from .eigensolve import COMPLEX_SYMMETRIC, REAL_SYMMETRIC, AssembledSystem, Spectrum, solve_gevp
from .errors import (
    DegenerateBasis,
    InvalidIndex,
    NoSolution,
    ShapeMismatch,
    UnsupportedComplexEvaluation,
    ValidationError,
)
from .potentials import FULL_LINE, HALF_LINE, PotentialModel, as_potential

__all__ = [
    "PhysParams2B",
    "NumParams2B",
    "CoupledChannelSpec",
    "assemble_2b",
    "matrix_elements_2b",
    "solve_2b",
    "wavefunction_on_grid",
    "density_on_grid",
    "optimize_ranges",
    "scale_potential_to_energy",
    "fit_potential_and_ranges",
    "solve_coupled_channels",
    "csm_resonances",
    "filter_resonances",
]


@dataclass
class PhysParams2B:
    mur: float = 1.0
    vints: list = field(default_factory=list)
    dim: int = 3
    lmin: int = 0
    lmax: int = 0

    def __post_init__(self):
        if not self.mur > 0:
            raise ValidationError(f"reduced mass must be positive, got {self.mur!r}")
        if not self.vints:
            raise ValidationError("at least one potential is required")
        self.vints = [as_potential(v) for v in self.vints]
        if self.dim not in (1, 2, 3):
            raise ValidationError(f"dim must be 1, 2 or 3, got {self.dim!r}")
        if not 0 <= self.lmin <= self.lmax:
            raise ValidationError(f"need 0 <= lmin <= lmax, got {self.lmin}, {self.lmax}")
        if self.dim == 1 and self.lmax > 1:
            raise ValidationError("in 1D the angular momentum is a parity index (0 or 1)")

    def scaled(self, factor: float) -> "PhysParams2B":
        return replace(self, vints=[v.scaled(factor) for v in self.vints])


@dataclass
class NumParams2B:
    nmax: int = 10
    r1: float = 0.1
    rnmax: float = 30.0
    omega_cr: float = 1.5
    theta_csm: float = 0.0  # degrees
    threshold: float = 1e-10

    def __post_init__(self):
        RangeProgression(self.nmax, self.r1, self.rnmax).lengths()
        if not 0 <= self.theta_csm < 45:
            raise ValidationError(f"theta_csm must lie in [0, 45) degrees, got {self.theta_csm!r}")
        if not 0 < self.threshold < 1:
            raise ValidationError(f"threshold must lie in (0, 1), got {self.threshold!r}")
        if self.omega_cr < 0:
            raise ValidationError(f"omega_cr must be >= 0, got {self.omega_cr!r}")

    @property
    def gem(self) -> RangeProgression:
        return RangeProgression(self.nmax, self.r1, self.rnmax)


def _basis(np_: NumParams2B, l: int, dim: int, cr: bool) -> BasisSet:
    return make_basis_2b(np_.gem, l, dim, cr, np_.omega_cr)


def _potential_primitive_matrix(pot: PotentialModel, s: np.ndarray, l: int, dim: int, theta: float):
    """Bilinear potential integrals for the primitive range sums ``s`` (symmetric)."""
    iu = np.triu_indices(s.shape[0])
    if dim == 1:
        vals = pot.kernel(2 * l, s[iu], FULL_LINE, theta)
    else:
        vals = angular_measure(dim) * pot.kernel(2 * l + dim - 1, s[iu], HALF_LINE, theta)
    out = np.zeros(s.shape, dtype=complex)
    out[iu] = vals
    out.T[iu] = vals
    return out


def matrix_elements_2b(basis: BasisSet, pp: PhysParams2B, l: int, theta: float = 0.0, vints=None):
    """Overlap, kinetic and potential matrices over ``basis`` (theta in radians).

    Kinetic and potential carry the complex-scaling factors when ``theta`` is
    nonzero; the overlap is never rotated.
    """
    dim = pp.dim
    vints = pp.vints if vints is None else [as_potential(v) for v in vints]
    if theta:
        for v in vints:
            if not v.complex_capable:
                raise UnsupportedComplexEvaluation(f"{type(v).__name__} cannot be complex scaled")
    z, W = basis.primitive_expansion()
    s = z[:, None] + z[None, :]
    p = 2 * l + dim - 1
    S_prim = angular_measure(dim) * gaussian_moment(p, s)
    T_prim = (2 * dim + 4 * l) * (z[:, None] * z[None, :]) / s * S_prim / (2.0 * pp.mur)
    V_prim = sum(_potential_primitive_matrix(v, s, l, dim, theta) for v in vints)

    def contract(M):
        return W.T @ M @ W

    S, T, V = contract(S_prim), contract(T_prim), contract(V_prim)
    S = S.real
    if theta:
        T = T * np.exp(-2j * theta)
    else:
        T, V = T.real, V.real
    return S, T, V


def assemble_2b(pp: PhysParams2B, np_: NumParams2B, l: int, cr: bool = False, csm: bool = False) -> AssembledSystem:
    basis = _basis(np_, l, pp.dim, cr)
    theta = math.radians(np_.theta_csm) if csm else 0.0
    S, T, V = matrix_elements_2b(basis, pp, l, theta)
    H = T + V
    H = 0.5 * (H + H.T)
    S = 0.5 * (S + S.T)
    kind = COMPLEX_SYMMETRIC if csm else REAL_SYMMETRIC
    return AssembledSystem(H, S, kind)


def solve_2b(pp: PhysParams2B, np_: NumParams2B, wf: bool = False, cr: bool = False, csm: bool = False) -> Spectrum:
    """Spectra for every ``l`` in ``[lmin, lmax]``, concatenated in ``l`` order."""
    energies, vectors, tags, kept = [], [], [], 0
    for l in range(pp.lmin, pp.lmax + 1):
        spec = solve_gevp(assemble_2b(pp, np_, l, cr, csm), np_.threshold, want_vectors=wf)
        energies.append(spec.energies)
        tags.append(np.full(len(spec.energies), l))
        kept += spec.kept_dim
        if wf:
            vectors.append(spec.vectors)
    return Spectrum(
        energies=np.concatenate(energies),
        vectors=np.concatenate(vectors, axis=1) if wf else None,
        kept_dim=kept,
        channels=np.concatenate(tags),
    )


def wavefunction_on_grid(r_grid, pp: PhysParams2B, np_: NumParams2B, coeffs, cr: bool = False, l: int | None = None):
    """Radial wave function ``sum_a c_a phi_a(r)`` (angular factor excluded).

    In 1D ``r_grid`` is the signed coordinate.
    """
    l = pp.lmin if l is None else l
    basis = _basis(np_, l, pp.dim, cr)
    coeffs = np.asarray(coeffs)
    if coeffs.ndim != 1 or len(coeffs) != len(basis):
        raise ShapeMismatch(f"expected {len(basis)} coefficients, got shape {coeffs.shape}")
    return basis.evaluate(r_grid) @ coeffs


def density_on_grid(r_grid, pp: PhysParams2B, psi):
    """Probability density per unit radius; integrates to one over ``r >= 0``."""
    r = np.asarray(r_grid, dtype=float)
    return angular_measure(pp.dim) * r ** (pp.dim - 1) * np.abs(psi) ** 2


def _state_energy(pp, np_, stateindex, l, cr=False):
    spec = solve_gevp(assemble_2b(pp, np_, l, cr), np_.threshold)
    if stateindex > len(spec.energies):
        raise InvalidIndex(f"state {stateindex} requested but only {len(spec.energies)} states exist")
    return float(spec.energies[stateindex - 1])


def optimize_ranges(
    pp: PhysParams2B,
    np_: NumParams2B,
    stateindex: int,
    l: int | None = None,
    maxiter: int = 200,
):
    """Nelder-Mead over ``(log r1, log rnmax)`` minimizing the chosen eigenvalue.

    Returns ``(r1, rnmax, energy)``.
    """
    l = pp.lmin if l is None else l
    if stateindex < 1 or stateindex > np_.nmax:
        raise InvalidIndex(f"stateindex must lie in [1, {np_.nmax}], got {stateindex}")
    penalty = 1e30

    def objective(x):
        r1, rn = np.exp(x)
        if not rn > r1 * (1 + 1e-6):
            return penalty
        try:
            trial = replace(np_, r1=float(r1), rnmax=float(rn))
            return _state_energy(pp, trial, stateindex, l)
        except (DegenerateBasis, InvalidIndex, ValidationError):
            return penalty

    x0 = np.log([np_.r1, np_.rnmax])
    simplex = np.array([x0, x0 + [math.log(1.2), 0.0], x0 + [0.0, math.log(1.2)]])
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options=dict(initial_simplex=simplex, fatol=1e-10, xatol=1e-10, maxiter=maxiter),
    )
    r1, rn = np.exp(res.x)
    # never hand back something worse than the starting point
    if res.fun > objective(x0):
        r1, rn = np_.r1, np_.rnmax
    return float(r1), float(rn), float(objective(np.log([r1, rn])))


def scale_potential_to_energy(
    pp: PhysParams2B,
    np_: NumParams2B,
    stateindex: int,
    target_E: float,
    l: int | None = None,
    bounds: tuple[float, float] = (1e-3, 1e3),
) -> float:
    """Factor multiplying every potential so that state ``stateindex`` sits at ``target_E``."""
    l = pp.lmin if l is None else l
    if not target_E < 0:
        raise ValidationError(f"target energy must be negative, got {target_E!r}")

    def residual(s):
        try:
            return _state_energy(pp.scaled(s), np_, stateindex, l) - target_E
        except InvalidIndex:
            return math.inf

    lo, hi = bounds
    f1 = residual(1.0)
    if f1 == 0:
        return 1.0
    # bracket by geometric steps from s = 1 towards the side that crosses
    a, fa = 1.0, f1
    step = 2.0 if f1 > 0 else 0.5
    while True:
        b = a * step
        if not lo <= b <= hi:
            raise NoSolution(f"no scaling in [{lo}, {hi}] reaches E = {target_E}")
        fb = residual(b)
        if np.sign(fb) != np.sign(fa) and math.isfinite(fb) and math.isfinite(fa):
            break
        a, fa = b, fb
    root = brentq(residual, min(a, b), max(a, b), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(root)


def fit_potential_and_ranges(
    pp: PhysParams2B,
    np_: NumParams2B,
    stateindex: int,
    target_E: float,
    l: int | None = None,
    rounds: int = 10,
    rtol: float = 1e-10,
) -> tuple[PhysParams2B, NumParams2B, float]:
    """Alternate potential scaling and range optimization until the scale settles.

    Returns the rescaled physical parameters, the tuned numerical parameters
    and the overall scale factor.
    """
    scale = scale_potential_to_energy(pp, np_, stateindex, target_E, l)
    for _ in range(rounds):
        r1, rn, _ = optimize_ranges(pp.scaled(scale), np_, stateindex, l)
        np_ = replace(np_, r1=r1, rnmax=rn)
        new = scale_potential_to_energy(pp, np_, stateindex, target_E, l)
        settled = abs(new - scale) <= rtol * abs(scale)
        scale = new
        if settled:
            break
    return pp.scaled(scale), np_, scale


@dataclass
class CoupledChannelSpec:
    """Multi-channel radial problem.

    ``W`` maps channel pairs ``(c, c2)`` with ``c <= c2`` to a potential
    (symmetric coupling).  ``P`` maps pairs ``(c, c2)`` with ``c < c2`` to the
    coefficient of the derivative coupling ``P(r) d/dr``; the ``(c2, c)``
    entry is ``-P`` so that the Hermitian combination ``(P d/dr + d/dr P)/2``
    enters the Hamiltonian.
    """

    masses: list
    W: dict = field(default_factory=dict)
    P: dict = field(default_factory=dict)
    dim: int = 3
    ls: list | None = None

    def __post_init__(self):
        if any(not m > 0 for m in self.masses):
            raise ValidationError("channel masses must be positive")
        self.ls = [0] * self.nch if self.ls is None else list(self.ls)
        if len(self.ls) != self.nch:
            raise ShapeMismatch("one angular momentum per channel expected")
        self.W = self._normalize(self.W, symmetric=True)
        self.P = self._normalize(self.P, symmetric=False)

    @property
    def nch(self) -> int:
        return len(self.masses)

    def _normalize(self, table, symmetric):
        out = {}
        for (a, b), pot in table.items():
            if not (0 <= a < self.nch and 0 <= b < self.nch):
                raise ShapeMismatch(f"channel pair {(a, b)} out of range")
            if not symmetric and a == b:
                raise ValidationError("derivative coupling must be off-diagonal")
            key = (min(a, b), max(a, b))
            pot = as_potential(pot)
            if not symmetric and a > b:
                pot = pot.scaled(-1.0)
            if key in out and out[key] != pot:
                raise ValidationError(f"conflicting entries for channel pair {key}")
            out[key] = pot
        return out


def _coupled_block(pot, za, zb, la, lb, dim, derivative=False):
    """Primitive block of ``pot`` (or of its Hermitian derivative coupling) between two channels."""
    s = za[:, None] + zb[None, :]
    # the 1D full-line kernel already covers both half-lines
    omega = 1.0 if dim == 1 else angular_measure(dim)
    dom = FULL_LINE if dim == 1 else HALF_LINE
    base = la + lb + dim - 1
    if not derivative:
        return omega * pot.kernel(base, s, dom)
    # (f_a f_b' - f_a' f_b)/2 = f_a f_b [(lb - la)/(2r) + (za - zb) r]
    out = omega * (za[:, None] - zb[None, :]) * pot.kernel(base + 1, s, dom)
    if la != lb:
        out = out + omega * 0.5 * (lb - la) * pot.kernel(base - 1, s, dom)
    return out


def solve_coupled_channels(cc: CoupledChannelSpec, np_: NumParams2B, wf: bool = False) -> Spectrum:
    bases = [_basis(np_, l, cc.dim, False) for l in cc.ls]
    expansions = [b.primitive_expansion() for b in bases]
    sizes = [len(b) for b in bases]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = offsets[-1]
    H = np.zeros((n, n))
    S = np.zeros((n, n))
    for c in range(cc.nch):
        pp = PhysParams2B(cc.masses[c], [cc.W.get((c, c), _ZERO)], cc.dim, cc.ls[c], cc.ls[c])
        Sc, Tc, Vc = matrix_elements_2b(bases[c], pp, cc.ls[c])
        blk = slice(offsets[c], offsets[c + 1])
        S[blk, blk] = Sc
        H[blk, blk] = Tc + Vc
    couplings = [(a, b, pot, False) for (a, b), pot in cc.W.items() if a != b]
    couplings += [(a, b, pot, True) for (a, b), pot in cc.P.items()]
    for a, b, pot, derivative in couplings:
        za, Wa = expansions[a]
        zb, Wb = expansions[b]
        prim = _coupled_block(pot, za, zb, cc.ls[a], cc.ls[b], cc.dim, derivative)
        blk = (Wa.T @ prim @ Wb).real
        ra, rb = slice(offsets[a], offsets[a + 1]), slice(offsets[b], offsets[b + 1])
        H[ra, rb] += blk
        H[rb, ra] += blk.T
    H = 0.5 * (H + H.T)
    return solve_gevp(AssembledSystem(H, S), np_.threshold, want_vectors=wf)


class _Zero(PotentialModel):
    analytic = True

    def __call__(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def kernel(self, n, alpha, domain=HALF_LINE, theta=0.0):
        return np.zeros_like(np.asarray(alpha), dtype=complex if theta else np.result_type(alpha, float))


_ZERO = _Zero()


def filter_resonances(energies, theta_deg: float, delta_arg: float = 5.0, emax: float = math.inf):
    """Eigenvalues inside the wedge ``-2 theta + delta < arg E < -delta`` with ``|E| <= emax``."""
    E = np.asarray(energies, dtype=complex)
    arg = np.degrees(np.angle(E))
    keep = (E.imag < 0) & (arg > -2.0 * theta_deg + delta_arg) & (arg < -delta_arg) & (np.abs(E) <= emax)
    return E[keep]


def csm_resonances(
    pp: PhysParams2B,
    np_: NumParams2B,
    theta: float | None = None,
    delta_arg: float = 5.0,
    emax: float = math.inf,
    cr: bool = False,
):
    """Complex-scaled spectrum and the eigenvalues that qualify as resonances.

    ``theta`` is in degrees and defaults to ``np_.theta_csm``.  Resonances are
    ordered by distance from the rotated continuum line, most isolated first.
    """
    theta = np_.theta_csm if theta is None else theta
    spec = solve_2b(pp, replace(np_, theta_csm=theta), cr=cr, csm=True)
    res = filter_resonances(spec.energies, theta, delta_arg, emax)
    gap = np.degrees(np.angle(res)) + 2.0 * theta
    return spec, res[np.argsort(-gap)]
