"""Three particles in 3D with central pair forces, s-wave channels only.

Basis functions are ``exp(-nu r_i^2 - lam R_i^2)`` on each Jacobi set.  The
product of a bra on set ``i`` and a ket on set ``j``, written in set-``i``
coordinates, is ``exp(-v^T C v)`` with ``C`` a 2x2 form acting on pairs of
3-vectors, and

    int d^3r d^3R exp(-a r^2 - b R^2 - c r.R) = pi^3 (ab - c^2/4)^(-3/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigensolve import COMPLEX_SYMMETRIC, REAL_SYMMETRIC, AssembledSystem, Spectrum, solve_gevp
from .errors import InvalidBasis, InvalidIndex, NonCentralPotential, ShapeMismatch, ValidationError
from .potentials import HALF_LINE, ContactPotential1D, as_potential
from .threebody import (
    Channel,
    JacobiFrames,
    KernelTable,
    NumParams3B,
    PairForm,
    PhysParams3B,
    change_frame,
    enumerate_channels,
    frame_to,
    pair_form,
    range_grid,
)

__all__ = [
    "PhysParams3B3D",
    "NumParams3B3D",
    "ObservRequest",
    "correlated_gaussian_integral",
    "assemble_3b3d",
    "solve_3b3d",
    "mean_R2",
]


class PhysParams3B3D(PhysParams3B):
    def __post_init__(self):
        super().__post_init__()
        for pair in self.vints:
            for v in pair:
                if isinstance(v, ContactPotential1D):
                    raise NonCentralPotential("1D contact interactions have no 3D central counterpart")


@dataclass
class NumParams3B3D(NumParams3B):
    def __post_init__(self):
        super().__post_init__()
        if self.lmax or self.Lmax:
            raise InvalidBasis("the 3D three-body solver covers s-wave channels (l = L = 0) only")


@dataclass
class ObservRequest:
    """Observables on 1-based states: ``centobs[i]`` are functions of ``r_i``."""

    stateindices: list = field(default_factory=lambda: [1])
    centobs: list = field(default_factory=lambda: [[], [], []])
    R2_flags: list = field(default_factory=lambda: [False, False, False])

    def __post_init__(self):
        if len(self.centobs) != 3 or len(self.R2_flags) != 3:
            raise ValidationError("centobs and R2_flags need one entry per Jacobi set")
        self.centobs = [[as_potential(o) for o in obs] for obs in self.centobs]
        self.R2_flags = [bool(f) for f in self.R2_flags]
        self.stateindices = [int(k) for k in self.stateindices]


def correlated_gaussian_integral(a, b, c):
    """``int d^3r d^3R exp(-a r^2 - b R^2 - c r.R)`` for ``ab > c^2/4``."""
    return np.pi**3 * (a * b - c * c / 4.0) ** -1.5


def enumerate_channels_3d(pp: PhysParams3B) -> list[Channel]:
    return enumerate_channels(pp, [0], [0], parity=0)


@dataclass
class _Context:
    pp: PhysParams3B
    np_: NumParams3B
    frames: JacobiFrames
    table: KernelTable
    bra: tuple
    ket: tuple

    def form(self, i: int, j: int) -> PairForm:
        return pair_form(self.frames, i, j, self.bra, self.ket)

    @property
    def size(self) -> int:
        return len(self.np_.nus) * len(self.np_.lams)

    def norm(self):
        nu_a, lam_a = self.bra
        nu_b, lam_b = self.ket
        return ((2 / np.pi) ** 4 * nu_a * lam_a * nu_b * lam_b) ** 0.75

    def finish(self, M):
        n = self.norm()
        return np.broadcast_to(n * M, n.shape).reshape(self.size, self.size)


def _overlap(pf: PairForm):
    return (np.pi**2 / pf.det) ** 1.5


def _kinetic(pf: PairForm, weights) -> np.ndarray:
    """``6 tr(Lambda A_a Sigma A_b)`` times the overlap, ``Sigma = (2C)^-1``.

    Diagonal entries of ``Sigma A_b`` are written as sums of non-negative
    terms (``C = A_a + A_b`` with ``A_a`` diagonal).
    """
    nu, _, lam = pf.bra
    b00, _, b11 = pf.ket
    sa0 = (lam * b00 + pf.det_ket) / (2 * pf.det)
    sa1 = (nu * b11 + pf.det_ket) / (2 * pf.det)
    return 6.0 * (weights[0] * nu * sa0 + weights[1] * lam * sa1) * _overlap(pf)


def _radial_operator(ctx: _Context, pf: PairForm, i: int, m: int, pots):
    """Matrix of ``sum(pots)(|r_m|)`` between the set-i/set-j pair ``pf``."""
    Cw = change_frame(pf.C, frame_to(ctx.frames, i, m))
    c = Cw[2]
    alpha = pf.det / c
    pref = (np.pi / c) ** 1.5 * 4.0 * np.pi
    return sum(pref * ctx.table(p, 2, alpha) for p in pots)


def _register(ctx: _Context, pairs, ops) -> None:
    for i, j in pairs:
        pf = ctx.form(i, j)
        for m in range(3):
            if ops[m]:
                Cw = change_frame(pf.C, frame_to(ctx.frames, i, m))
                for p in ops[m]:
                    ctx.table.register(p, pf.det / Cw[2])


def _assemble_blocks(ctx: _Context, channels, element, dtype=float):
    """Symmetric matrix over channels from a primitive ``element(i, j)`` builder."""
    cache: dict = {}
    nb = ctx.size
    out = np.zeros((nb * len(channels),) * 2, dtype=dtype)
    for ia, a in enumerate(channels):
        for ib in range(ia, len(channels)):
            b = channels[ib]
            sa, sb = slice(ia * nb, (ia + 1) * nb), slice(ib * nb, (ib + 1) * nb)
            for i, ci in a.terms:
                for j, cj in b.terms:
                    if (i, j) not in cache:
                        cache[(i, j)] = cache[(j, i)].T if (j, i) in cache else element(i, j)
                    out[sa, sb] += ci * cj * cache[(i, j)]
            if ib != ia:
                out[sb, sa] = out[sa, sb].T
    return out


def _setup(pp: PhysParams3B, np_: NumParams3B, theta: float):
    channels = enumerate_channels_3d(pp)
    if not channels:
        raise InvalidBasis("symmetrization removes every s-wave channel")
    bra, ket = range_grid(np_)
    ctx = _Context(pp, np_, JacobiFrames(pp.masses), KernelTable(HALF_LINE, np_.kmax_interpol, theta), bra, ket)
    pairs = {(i, j) for a in channels for b in channels for i, _ in a.terms for j, _ in b.terms}
    return ctx, channels, pairs


def assemble_3b3d(
    pp: PhysParams3B, np_: NumParams3B, csm_theta: float = 0.0
) -> tuple[AssembledSystem, list[Channel]]:
    """Hamiltonian and overlap; ``csm_theta`` in degrees (0 disables scaling)."""
    theta = math.radians(csm_theta)
    ctx, channels, pairs = _setup(pp, np_, theta)
    _register(ctx, pairs, pp.vints)
    weights = {i: ctx.frames.kinetic_weights(i) for i in range(3)}

    S = _assemble_blocks(ctx, channels, lambda i, j: ctx.finish(_overlap(ctx.form(i, j))))
    T = _assemble_blocks(ctx, channels, lambda i, j: ctx.finish(_kinetic(ctx.form(i, j), weights[i])))

    def potential(i, j):
        pf = ctx.form(i, j)
        return ctx.finish(sum(_radial_operator(ctx, pf, i, m, pp.vints[m]) for m in range(3) if pp.vints[m]))

    V = _assemble_blocks(ctx, channels, potential, complex if theta else float)
    if theta:
        return AssembledSystem(T * np.exp(-2j * theta) + V, S, COMPLEX_SYMMETRIC), channels
    return AssembledSystem(T + V, S, REAL_SYMMETRIC), channels


def _expectation(c, M, S):
    return (c @ M @ c) / (c @ S @ c)


def _R2_matrix(ctx: _Context, channels, m: int):
    def element(i, j):
        pf = ctx.form(i, j)
        g = frame_to(ctx.frames, m, i)[1]  # R_m in set-i coordinates
        c00, c01, c11 = pf.C
        quad = (g[0] ** 2 * c11 - 2 * g[0] * g[1] * c01 + g[1] ** 2 * c00) / (2 * pf.det)
        return ctx.finish(3.0 * quad * _overlap(pf))

    return _assemble_blocks(ctx, channels, element)


def mean_R2(coeffs, set_index: int, pp: PhysParams3B, np_: NumParams3B) -> float:
    """``<R^2>`` of Jacobi set ``set_index`` (0-based) for a coefficient vector."""
    if set_index not in (0, 1, 2):
        raise InvalidIndex(f"Jacobi set index must be 0, 1 or 2, got {set_index!r}")
    ctx, channels, _ = _setup(pp, np_, 0.0)
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (ctx.size * len(channels),):
        raise ShapeMismatch(f"expected {ctx.size * len(channels)} coefficients, got shape {coeffs.shape}")
    S = _assemble_blocks(ctx, channels, lambda i, j: ctx.finish(_overlap(ctx.form(i, j))))
    return float(np.real(_expectation(coeffs, _R2_matrix(ctx, channels, set_index), S)))


def _observables(pp, np_, spec: Spectrum, S, observ: ObservRequest) -> dict:
    n = len(spec.energies)
    for k in observ.stateindices:
        if not 1 <= k <= n:
            raise InvalidIndex(f"state {k} requested but only {n} states exist")
    ctx, channels, pairs = _setup(pp, np_, 0.0)
    _register(ctx, pairs, observ.centobs)
    centobs = []
    for m in range(3):
        mats = []
        for obs in observ.centobs[m]:
            mats.append(_assemble_blocks(ctx, channels, lambda i, j: ctx.finish(_radial_operator(ctx, ctx.form(i, j), i, m, [obs]))))
        centobs.append(mats)
    R2 = [_R2_matrix(ctx, channels, m) if observ.R2_flags[m] else None for m in range(3)]

    report = {"stateindices": list(observ.stateindices), "centobs": [], "R2": []}
    for k in observ.stateindices:
        c = spec.vectors[:, k - 1]
        report["centobs"].append([[float(np.real(_expectation(c, M, S))) for M in centobs[m]] for m in range(3)])
        report["R2"].append([float(np.real(_expectation(c, R2[m], S))) if R2[m] is not None else None for m in range(3)])
    return report


def solve_3b3d(
    pp: PhysParams3B,
    np_: NumParams3B,
    observ: ObservRequest | None = None,
    want_wf: bool = False,
    csm: bool = False,
) -> tuple[Spectrum, dict | None]:
    """Energies (ascending) and, on request, observable means per state and set."""
    theta = np_.theta_csm if csm else 0.0
    sys, channels = assemble_3b3d(pp, np_, theta)
    spec = solve_gevp(sys, np_.threshold, want_vectors=want_wf or observ is not None)
    spec.extra["channels"] = channels
    spec.extra["basis_size"] = sys.dim
    report = None
    if observ is not None and (observ.stateindices and (any(observ.centobs) or any(observ.R2_flags))):
        report = _observables(pp, np_, spec, sys.S, observ)
    if not want_wf:
        spec.vectors = None if observ is None else spec.vectors
    return spec, report
