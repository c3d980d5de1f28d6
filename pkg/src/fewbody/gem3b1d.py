"""Three particles on a line.

Each channel's basis functions are

    x^l X^L exp(-nu x^2 - lam X^2),   (x, X) = (r_i, R_i)

summed over the Jacobi sets reached by the identical-particle permutations.
Matrix elements are integrated over the bra's own Jacobi coordinates,
where every product is a polynomial times ``exp(-v^T C v)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import binom

from .basis import normalization
from .eigensolve import COMPLEX_SYMMETRIC, REAL_SYMMETRIC, AssembledSystem, Spectrum, solve_gevp
from .errors import InvalidBasis
from .potentials import FULL_LINE
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
    "PhysParams3B1D",
    "NumParams3B1D",
    "enumerate_channels_1d",
    "assemble_3b1d",
    "solve_3b1d",
]


class PhysParams3B1D(PhysParams3B):
    pass


@dataclass
class NumParams3B1D(NumParams3B):
    def __post_init__(self):
        super().__post_init__()
        if self.lmax > 1 or self.Lmax > 1:
            raise InvalidBasis("1D parity waves take l, L in {0, 1}")


def enumerate_channels_1d(pp: PhysParams3B, np_: NumParams3B) -> list[Channel]:
    return enumerate_channels(pp, range(np_.lmin, np_.lmax + 1), range(np_.Lmin, np_.Lmax + 1))


# --- polynomials in two variables: {(p, q): coefficient} --------------------


def _mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (p, q), x in a.items():
        for (r, s), y in b.items():
            key = (p + r, q + s)
            out[key] = out.get(key, 0.0) + x * y
    return out


def _linear_power(g, n: int) -> dict:
    out = {(0, 0): 1.0}
    lin = {(1, 0): float(g[0]), (0, 1): float(g[1])}
    for _ in range(n):
        out = _mul(out, lin)
    return out


def _monomial(G: np.ndarray, l: int, L: int) -> dict:
    """``(G v)_0^l (G v)_1^L``."""
    return _mul(_linear_power(G[0], l), _linear_power(G[1], L))


def _gradient_factor(P: dict, A, k: int) -> dict:
    """Polynomial ``Q`` with ``d/dv_k [P exp(-v^T A v)] = Q exp(-v^T A v)``."""
    a_k0, a_k1 = (A[0], A[1]) if k == 0 else (A[1], A[2])
    out: dict = {}
    for (p, q), c in P.items():
        e = p if k == 0 else q
        if e:
            key = (p - 1, q) if k == 0 else (p, q - 1)
            out[key] = out.get(key, 0.0) + e * c
        out[(p + 1, q)] = out.get((p + 1, q), 0.0) - 2.0 * a_k0 * c
        out[(p, q + 1)] = out.get((p, q + 1), 0.0) - 2.0 * a_k1 * c
    return out


def _moments(C, det, pmax: int, qmax: int) -> dict:
    """``int x^p y^q exp(-(c00 x^2 + 2 c01 x y + c11 y^2))`` over the plane."""
    c00, c01, c11 = C
    s00, s01, s11 = c11 / (2 * det), -c01 / (2 * det), c00 / (2 * det)
    M = {(0, 0): np.pi / np.sqrt(det)}
    for q in range(1, qmax + 1):
        M[(0, q)] = (q - 1) * s11 * M[(0, q - 2)] if q >= 2 else 0.0 * s11
    for p in range(1, pmax + 1):
        for q in range(qmax + 1):
            val = (p - 1) * s00 * M[(p - 2, q)] if p >= 2 else 0.0 * s00
            if q:
                val = val + q * s01 * M[(p - 1, q - 1)]
            M[(p, q)] = val
    return M


def _integrate(P: dict, C, det):
    M = _moments(C, det, max(p for p, _ in P), max(q for _, q in P))
    return sum(c * M[key] for key, c in P.items())


def _reduce_to_kernels(P: dict, Cw, det) -> tuple[dict, object]:
    """Integrate out the spectator coordinate ``y`` of ``P(t, y) exp(-w^T C w)``.

    Returns ``({n: coefficient}, alpha)`` such that the integral against
    ``V(t)`` is ``sum_n coefficient * int t^n exp(-alpha t^2) V(t) dt``.
    """
    _, b, c = Cw
    kappa = b / c
    alpha = det / c
    out: dict = {}
    for (p, q), coef in P.items():
        for k in range(0, q + 1, 2):
            w = binom(q, k) * (-kappa) ** (q - k) * math.gamma((k + 1) / 2) * c ** (-(k + 1) / 2)
            n = p + q - k
            out[n] = out.get(n, 0.0) + coef * w
    return out, alpha


# --- assembly -------------------------------------------------------------------


@dataclass
class _Context:
    pp: PhysParams3B
    np_: NumParams3B
    frames: JacobiFrames
    table: KernelTable
    theta: float
    bra: tuple
    ket: tuple

    def form(self, i: int, j: int) -> PairForm:
        return pair_form(self.frames, i, j, self.bra, self.ket)


def _register_alphas(ctx: _Context, pairs) -> None:
    for i, j in pairs:
        pf = ctx.form(i, j)
        for m in range(3):
            if not ctx.pp.vints[m]:
                continue
            Cw = change_frame(pf.C, frame_to(ctx.frames, i, m))
            for pot in ctx.pp.vints[m]:
                ctx.table.register(pot, pf.det / Cw[2])


def _primitive_block(ctx: _Context, i: int, l: int, L: int, j: int, l2: int, L2: int):
    """(S, T, V) between unsymmetrized set-i and set-j functions, shape (nN, nN).

    Integrals run over the bra's own Jacobi coordinates.
    """
    fr = ctx.frames
    pf = ctx.form(i, j)
    Pa, Pb = {(l, L): 1.0}, _monomial(pf.M, l2, L2)

    S = _integrate(_mul(Pa, Pb), pf.C, pf.det)
    lam = fr.kinetic_weights(i)
    T = 0.0
    for k in range(2):
        Qa, Qb = _gradient_factor(Pa, pf.bra, k), _gradient_factor(Pb, pf.ket, k)
        T = T + 0.5 * lam[k] * _integrate(_mul(Qa, Qb), pf.C, pf.det)

    V = 0.0
    for m in range(3):
        if not ctx.pp.vints[m]:
            continue
        B = frame_to(fr, i, m)
        # polynomials in frame-m coordinates w, with v = B w
        Pw = _mul(_monomial(B, l, L), _monomial(pf.M @ B, l2, L2))
        coefs, alpha = _reduce_to_kernels(Pw, change_frame(pf.C, B), pf.det)
        for pot in ctx.pp.vints[m]:
            for n, c in coefs.items():
                V = V + c * ctx.table(pot, n, alpha)

    nu_a, lam_a = ctx.bra
    nu_b, lam_b = ctx.ket
    norm = (
        normalization(nu_a, l, 1) * normalization(lam_a, L, 1) * normalization(nu_b, l2, 1) * normalization(lam_b, L2, 1)
    )
    size = len(ctx.np_.nus) * len(ctx.np_.lams)
    return [np.broadcast_to(norm * M, norm.shape).reshape(size, size) for M in (S, T, V)]


def assemble_3b1d(pp: PhysParams3B, np_: NumParams3B, csm: bool = False) -> tuple[AssembledSystem, list[Channel]]:
    channels = enumerate_channels_1d(pp, np_)
    if not channels:
        raise InvalidBasis("no channel satisfies the parity and symmetry constraints")
    theta = math.radians(np_.theta_csm) if csm else 0.0
    bra, ket = range_grid(np_)
    ctx = _Context(pp, np_, JacobiFrames(pp.masses), KernelTable(FULL_LINE, np_.kmax_interpol, theta), theta, bra, ket)

    pairs = {(i, j) for a in channels for b in channels for i, _ in a.terms for j, _ in b.terms}
    _register_alphas(ctx, pairs)

    cache: dict = {}

    def block(i, l, L, j, l2, L2):
        key = (i, l, L, j, l2, L2)
        if key not in cache:
            rkey = (j, l2, L2, i, l, L)
            if rkey in cache:
                cache[key] = [M.T for M in cache[rkey]]
            else:
                cache[key] = _primitive_block(ctx, i, l, L, j, l2, L2)
        return cache[key]

    nb = len(np_.nus) * len(np_.lams)
    size = nb * len(channels)
    dtype = complex if theta else float
    S = np.zeros((size, size))
    T = np.zeros((size, size))
    V = np.zeros((size, size), dtype=dtype)
    for ia, a in enumerate(channels):
        for ib in range(ia, len(channels)):
            b = channels[ib]
            sa, sb = slice(ia * nb, (ia + 1) * nb), slice(ib * nb, (ib + 1) * nb)
            for i, ci in a.terms:
                for j, cj in b.terms:
                    s, t, v = block(i, a.l, a.L, j, b.l, b.L)
                    S[sa, sb] += ci * cj * s
                    T[sa, sb] += ci * cj * t
                    V[sa, sb] += ci * cj * v
            if ib != ia:
                S[sb, sa], T[sb, sa], V[sb, sa] = S[sa, sb].T, T[sa, sb].T, V[sa, sb].T
    if theta:
        H = T * np.exp(-2j * theta) + V
        return AssembledSystem(H, S, COMPLEX_SYMMETRIC), channels
    return AssembledSystem(T + V, S, REAL_SYMMETRIC), channels


def solve_3b1d(pp: PhysParams3B, np_: NumParams3B, csm: bool = False, want_vectors: bool = False) -> Spectrum:
    """Three-body energies (ascending; complex and sorted by real part with ``csm``)."""
    sys, channels = assemble_3b1d(pp, np_, csm)
    spec = solve_gevp(sys, np_.threshold, want_vectors)
    spec.extra["channels"] = channels
    spec.extra["basis_size"] = sys.dim
    return spec
