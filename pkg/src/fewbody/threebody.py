"""Machinery shared by the 1D and 3D three-body solvers.

Coordinates: particle positions ``s_0, s_1, s_2``.  Jacobi set ``i`` (with
``(i, j, k)`` cyclic) uses ``r_i = s_j - s_k`` and
``R_i = s_i - (m_j s_j + m_k s_k) / (m_j + m_k)``.  Pair potentials are given
per set, i.e. ``vints[i]`` acts on ``r_i``: ``vints = [v_12, v_20, v_01]``.

All matrix elements are evaluated in terms of a reference set (set 2); every
basis term is a Gaussian in its own Jacobi coordinates, which are linear
combinations of the reference ones.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .basis import geometric_ranges
from .errors import InvalidBasis, InvalidSymmetry, ValidationError
from .potentials import AlphaInterpolant, as_potential, build_alpha_interpolant

__all__ = [
    "PhysParams3B",
    "NumParams3B",
    "JacobiFrames",
    "Channel",
    "jacobi_frames",
    "enumerate_channels",
    "reduced_masses",
    "KernelTable",
    "PairForm",
    "pair_form",
]

REFERENCE_SET = 2
STATISTICS = {"b": 1, "f": -1}


def _cyclic(i: int) -> tuple[int, int, int]:
    return i, (i + 1) % 3, (i + 2) % 3


def reduced_masses(masses, i: int) -> tuple[float, float]:
    """``(mu_pair, mu_third)`` for Jacobi set ``i``."""
    _, j, k = _cyclic(i)
    m = masses
    mu_r = m[j] * m[k] / (m[j] + m[k])
    mu_R = m[i] * (m[j] + m[k]) / (m[i] + m[j] + m[k])
    return mu_r, mu_R


def _jacobi_rows(masses, i: int) -> np.ndarray:
    """2x3 matrix mapping particle positions to ``(r_i, R_i)``."""
    _, j, k = _cyclic(i)
    rows = np.zeros((2, 3))
    rows[0, j], rows[0, k] = 1.0, -1.0
    mjk = masses[j] + masses[k]
    rows[1, i] = 1.0
    rows[1, j] = -masses[j] / mjk
    rows[1, k] = -masses[k] / mjk
    return rows


@dataclass
class JacobiFrames:
    """Linear maps between the three Jacobi sets of a mass configuration."""

    masses: np.ndarray
    rows: list = field(init=False)  # particle -> set i
    to_particles: np.ndarray = field(init=False)  # (reference coords, cm) -> particles
    G: list = field(init=False)  # reference coords -> set i

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)
        if self.masses.shape != (3,) or np.any(self.masses <= 0):
            raise ValidationError("three positive masses are required")
        self.rows = [_jacobi_rows(self.masses, i) for i in range(3)]
        full = np.vstack([self.rows[REFERENCE_SET], self.masses / self.masses.sum()])
        self.to_particles = np.linalg.inv(full)
        self.G = [self.from_particles(r) for r in self.rows]

    def from_particles(self, rows: np.ndarray) -> np.ndarray:
        """Express translation-invariant particle combinations in reference coordinates."""
        return rows @ self.to_particles[:, :2]

    def transform(self, j: int, k: int) -> np.ndarray:
        """2x2 ``C`` with ``(r_j, R_j) = C @ (r_k, R_k)``."""
        return self.G[j] @ np.linalg.inv(self.G[k])

    def kinetic_weights(self, i: int = REFERENCE_SET) -> np.ndarray:
        """Inverse reduced masses of set ``i`` (the kinetic energy is diagonal in every set)."""
        mu_r, mu_R = reduced_masses(self.masses, i)
        return np.array([1.0 / mu_r, 1.0 / mu_R])

    def permuted(self, i: int, perm) -> np.ndarray:
        """Reference-coordinate matrix of ``(r_i, R_i)`` evaluated at permuted positions."""
        P = np.zeros((3, 3))
        for a, b in enumerate(perm):
            P[a, b] = 1.0
        return self.from_particles(self.rows[i] @ P)


def jacobi_frames(masses) -> JacobiFrames:
    return JacobiFrames(masses)


@dataclass
class PhysParams3B:
    masses: list
    svals: list = field(default_factory=lambda: ["x", "y", "z"])
    vints: list = field(default_factory=lambda: [[], [], []])
    parity: int = 1

    def __post_init__(self):
        if len(self.masses) != 3 or any(not m > 0 for m in self.masses):
            raise ValidationError(f"three positive masses are required, got {self.masses!r}")
        self.masses = [float(m) for m in self.masses]
        if len(self.svals) != 3:
            raise InvalidSymmetry(f"three symmetry labels are required, got {self.svals!r}")
        self.svals = [str(s) for s in self.svals]
        if len(self.vints) != 3:
            raise ValidationError("vints must hold three lists of pair potentials [v12, v20, v01]")
        self.vints = [[as_potential(v) for v in (pair if isinstance(pair, (list, tuple)) else [pair])] for pair in self.vints]
        if self.parity not in (-1, 0, 1):
            raise ValidationError(f"parity must be -1, 0 or +1, got {self.parity!r}")
        for a, b in itertools.combinations(range(3), 2):
            if self.svals[a] != self.svals[b]:
                continue
            if self.svals[a] not in STATISTICS:
                raise InvalidSymmetry(f"identical particles need label 'b' or 'f', got {self.svals[a]!r}")
            if not math.isclose(self.masses[a], self.masses[b], rel_tol=1e-14):
                raise InvalidSymmetry(f"identical particles {a} and {b} have different masses")
            c = 3 - a - b
            # pairs (a, c) and (b, c) must interact alike; compare set memberships
            if bool(self.vints[b]) != bool(self.vints[a]):
                raise InvalidSymmetry(f"particles {a} and {b} are identical but interact differently with {c}")

    def symmetry_group(self) -> list[tuple[tuple[int, int, int], int]]:
        """Permutations of identical particles with their (anti)symmetrization signs."""
        out = []
        for perm in itertools.permutations(range(3)):
            if any(self.svals[a] != self.svals[perm[a]] for a in range(3)):
                continue
            out.append((perm, _fermion_sign(perm, self.svals)))
        return out

    def active_sets(self) -> list[int]:
        active = [i for i in range(3) if self.vints[i]]
        return active or [0, 1, 2]


def _fermion_sign(perm, svals) -> int:
    """Sign of the permutation restricted to fermion labels."""
    sign = 1
    seen = set()
    for start in range(3):
        if start in seen:
            continue
        length, a = 0, start
        while a not in seen:
            seen.add(a)
            a = perm[a]
            length += 1
        if length > 1 and STATISTICS.get(svals[start], 1) < 0:
            sign *= (-1) ** (length - 1)
    return sign


@dataclass
class NumParams3B:
    nmax: int = 10
    r1: float = 0.1
    rnmax: float = 25.0
    Nmax: int = 10
    R1: float = 0.1
    RNmax: float = 25.0
    lmin: int = 0
    lmax: int = 0
    Lmin: int = 0
    Lmax: int = 0
    threshold: float = 1e-10
    kmax_interpol: int = 1000
    theta_csm: float = 0.0  # degrees

    def __post_init__(self):
        self.nus = 1.0 / geometric_ranges(self.nmax, self.r1, self.rnmax) ** 2
        self.lams = 1.0 / geometric_ranges(self.Nmax, self.R1, self.RNmax) ** 2
        if not (0 <= self.lmin <= self.lmax and 0 <= self.Lmin <= self.Lmax):
            raise InvalidBasis("need 0 <= lmin <= lmax and 0 <= Lmin <= Lmax")
        if not 0 < self.threshold < 1:
            raise ValidationError(f"threshold must lie in (0, 1), got {self.threshold!r}")
        if self.kmax_interpol < 4:
            raise ValidationError("kmax_interpol must be >= 4")
        if not 0 <= self.theta_csm < 45:
            raise ValidationError(f"theta_csm must lie in [0, 45) degrees, got {self.theta_csm!r}")


@dataclass(frozen=True)
class Channel:
    """A (symmetrized) Faddeev component with fixed ``(l, L)``.

    ``terms`` lists ``(set, coefficient)``; the basis function of the channel
    is ``sum coefficient * phi(r_set, R_set)``.
    """

    set_index: int
    l: int
    L: int
    terms: tuple

    @property
    def weight(self) -> float:
        return float(sum(abs(c) for _, c in self.terms))


def _identify_set(frames: JacobiFrames, M: np.ndarray) -> tuple[int, int, int]:
    """Find ``(set, sign_r, sign_R)`` with ``M = diag(sign_r, sign_R) @ G[set]``."""
    for s in range(3):
        G = frames.G[s]
        for sr, sR in itertools.product((1, -1), repeat=2):
            if np.allclose(M, np.diag([sr, sR]) @ G, atol=1e-12):
                return s, sr, sR
    raise InvalidSymmetry("permutation does not map Jacobi sets onto each other")


def enumerate_channels(pp: PhysParams3B, ls, Ls, parity: int | None = None) -> list[Channel]:
    """Channels over the active, symmetry-reduced Faddeev components."""
    parity = pp.parity if parity is None else parity
    frames = JacobiFrames(pp.masses)
    group = pp.symmetry_group()
    active = pp.active_sets()
    seen: set[int] = set()
    channels = []
    for i in active:
        if i in seen:
            continue
        images = {}
        for perm, sign in group:
            s, sr, sR = _identify_set(frames, frames.permuted(i, perm))
            images.setdefault(s, []).append((sign, sr, sR))
        seen.update(images)
        for l in ls:
            for L in Ls:
                if parity and (-1) ** (l + L) != parity:
                    continue
                terms = []
                for s in sorted(images):
                    coef = sum(sign * sr**l * sR**L for sign, sr, sR in images[s])
                    if coef:
                        terms.append((s, float(coef)))
                if terms:
                    channels.append(Channel(i, l, L, tuple(terms)))
    return channels


class KernelTable:
    """Closed-form kernels where available, log-alpha interpolants otherwise.

    Call :meth:`register` with every alpha array before the first
    evaluation; interpolation bounds are the observed extremes padded by
    one decade.
    """

    def __init__(self, domain: str, kmax_interpol: int, theta: float = 0.0):
        self.domain = domain
        self.kmax = kmax_interpol
        self.theta = theta
        self._bounds: dict[int, list[float]] = {}
        self._interp: dict[tuple[int, int], AlphaInterpolant] = {}

    def register(self, pot, alpha) -> None:
        if pot.analytic:
            return
        lo, hi = float(np.min(alpha)), float(np.max(alpha))
        b = self._bounds.setdefault(id(pot), [lo, hi])
        b[0], b[1] = min(b[0], lo), max(b[1], hi)

    def __call__(self, pot, n: int, alpha):
        if pot.analytic:
            return pot.kernel(n, alpha, self.domain, self.theta)
        key = (id(pot), n)
        if key not in self._interp:
            lo, hi = self._bounds[id(pot)]
            if hi <= lo:
                hi = lo * 10.0
            self._interp[key] = build_alpha_interpolant(
                pot, n, lo / 10.0, hi * 10.0, self.kmax, self.domain, self.theta
            )
        return self._interp[key](alpha)


def range_grid(np_: NumParams3B):
    """Broadcast-ready bra/ket range arrays of shape (n, N, 1, 1) and (1, 1, n, N)."""
    nu, lam = np_.nus, np_.lams
    bra = (nu[:, None, None, None], lam[None, :, None, None])
    ket = (nu[None, None, :, None], lam[None, None, None, :])
    return bra, ket


def quadratic_form(M: np.ndarray, nu, lam):
    """Entries ``(c00, c01, c11)`` of ``M^T diag(nu, lam) M``."""
    return (
        nu * M[0, 0] ** 2 + lam * M[1, 0] ** 2,
        nu * M[0, 0] * M[0, 1] + lam * M[1, 0] * M[1, 1],
        nu * M[0, 1] ** 2 + lam * M[1, 1] ** 2,
    )


@dataclass
class PairForm:
    """Exponent of a bra(set i) x ket(set j) product in set-i coordinates.

    ``ket`` holds the ket's quadratic form, ``C = diag(nu, lam) + ket`` the
    total and ``det`` its determinant, expanded as a sum of non-negative
    terms so that nearly singular forms keep full relative precision.
    """

    M: np.ndarray  # (r_j, R_j) = M (r_i, R_i)
    bra: tuple
    ket: tuple
    C: tuple
    det: np.ndarray
    det_ket: np.ndarray


def pair_form(frames: JacobiFrames, i: int, j: int, bra, ket) -> PairForm:
    M = np.eye(2) if i == j else frames.transform(j, i)
    nu, lam = bra
    kb = quadratic_form(M, *ket)
    C = (nu + kb[0], np.broadcast_to(kb[1], np.broadcast_shapes(np.shape(nu), np.shape(kb[1]))), lam + kb[2])
    det_ket = ket[0] * ket[1] * np.linalg.det(M) ** 2
    det = nu * lam + nu * kb[2] + lam * kb[0] + det_ket
    zero = np.zeros_like(nu)
    return PairForm(M, (nu, zero, lam), kb, C, det, det_ket)


def change_frame(C, B: np.ndarray):
    """Quadratic form ``B^T C B`` for ``v = B w`` (entries as above)."""
    c00, c01, c11 = C
    b = B
    a00 = b[0, 0] ** 2 * c00 + 2 * b[0, 0] * b[1, 0] * c01 + b[1, 0] ** 2 * c11
    a01 = b[0, 0] * b[0, 1] * c00 + (b[0, 0] * b[1, 1] + b[1, 0] * b[0, 1]) * c01 + b[1, 0] * b[1, 1] * c11
    a11 = b[0, 1] ** 2 * c00 + 2 * b[0, 1] * b[1, 1] * c01 + b[1, 1] ** 2 * c11
    return a00, a01, a11


def frame_to(frames: JacobiFrames, i: int, m: int) -> np.ndarray:
    """``B`` with set-i coordinates ``= B @`` set-m coordinates."""
    return np.eye(2) if i == m else frames.transform(i, m)
