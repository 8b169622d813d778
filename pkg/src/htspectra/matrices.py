"""Finite-N heavy-tailed random matrix ensembles.

Band matrices A(i,j) = sigma(i/N, j/N) x_ij / a_N with optional entry
truncation and diagonal perturbation, sample covariance matrices
W = X X^t / a_{N+M}^2, and the symmetric block embedding whose square is
block-diagonal in W and its companion.  Variance profiles sigma come in
four variants (constant, piecewise-constant on a grid of intervals, band
phi(x-y), and a sampled grid) with the norms the limit theory needs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .sampling import RngStreamSpec, StableTailLaw, normalizer_a_N, sample_entries

__all__ = [
    "SigmaProfile",
    "DiagonalLaw",
    "EnsembleSpec",
    "build_band_matrix",
    "assemble_band_matrix",
    "build_covariance_matrix",
    "block_embed",
    "profile_alpha_norm",
    "equivalent_constant",
    "covariance_profile",
]

_VARIANTS = ("constant", "piecewise", "band", "grid")


@dataclass(frozen=True)
class SigmaProfile:
    """Symmetric variance profile sigma(x, y) on [0,1]^2.

    constant:  sigma = c everywhere.
    piecewise: constant sigma_rs on I_r x I_s for a partition
               0 = b_0 < b_1 < ... < b_q = 1.
    band:      sigma(x, y) = phi(x - y) for an even period-1 step
               function phi, given by breakpoints and values on [0, 1].
    grid:      values sampled on a p x p uniform lattice.
    """

    variant: str
    c: float = 1.0
    breaks: tuple = ()
    matrix: tuple = ()
    breakpoints: tuple = ()
    values: tuple = ()
    resolution: int = 0

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown profile variant {self.variant!r}")
        if self.variant == "piecewise":
            b = np.asarray(self.breaks, dtype=float)
            if b.size < 2 or b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
                raise ValueError("breaks must increase strictly from 0 to 1")
            m = np.asarray(self.matrix, dtype=float)
            q = b.size - 1
            if m.shape != (q, q):
                raise ValueError(f"matrix must be {q}x{q}")
            if not np.array_equal(m, m.T):
                raise ValueError("piecewise matrix must be symmetric")
        elif self.variant == "band":
            b = np.asarray(self.breakpoints, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if b.size < 2 or b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
                raise ValueError("breakpoints must increase strictly from 0 to 1")
            if v.size != b.size - 1:
                raise ValueError("need one value per breakpoint interval")
            # phi must be even: phi(1 - x) = phi(-x) = phi(x) by periodicity.
            xs = 0.5 * (b[:-1] + b[1:])
            for x, val in zip(xs, v):
                if abs(self._band_phi(1.0 - x) - val) > 1e-12:
                    raise ValueError("band profile phi must be even")
        elif self.variant == "grid":
            v = np.asarray(self.values, dtype=float)
            p = self.resolution
            if p < 1 or v.shape != (p, p):
                raise ValueError(f"grid values must be {p}x{p}")
            if not np.array_equal(v, v.T):
                raise ValueError("grid values must be symmetric")

    # -- evaluation ---------------------------------------------------------

    def _band_phi(self, x: float) -> float:
        x = x % 1.0
        b = np.asarray(self.breakpoints, dtype=float)
        idx = min(int(np.searchsorted(b, x, side="right")) - 1, b.size - 2)
        return float(np.asarray(self.values, dtype=float)[max(idx, 0)])

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """sigma at arbitrary points of [0,1]^2 (vectorized)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.variant == "constant":
            return np.broadcast_to(float(self.c), np.broadcast_shapes(x.shape, y.shape)).copy()
        if self.variant == "piecewise":
            b = np.asarray(self.breaks, dtype=float)
            m = np.asarray(self.matrix, dtype=float)
            r = np.clip(np.searchsorted(b, x, side="right") - 1, 0, b.size - 2)
            s = np.clip(np.searchsorted(b, y, side="right") - 1, 0, b.size - 2)
            return m[r, s]
        if self.variant == "band":
            d = np.mod(x - y, 1.0)
            b = np.asarray(self.breakpoints, dtype=float)
            v = np.asarray(self.values, dtype=float)
            idx = np.clip(np.searchsorted(b, d, side="right") - 1, 0, b.size - 2)
            return v[idx]
        p = self.resolution
        v = np.asarray(self.values, dtype=float)
        r = np.clip((np.asarray(x) * p).astype(int), 0, p - 1)
        s = np.clip((np.asarray(y) * p).astype(int), 0, p - 1)
        return v[r, s]

    def lattice(self, N: int) -> np.ndarray:
        """sigma sampled at ((i+1)/N, (j+1)/N), i, j = 0..N-1."""
        t = np.arange(1, N + 1) / N
        return self.evaluate(t[:, None], t[None, :])

    # -- piecewise-constant normal form ------------------------------------

    def cells(self, lattice_hint: int = 0):
        """Partition (breaks, matrix) viewing every variant as piecewise.

        Returns (breaks b_0..b_q, q x q matrix, weights Delta_r).  The band
        and grid variants are exact on their own breakpoints/lattice; a
        constant is a single cell.
        """
        if self.variant == "constant":
            b = np.array([0.0, 1.0])
            m = np.array([[float(self.c)]])
        elif self.variant == "piecewise":
            b = np.asarray(self.breaks, dtype=float)
            m = np.asarray(self.matrix, dtype=float)
        elif self.variant == "band":
            # phi(x - y) is not constant on product cells; return a uniform
            # refinement with midpoint values, adequate for norms but not for
            # the limit system -- use alpha_kernel for that.
            q = max(16, lattice_hint)
            b = np.arange(q + 1) / q
            mids = 0.5 * (b[:-1] + b[1:])
            m = self.evaluate(mids[:, None], mids[None, :])
        else:
            p = self.resolution
            b = np.arange(p + 1) / p
            m = np.asarray(self.values, dtype=float)
        weights = np.diff(b)
        return b, m, weights

    # -- JSON ---------------------------------------------------------------

    @staticmethod
    def from_json(obj) -> "SigmaProfile":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = obj.get("type")
        if kind == "constant":
            return SigmaProfile("constant", c=float(obj["c"]))
        if kind == "piecewise":
            return SigmaProfile("piecewise", breaks=tuple(obj["breaks"]),
                                matrix=tuple(tuple(row) for row in obj["matrix"]))
        if kind == "band":
            return SigmaProfile("band", breakpoints=tuple(obj["breakpoints"]),
                                values=tuple(obj["values"]))
        if kind == "grid":
            return SigmaProfile("grid", resolution=int(obj["resolution"]),
                                values=tuple(tuple(row) for row in obj["values"]))
        raise ValueError(f"unknown profile type {kind!r}")

    def to_json(self) -> dict:
        if self.variant == "constant":
            return {"type": "constant", "c": self.c}
        if self.variant == "piecewise":
            return {"type": "piecewise", "breaks": list(self.breaks),
                    "matrix": [list(r) for r in self.matrix]}
        if self.variant == "band":
            return {"type": "band", "breakpoints": list(self.breakpoints),
                    "values": list(self.values)}
        return {"type": "grid", "resolution": self.resolution,
                "values": [list(r) for r in self.values]}


@dataclass(frozen=True)
class DiagonalLaw:
    """Finite-atom law of the diagonal perturbation entries."""

    atoms: tuple  # of (location, weight)

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("need at least one atom")
        w = sum(wi for _, wi in self.atoms)
        if any(wi <= 0 for _, wi in self.atoms):
            raise ValueError("weights must be positive")
        if abs(w - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w}")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        locs = np.array([l for l, _ in self.atoms])
        ws = np.array([w for _, w in self.atoms])
        return rng.choice(locs, size=size, p=ws / ws.sum())

    @staticmethod
    def from_json(obj) -> "DiagonalLaw":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return DiagonalLaw(tuple((float(a["lambda"]), float(a["w"]))
                                 for a in obj["atoms"]))

    def to_json(self) -> dict:
        return {"atoms": [{"lambda": l, "w": w} for l, w in self.atoms]}


def _validate_truncation(truncation, alpha: float):
    if truncation is None:
        return
    kind = truncation[0]
    if kind == "fixed_B":
        if truncation[1] <= 0:
            raise ValueError("truncation level B must be positive")
    elif kind == "polynomial_kappa":
        kappa = truncation[1]
        if not 0.0 < kappa < 1.0 / (2.0 * (2.0 - alpha)):
            raise ValueError(
                f"kappa must lie in (0, {1.0 / (2.0 * (2.0 - alpha)):.4f})")
    else:
        raise ValueError(f"unknown truncation {kind!r}")


@dataclass(frozen=True)
class EnsembleSpec:
    """Everything needed to build one band-matrix sample."""

    N: int
    law: StableTailLaw
    profile: SigmaProfile
    truncation: Optional[tuple] = None  # ("fixed_B", B) | ("polynomial_kappa", k)
    diagonal: Optional[DiagonalLaw] = None
    seed: RngStreamSpec = field(default_factory=lambda: RngStreamSpec(0))

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        _validate_truncation(self.truncation, self.law.alpha)


def _truncation_level(spec: EnsembleSpec, a_N: float) -> Optional[float]:
    if spec.truncation is None:
        return None
    kind, value = spec.truncation
    if kind == "fixed_B":
        return value * a_N
    return spec.N ** value * a_N


def assemble_band_matrix(entries: np.ndarray, profile: SigmaProfile,
                         a_N: float, truncate_at: Optional[float] = None,
                         diagonal: Optional[np.ndarray] = None) -> np.ndarray:
    """Deterministic assembly A(i,j) = sigma(i/N, j/N) x_ij / a_N.

    ``entries`` is the upper triangle (including diagonal) of the symmetric
    x array; the lower triangle of the input is ignored.  Separated from the
    sampling so that forced draws can be assembled in tests.
    """
    x = np.triu(np.asarray(entries, dtype=float))
    x = x + np.triu(x, 1).T
    if truncate_at is not None:
        x = np.where(np.abs(x) < truncate_at, x, 0.0)
    N = x.shape[0]
    a = profile.lattice(N) * x / a_N
    if diagonal is not None:
        a = a + np.diag(np.asarray(diagonal, dtype=float))
    return a


def build_band_matrix(spec: EnsembleSpec) -> np.ndarray:
    """One sample of the normalized band matrix (optionally truncated,
    optionally diagonally perturbed)."""
    rng = spec.seed.generator()
    x = sample_entries(spec.law, rng, (spec.N, spec.N))
    a_N = normalizer_a_N(spec.law, spec.N)
    diag = None
    if spec.diagonal is not None:
        diag = spec.diagonal.sample(rng, spec.N)
    return assemble_band_matrix(x, spec.profile, a_N,
                                truncate_at=_truncation_level(spec, a_N),
                                diagonal=diag)


def build_covariance_matrix(law: StableTailLaw, N: int, M: int,
                            seed: RngStreamSpec,
                            entries: Optional[np.ndarray] = None) -> np.ndarray:
    """W = X X^t / a_{N+M}^2 with X an N x M matrix of i.i.d. draws."""
    if not 1 <= M <= N:
        raise ValueError("need 1 <= M <= N")
    if entries is None:
        rng = seed.generator()
        entries = sample_entries(law, rng, (N, M))
    x = np.asarray(entries, dtype=float)
    a = normalizer_a_N(law, N + M)
    return x @ x.T / (a * a)


def block_embed(x: np.ndarray, scale: float) -> np.ndarray:
    """Symmetric embedding [[0, s X], [s X^t, 0]] of an N x M block."""
    x = np.asarray(x, dtype=float)
    n, m = x.shape
    out = np.zeros((n + m, n + m))
    out[:n, n:] = scale * x
    out[n:, :n] = scale * x.T
    return out


def _tent_integral(psi_breaks: np.ndarray, psi_values: np.ndarray,
                   center: float, h: float) -> float:
    """Integral of the period-1 step function psi against the triangle of
    height h supported on [center-h, center+h]."""
    total = 0.0
    lo, hi = center - h, center + h
    # split [lo, hi] at every shifted copy of the psi breakpoints
    k0 = math.floor(lo)
    pts = [lo, hi, center]
    for k in range(k0, math.ceil(hi) + 1):
        for b in psi_breaks:
            p = b + k
            if lo < p < hi:
                pts.append(p)
    pts = sorted(set(pts))
    for u1, u2 in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (u1 + u2)
        d = mid % 1.0
        idx = min(int(np.searchsorted(psi_breaks, d, side="right")) - 1,
                  psi_breaks.size - 2)
        v = psi_values[max(idx, 0)]
        # triangle weight integrated exactly on [u1, u2]
        if mid <= center:
            w = (h * (u2 - u1) - 0.5 * ((center - u1) ** 2 - (center - u2) ** 2))
        else:
            w = (h * (u2 - u1) - 0.5 * ((u2 - center) ** 2 - (u1 - center) ** 2))
        total += v * w
    return total


def alpha_kernel(profile: SigmaProfile, alpha: float, cells: int = 6):
    """Weights and kernel of the limiting q-component system.

    Returns (weights Delta_s, K) with K_rs the cell value of |sigma|^alpha.
    For the band variant K is the exact cell average of |phi(x-v)|^alpha,
    whose rows all sum (against the weights) to int_0^1 |phi|^alpha: the
    translation-invariant system then has an exactly constant solution.
    """
    if profile.variant != "band":
        _, m, w = profile.cells()
        return w, np.abs(m) ** alpha
    b = np.asarray(profile.breakpoints, dtype=float)
    v = np.abs(np.asarray(profile.values, dtype=float)) ** alpha
    q = cells
    h = 1.0 / q
    col = np.array([_tent_integral(b, v, (r * h) % 1.0, h) / (h * h)
                    for r in range(q)])
    k = np.empty((q, q))
    for r in range(q):
        for s in range(q):
            k[r, s] = col[(r - s) % q]
    return np.full(q, h), k


def profile_alpha_norm(profile: SigmaProfile, alpha: float, N: int = 2000):
    """(k_sigma, star_norm) where

    k_sigma   = sup_x int_0^1 |sigma(x, v)|^alpha dv        (operator norm)
    star_norm = sqrt((1/N^2) sum_ij sigma(i/N, j/N)^2)       (lattice L2)
    """
    if profile.variant == "band":
        # int |phi(x - v)|^alpha dv is x-independent and exactly the
        # breakpoint sum.
        bb = np.asarray(profile.breakpoints, dtype=float)
        vv = np.asarray(profile.values, dtype=float)
        k_sigma = float(np.sum(np.abs(vv) ** alpha * np.diff(bb)))
    else:
        b, m, w = profile.cells()
        k_sigma = float(np.max(np.abs(m) ** alpha @ w))
    lat = profile.lattice(N)
    star = math.sqrt(float(np.mean(lat * lat)))
    return k_sigma, star


def equivalent_constant(profile: SigmaProfile, alpha: float) -> SigmaProfile:
    """Constant profile with the same limiting spectrum as a band profile:
    sigma~ = (int_0^1 |phi(v)|^alpha dv)^(1/alpha)."""
    if profile.variant != "band":
        raise ValueError("equivalent_constant needs a band profile")
    b = np.asarray(profile.breakpoints, dtype=float)
    v = np.asarray(profile.values, dtype=float)
    integral = float(np.sum(np.abs(v) ** alpha * np.diff(b)))
    return SigmaProfile("constant", c=integral ** (1.0 / alpha))


def covariance_profile(gamma: float) -> SigmaProfile:
    """Two-block off-diagonal profile whose band matrix mirrors the
    covariance block embedding: break at 1/(1+gamma), sigma_12 = 1."""
    if gamma <= 0 or gamma > 1:
        raise ValueError("gamma must lie in (0, 1]")
    brk = 1.0 / (1.0 + gamma)
    return SigmaProfile("piecewise", breaks=(0.0, brk, 1.0),
                        matrix=((0.0, 1.0), (1.0, 0.0)))
