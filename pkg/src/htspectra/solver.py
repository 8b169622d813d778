"""Fixed-point solvers for the limiting spectral systems.

Every system has the shape  unknowns = F(z, unknowns)  with F contractive
for large |z| (band/Wigner/Wishart) or large Im z (diagonally perturbed).
The solver therefore always starts on the imaginary axis at a radius where
a 1/3-contraction is guaranteed by explicit bounds on g_alpha and its
derivative, iterates damped Picard there from 0, and continues the solution
geometrically toward the requested z, warm-starting each step.  This keeps
the iteration on the branch that tends to zero at infinity, which is the
one describing the spectral measure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .matrices import DiagonalLaw, SigmaProfile, alpha_kernel
from .special import (
    AlphaParam,
    K_ALPHA,
    K_HAT_ALPHA,
    c_alpha,
    c_alpha_bar,
    cone_bound,
    cone_contains,
    g_alpha,
    g_alpha_prime,
    principal_power,
)

__all__ = [
    "FixedPointConfig",
    "FixedPointSolution",
    "SolverError",
    "solve_wigner",
    "solve_band",
    "solve_wishart_pair",
    "solve_perturbed",
    "continue_to_real_axis",
    "find_critical_set",
    "wigner_system",
    "band_system",
    "wishart_system",
    "perturbed_system",
]


class SolverError(RuntimeError):
    """Iteration failed to reach the residual target."""

    def __init__(self, message, unknowns=None, residual=None):
        super().__init__(message)
        self.unknowns = unknowns
        self.residual = residual


@dataclass(frozen=True)
class FixedPointConfig:
    tol: float = 1e-12
    max_iter: int = 500
    damping: float = 1.0
    continuation_factor: float = 0.8

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if not 0.0 < self.continuation_factor < 1.0:
            raise ValueError("continuation_factor must lie in (0, 1)")


@dataclass(frozen=True)
class FixedPointSolution:
    z: complex
    unknowns: np.ndarray
    residual: float
    iterations: int
    u: complex            # diagnostic coordinate z^(-alpha)
    cone: str = K_ALPHA


class _System:
    """One fixed-point system: map, residual, cone and startup radius."""

    cone = K_ALPHA

    def __init__(self, a: AlphaParam):
        self.a = a
        self.q = 1

    def apply(self, z: complex, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def residual(self, z: complex, y: np.ndarray,
                 fy: Optional[np.ndarray] = None) -> float:
        if fy is None:
            fy = self.apply(z, y)
        za = abs(principal_power(z, self._alpha()))
        return za * float(np.max(np.abs(y - fy)))

    def start_radius(self) -> float:
        raise NotImplementedError

    def start_z(self, z_target: complex) -> complex:
        return 1j * max(self.start_radius(), abs(z_target), 1.0)

    def _alpha(self) -> float:
        return self.a.alpha


class _BandSystem(_System):
    """z^alpha Y_r = C_alpha sum_s K_rs Delta_s g_alpha(Y_s)."""

    def __init__(self, a: AlphaParam, weights: np.ndarray, kernel: np.ndarray):
        super().__init__(a)
        self.weights = np.asarray(weights, dtype=float)
        self.kernel = np.asarray(kernel, dtype=float)
        self.q = self.weights.size
        self.c = c_alpha(a)
        # kernel contracted with the cell weights
        self.kw = self.kernel * self.weights[None, :]

    def apply(self, z, y):
        za = principal_power(z, self._alpha())
        g = np.array([g_alpha(self.a, yi) for yi in y])
        return (self.c / za) * (self.kw @ g)

    def row_mass(self) -> float:
        return float(np.max(np.sum(self.kw, axis=1))) if self.q else 0.0

    def start_radius(self):
        # Lipschitz constant of F is |z|^-alpha |C| sup|g'| max_r sum_s K Delta;
        # force it below 1/3.
        lip = abs(self.c) * cone_bound(self.a, 2.0 * self._alpha()) * self.row_mass()
        return (3.0 * max(lip, 1e-300)) ** (1.0 / self._alpha())

    def jacobian(self, z, y):
        za = principal_power(z, self._alpha())
        gp = np.array([g_alpha_prime(self.a, yi) for yi in y])
        return np.eye(self.q) - (self.c / za) * self.kw * gp[None, :]


class _WishartSystem(_System):
    """The coupled pair behind covariance spectra:
    z^alpha Y1 = gamma/(1+gamma) C g(Y2),  z^alpha Y2 = 1/(1+gamma) C g(Y1)."""

    def __init__(self, a: AlphaParam, gamma: float):
        super().__init__(a)
        if not 0.0 < gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        self.gamma = gamma
        self.q = 2
        self.c = c_alpha(a)

    def apply(self, z, y):
        za = principal_power(z, self._alpha())
        g1 = g_alpha(self.a, y[0])
        g2 = g_alpha(self.a, y[1])
        pref = self.c / (za * (1.0 + self.gamma))
        return np.array([pref * self.gamma * g2, pref * g1])

    def start_radius(self):
        lip = abs(self.c) * cone_bound(self.a, 2.0 * self._alpha())
        return (3.0 * lip) ** (1.0 / self._alpha())

    def jacobian(self, z, y):
        za = principal_power(z, self._alpha())
        pref = self.c / (za * (1.0 + self.gamma))
        gp1 = g_alpha_prime(self.a, y[0])
        gp2 = g_alpha_prime(self.a, y[1])
        return np.array([[1.0, -pref * self.gamma * gp2],
                         [-pref * gp1, 1.0]])


class _PerturbedSystem(_System):
    """X_r = conj(C_alpha) sum_s K_rs Delta_s
              sum_i w_i (lam_i - z)^(-alpha/2) g_alpha((lam_i - z)^(-alpha/2) X_s),
    the system of the diagonally perturbed ensemble; unknowns live in the
    lower cone (phases in [-alpha pi/2, 0])."""

    cone = K_HAT_ALPHA

    def __init__(self, a: AlphaParam, weights, kernel, diag: DiagonalLaw):
        super().__init__(a)
        self.weights = np.asarray(weights, dtype=float)
        self.kernel = np.asarray(kernel, dtype=float)
        self.q = self.weights.size
        self.kw = self.kernel * self.weights[None, :]
        self.atoms = tuple(diag.atoms)
        self.cbar = c_alpha_bar(a)

    def _phases(self, z):
        return [(w, principal_power(lam - z, -0.5 * self._alpha()))
                for lam, w in self.atoms]

    def apply(self, z, x):
        ph = self._phases(z)
        out = np.empty_like(x)
        vals = np.empty(self.q, dtype=complex)
        for s in range(self.q):
            acc = 0.0 + 0.0j
            for w, p in ph:
                acc += w * p * g_alpha(self.a, p * x[s])
            vals[s] = acc
        out[:] = self.cbar * (self.kw @ vals)
        return out

    def residual(self, z, x, fx=None):
        if fx is None:
            fx = self.apply(z, x)
        return float(np.max(np.abs(x - fx)))

    def start_radius(self):
        # contraction in Im z: |(lam - z)^(-alpha/2)|^2 <= Im(z)^-alpha
        k = float(np.max(np.sum(self.kw, axis=1))) if self.q else 0.0
        lip = abs(self.cbar) * cone_bound(self.a, 2.0 * self._alpha()) * k
        return (3.0 * max(lip, 1e-300)) ** (1.0 / self._alpha())


# ---------------------------------------------------------------------------
# generic iteration and continuation


def _picard(system: _System, z: complex, y0: np.ndarray,
            cfg: FixedPointConfig) -> FixedPointSolution:
    y = np.array(y0, dtype=complex)
    d = cfg.damping
    d_cap = cfg.damping
    decreases = 0
    stalls = 0
    prev = math.inf
    res = math.inf
    for it in range(1, cfg.max_iter + 1):
        fy = system.apply(z, y)
        res = system.residual(z, y, fy)
        if res <= cfg.tol:
            return FixedPointSolution(
                z=z, unknowns=y, residual=res, iterations=it,
                u=principal_power(z, -system._alpha()), cone=system.cone)
        if res > prev and d > 1e-3:
            d *= 0.5
            decreases = 0
            stalls = 0
        elif res > 0.97 * prev:
            # barely contracting: a complex multiplier of modulus ~1 is
            # beaten by averaging, so damp harder and keep it that way
            stalls += 1
            if stalls >= 10 and d > 1e-3:
                d *= 0.5
                d_cap = d
                stalls = 0
        else:
            stalls = 0
            decreases += 1
            if decreases >= 5 and d < d_cap:
                d = min(d_cap, 2.0 * d)
                decreases = 0
        prev = res
        y = (1.0 - d) * y + d * fy
    raise SolverError(
        f"no convergence at z={z}: residual {res:.3e} after {cfg.max_iter} "
        "iterations", unknowns=y, residual=res)


def _newton_warm(system: _System, z: complex, y0: np.ndarray,
                 cfg: FixedPointConfig):
    """Newton iteration from a warm start; None on any sign of trouble.

    A solution at a nearby z is close enough for quadratic convergence,
    which beats the linear Picard rate when the contraction factor is near
    one (deep inside the bulk or close to the real axis).  Divergence,
    singular Jacobians or cone exits simply hand back to damped Picard.
    """
    y = np.array(y0, dtype=complex)
    best = math.inf
    for it in range(1, 13):
        try:
            fy = system.apply(z, y)
        except (ValueError, ArithmeticError):
            return None
        res = system.residual(z, y, fy)
        if res <= cfg.tol:
            return FixedPointSolution(
                z=z, unknowns=y, residual=res, iterations=it,
                u=principal_power(z, -system._alpha()), cone=system.cone)
        if not math.isfinite(res) or res > 100.0 * best:
            return None
        best = min(best, res)
        try:
            jac = system.jacobian(z, y)
            y = y - np.linalg.solve(jac, y - fy)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError):
            return None
        if not np.all(np.isfinite(y)):
            return None
        if not all(cone_contains(system.cone, system.a, yi, 0.1) for yi in y):
            return None
    return None


def _check_cone(system: _System, y: np.ndarray, slack: float = 1e-9):
    a = system.a
    for yi in y:
        if not cone_contains(system.cone, a, yi, slack):
            raise SolverError(
                f"iterate {yi} left the cone {system.cone} "
                "(branch loss during continuation)", unknowns=y)


def _solve(system: _System, z: complex, cfg: FixedPointConfig,
           warm: Optional[np.ndarray] = None) -> FixedPointSolution:
    """Contraction startup at large |z| plus geometric continuation to z."""
    if z.imag <= 0:
        raise ValueError("z must lie in the open upper half-plane")
    if warm is not None:
        sol = None
        if hasattr(system, "jacobian"):
            sol = _newton_warm(system, z, warm, cfg)
        if sol is None:
            sol = _picard(system, z, warm, cfg)
        _check_cone(system, sol.unknowns)
        return sol
    z0 = system.start_z(z)
    y = np.zeros(system.q, dtype=complex)
    zc = z0
    while True:
        sol = _picard(system, zc, y, cfg)
        y = sol.unknowns
        _check_cone(system, y)
        if zc == z:
            return sol
        step = z + cfg.continuation_factor * (zc - z)
        if abs(step - z) < 0.05 * abs(z):
            step = z
        zc = step


# ---------------------------------------------------------------------------
# public constructors and solvers


def wigner_system(a: AlphaParam) -> _BandSystem:
    return _BandSystem(a, np.array([1.0]), np.array([[1.0]]))


def band_system(a: AlphaParam, profile: SigmaProfile,
                cells: int = 6) -> _BandSystem:
    w, k = alpha_kernel(profile, a.alpha, cells=cells)
    return _BandSystem(a, w, k)


def wishart_system(a: AlphaParam, gamma: float) -> _WishartSystem:
    return _WishartSystem(a, gamma)


def perturbed_system(a: AlphaParam, profile: SigmaProfile,
                     diag: DiagonalLaw, cells: int = 6) -> _PerturbedSystem:
    w, k = alpha_kernel(profile, a.alpha, cells=cells)
    return _PerturbedSystem(a, w, k, diag)


def solve_wigner(a: AlphaParam, z: complex,
                 cfg: FixedPointConfig = FixedPointConfig()) -> FixedPointSolution:
    return _solve(wigner_system(a), complex(z), cfg)


def solve_band(a: AlphaParam, profile: SigmaProfile, z: complex,
               cfg: FixedPointConfig = FixedPointConfig()) -> FixedPointSolution:
    return _solve(band_system(a, profile), complex(z), cfg)


def solve_wishart_pair(a: AlphaParam, gamma: float, z: complex,
                       cfg: FixedPointConfig = FixedPointConfig()) -> FixedPointSolution:
    return _solve(wishart_system(a, gamma), complex(z), cfg)


def solve_perturbed(a: AlphaParam, profile: SigmaProfile, diag: DiagonalLaw,
                    z: complex,
                    cfg: FixedPointConfig = FixedPointConfig()) -> FixedPointSolution:
    return _solve(perturbed_system(a, profile, diag), complex(z), cfg)


# ---------------------------------------------------------------------------
# real-axis continuation


def continue_to_real_axis(system: _System, t: float,
                          eps_list: Sequence[float],
                          cfg: FixedPointConfig = FixedPointConfig(),
                          critical_points: Sequence[float] = ()) -> list:
    """Solutions at z = t + i eps for a decreasing eps schedule.

    Each solve warm-starts from the previous one; negative t uses the
    conjugation symmetry Y(-conj z) = conj Y(z) of the unique decaying
    branch.  Near a known critical point the schedule is refined and the
    iteration budget raised, since analyticity of the boundary value may
    fail there.
    """
    if t == 0:
        raise ValueError("t must be nonzero")
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must decrease strictly")
    if eps_list[-1] < 1e-6:
        raise ValueError("eps floor is 1e-6")
    if t < 0:
        path = continue_to_real_axis(system, -t, eps_list, cfg, critical_points)
        return [FixedPointSolution(
            z=-sol.z.conjugate(), unknowns=np.conj(sol.unknowns),
            residual=sol.residual, iterations=sol.iterations,
            u=principal_power(-sol.z.conjugate(), -system._alpha()),
            cone=sol.cone) for sol in path]

    near_critical = any(abs(abs(t) - c) < 1e-2 for c in critical_points)
    if near_critical:
        refined = [eps_list[0]]
        while refined[-1] > eps_list[-1]:
            refined.append(max(refined[-1] * 0.95, eps_list[-1]))
        eps_list = refined
        cfg = FixedPointConfig(tol=cfg.tol, max_iter=cfg.max_iter * 4,
                               damping=cfg.damping,
                               continuation_factor=cfg.continuation_factor)

    out = []
    warm = None
    for i, eps in enumerate(eps_list):
        z = t + 1j * eps
        try:
            sol = _solve(system, z, cfg, warm=warm)
        except SolverError as exc:
            exc.failure_index = i
            exc.partial_path = out
            raise
        out.append(sol)
        warm = sol.unknowns
    return out


def polish_on_axis(system, t: float, y: np.ndarray,
                   tol: float = 1e-13, max_iter: int = 40) -> np.ndarray:
    """Newton refinement of a continued solution at real z = t > 0.

    The boundary values extend continuously to the real axis; a few Newton
    steps on the defining equation turn the eps-extrapolated iterate into a
    machine-precision fixed point, making the algebraically equivalent
    density formulas agree at full accuracy.
    """
    if not hasattr(system, "jacobian"):
        raise ValueError("polish requires a system with a jacobian")
    z = complex(t)
    y = np.array(y, dtype=complex)
    for _ in range(max_iter):
        fy = system.apply(z, y)
        res = system.residual(z, y, fy)
        if res <= tol:
            return y
        jac = system.jacobian(z, y)
        y = y + np.linalg.solve(jac, fy - y)
    return y


# ---------------------------------------------------------------------------
# critical set


def find_critical_set(a: AlphaParam, box_radius: float = 6.0,
                      seeds_per_axis: int = 12,
                      tol: float = 1e-10) -> list:
    """Real points t > 0 where boundary analyticity may fail.

    Newton search for y in the cone with g(y) = y g'(y); each root whose
    t^alpha = C_alpha g'(y) is real and positive contributes t.
    """
    al = a.alpha
    half = al * math.pi / 2.0
    roots = []
    for i in range(seeds_per_axis):
        r = box_radius * (i + 1) / seeds_per_axis
        for j in range(seeds_per_axis):
            th = half * (2.0 * j / max(seeds_per_axis - 1, 1) - 1.0)
            y = r * cmath.exp(1j * th)
            y = _newton_degenerate(a, y)
            if y is None or not cone_contains(K_ALPHA, a, y, 1e-9):
                continue
            if abs(y) < 1e-8:
                continue
            roots.append(y)
    ts = []
    for y in roots:
        val = c_alpha(a) * g_alpha_prime(a, y)
        if val.real <= 0 or abs(val.imag) > 1e-8 * abs(val):
            continue
        t = val.real ** (1.0 / al)
        # self-check both defining equations
        eq1 = abs(g_alpha(a, y) - y * g_alpha_prime(a, y))
        eq2 = abs(principal_power(t, al) - val)
        if eq1 > 1e-8 or eq2 > 1e-8 * max(1.0, abs(val)):
            continue
        if all(abs(t - t0) > 1e-8 for t0 in ts):
            ts.append(t)
    return sorted(ts)


def _newton_degenerate(a: AlphaParam, y: complex, max_iter: int = 60):
    from .special import g_alpha_second

    for _ in range(max_iter):
        try:
            f = g_alpha(a, y) - y * g_alpha_prime(a, y)
            fp = -y * g_alpha_second(a, y)
        except (ValueError, ArithmeticError):
            return None
        if abs(fp) < 1e-300:
            return None
        step = f / fp
        y_new = y - step
        if not cone_contains(K_ALPHA, a, y_new, 0.15):
            return None
        if abs(step) < 1e-12 * max(1.0, abs(y_new)):
            return y_new
        y = y_new
    return None
