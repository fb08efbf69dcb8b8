"""Sigma-form ODE integration and the Painleve gap-probability routes.

Implicit second-degree equations are integrated through their once
differentiated third-order forms, written in log-time t = ln|s| with the
state y = (sigma, s sigma', s^2 sigma'') and an appended running integral
of sigma dt.  The state is divided by the leading series term C |s|^lam so
that the integrator sees O(1) numbers from the very first step.

For v = (a, a) and v = (mu, -mu) the integrated unknown is the deviation
w = sigma - (c0 + c1 s) from an exact affine solution (zero, and
-mu^2/2 + s/4 respectively), which removes a catastrophic cancellation on
the negative side.  The differentiated form admits a parasitic solution
family that breaks the original relation; for these regimes s^2 sigma'' is
re-projected onto the relation at fixed log-time intervals.
"""
from __future__ import annotations

import bisect
import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import series as _series
from .errors import (
    AccuracyError,
    BranchError,
    DomainError,
    IntegrationFailure,
    InterpolationError,
    RouteValidityError,
    StiffnessError,
)
from .kernels import GapResult, Method

__all__ = [
    "SigmaParams",
    "RegimeKind",
    "BoundaryRegime",
    "SigmaTrajectory",
    "bc_eval",
    "residual_sigma_form",
    "residual_ss_ode",
    "integrate_sigma_form",
    "integrate_sigma1",
    "gap_hard_edge",
    "hard_edge_logE",
    "gap_ss_product",
    "gap_ss_cross",
    "gap_ss_sigma1",
    "hamiltonian_from_sigma",
    "identity_hamiltonian_check",
    "tau_identity_check",
    "sigma1_consistency_check",
    "OverlapResult",
    "series_overlap_check",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-10
_SEG_DT = 0.25  # log-time length of one projection segment
_START_MAX_HE = 1e-2
_START_MAX_SS = 1e-3
_START_FLOOR = 1e-8
_START_REL = 1e-12


@dataclass(frozen=True)
class SigmaParams:
    """Parameters v = (v1, v2) of the sigma-form."""

    v1: float
    v2: float


class RegimeKind(enum.Enum):
    HARD_EDGE_PLUS = "hard-edge-plus"
    NEGATIVE_SIDE = "negative-side"
    SPECTRUM_SING = "spectrum-sing"


@dataclass(frozen=True)
class BoundaryRegime:
    """Boundary behaviour selecting a particular sigma solution."""

    kind: RegimeKind
    param: float

    def __post_init__(self):
        p = float(self.param)
        if not math.isfinite(p):
            raise DomainError("regime parameter must be finite")
        if self.kind is RegimeKind.HARD_EDGE_PLUS and not p > -1:
            raise DomainError(f"hard-edge regime needs a > -1, got {p}")
        if self.kind is RegimeKind.NEGATIVE_SIDE and not p < 1:
            raise RouteValidityError(f"negative-side regime needs mu < 1, got {p}")
        if self.kind is RegimeKind.SPECTRUM_SING and not p > -0.5:
            raise DomainError(f"sigma_1 regime needs a > -1/2, got {p}")
        object.__setattr__(self, "param", p)

    @classmethod
    def hard_edge_plus(cls, a):
        return cls(RegimeKind.HARD_EDGE_PLUS, a)

    @classmethod
    def negative_side(cls, mu):
        return cls(RegimeKind.NEGATIVE_SIDE, mu)

    @classmethod
    def spectrum_sing(cls, a):
        return cls(RegimeKind.SPECTRUM_SING, a)

    @property
    def params(self) -> SigmaParams:
        p = self.param
        if self.kind is RegimeKind.NEGATIVE_SIDE:
            return SigmaParams(p, -p)
        return SigmaParams(p, p)

    @property
    def sign(self) -> int:
        return -1 if self.kind is RegimeKind.NEGATIVE_SIDE else 1

    @property
    def base(self):
        """(c0, c1) of the affine exact solution subtracted before integrating."""
        if self.kind is RegimeKind.NEGATIVE_SIDE:
            return -0.5 * self.param**2, 0.25
        return 0.0, 0.0

    @property
    def a_eff(self) -> float:
        """Hard-edge parameter of the equivalent problem in x = |s|."""
        if self.kind is RegimeKind.NEGATIVE_SIDE:
            return -self.param
        return self.param

    def printed(self) -> _series.SeriesTerms:
        if self.kind is RegimeKind.HARD_EDGE_PLUS:
            return _series.printed_he(self.param)
        if self.kind is RegimeKind.NEGATIVE_SIDE:
            return _series.printed_negative(self.param)
        return _series.printed_ss(self.param)


# --- residuals ---------------------------------------------------------------


def residual_sigma_form(params: SigmaParams, s, sig, d1, d2):
    """Scaled left side of the P_III' sigma-form."""
    v1, v2 = params.v1, params.v2
    sd2 = s * d2
    lhs = sd2 * sd2 - v1 * v2 * d1 * d1 + d1 * (4 * d1 - 1) * (sig - s * d1) - (v1 - v2) ** 2 / 64.0
    return lhs / np.maximum(1.0, np.maximum(sd2 * sd2, d1 * d1))


def residual_ss_ode(a, r, sig, d1, d2):
    """Scaled left side of the sigma_1 equation with the nonnegative root."""
    w = a * a + sig - r * d1
    if np.any(np.asarray(w) < 0):
        raise BranchError("negative radicand a^2 + sigma - r sigma'")
    rd2 = r * d2
    lhs = rd2 * rd2 - 4 * w * (d1 * d1 - (a - np.sqrt(w)) ** 2)
    return lhs / np.maximum(1.0, np.maximum(rd2 * rd2, d1 * d1))


# --- boundary series -----------------------------------------------------------


def bc_eval(regime: BoundaryRegime, coord: float, rel_tol: float = 1e-6):
    """(sigma, sigma', sigma'') from the printed boundary series.

    ``coord`` is s (signed) for the P_III' regimes and r for sigma_1.  The
    size of the last retained terms, relative to the leading term, must not
    exceed ``rel_tol``.
    """
    coord = float(coord)
    x = regime.sign * coord
    if not x > 0:
        raise DomainError("coordinate on the wrong side of the origin")
    terms = regime.printed()
    est = terms.tail_estimate(x)
    if est > rel_tol:
        raise AccuracyError(f"series truncation {est:.3g} exceeds {rel_tol:.3g} at {coord}", est)
    return _to_sigma(regime, coord, *terms.value(x))


def _to_sigma(regime, coord, w0, w1, w2):
    c0, c1 = regime.base
    return c0 + c1 * coord + w0, c1 + w1 / coord, w2 / (coord * coord)


# --- right-hand sides and invariants -----------------------------------------


def _deviation_funcs(regime: BoundaryRegime):
    """dw2/dt, the invariant and its projection for the P_III' regimes."""
    p = regime.params
    vv = p.v1 * p.v2
    c0, c1 = regime.base
    sgn = regime.sign

    def rhs(x, w0, w1, w2):
        s = sgn * x
        A8 = 8 * c1 * s - s
        D = w0 - w1
        return w2 + vv * w1 - 0.5 * A8 * D - 4 * c0 * w1 - 4 * w1 * D + 0.5 * w1 * A8 + 2 * w1 * w1

    def invariant_terms(x, w0, w1):
        s = sgn * x
        A = c1 * s
        B = 4 * A - s
        D = w0 - w1
        return (
            -vv * (2 * A * w1 + w1 * w1),
            A * B * D,
            (4 * A + B) * w1 * (c0 + D),
            4 * w1 * w1 * (c0 + D),
        )

    def project(x, w):
        terms = invariant_terms(x, w[0], w[1])
        disc = -math.fsum(terms)
        # skip when cancellation leaves too few correct digits in disc
        if disc <= 1e-4 * sum(abs(t) for t in terms):
            return w[2]
        r = math.sqrt(disc)
        return r if abs(r - w[2]) <= abs(r + w[2]) else -r

    return rhs, project


def _ss_funcs(a: float):
    def rhs(r, y0, y1, y2):
        d = y0 - y1
        w = a * a + d
        if w < 0:
            raise BranchError(f"negative radicand {w:.3g} at r = {r:.6g}")
        sw = math.sqrt(w)
        frac = 0.0 if a == 0 else 6 * a / (a + sw)
        return y2 - 2 * y1 * y1 + 4 * w * y1 + r * r * d * (4 - frac)

    def project(r, y):
        d = y[0] - y[1]
        w = a * a + d
        if w < 0:
            raise BranchError(f"negative radicand {w:.3g} at r = {r:.6g}")
        sw = math.sqrt(w)
        amw = 0.0 if a + sw == 0 else -d / (a + sw)
        disc = 4 * w * (y[1] * y[1] - r * r * amw * amw)
        if disc <= 0:
            return y[2]
        q = math.sqrt(disc)
        return q if abs(q - y[2]) <= abs(q + y[2]) else -q

    return rhs, project


# --- trajectory ----------------------------------------------------------------


@dataclass
class _Segment:
    t0: float
    t1: float
    sol: object


@dataclass
class SigmaTrajectory:
    """Dense solution of a sigma equation on (0, |end|].

    ``grid`` holds the accepted integrator steps (signed coordinate,
    increasing); ``values`` the matching (sigma, sigma', sigma'').  Below
    ``start`` the boundary series itself is used.
    """

    params: SigmaParams
    regime: BoundaryRegime
    grid: np.ndarray
    values: np.ndarray
    residuals: np.ndarray
    start: float
    end: float
    tol: float
    interpolant_order: int = 7
    _terms: _series.SeriesTerms = field(default=None, repr=False)
    _segments: list = field(default_factory=list, repr=False)
    _C: float = field(default=1.0, repr=False)
    _lam: float = field(default=1.0, repr=False)

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals))) if self.residuals.size else 0.0

    def _raw(self, x):
        """(w0, w1, w2, Q) at x = |coord|."""
        x0 = abs(self.start)
        if x <= 0 or x > abs(self.end) * (1 + 1e-12):
            raise InterpolationError(f"coordinate {x} outside (0, {abs(self.end)}]")
        if x <= x0:
            w = self._terms.value(x)
            return (*w, self._terms.log_integral(x))
        t = min(math.log(x), self._segments[-1].t1)
        starts = [sg.t0 for sg in self._segments]
        i = max(0, bisect.bisect_right(starts, t) - 1)
        z = self._segments[i].sol(t)
        sc = self._C * x**self._lam
        return z[0] * sc, z[1] * sc, z[2] * sc, z[3] * self._C

    def eval(self, coord: float):
        """(sigma, sigma', sigma'') at a signed coordinate."""
        coord = float(coord)
        x = self.regime.sign * coord
        if not x > 0:
            raise InterpolationError("coordinate on the wrong side of the origin")
        # accepted nodes return their stored values; a projection may sit there
        k = int(np.searchsorted(self.grid, coord))
        if k < len(self.grid) and self.grid[k] == coord:
            return tuple(float(v) for v in self.values[k])
        w0, w1, w2, _ = self._raw(x)
        return _to_sigma(self.regime, coord, w0, w1, w2)

    def log_integral(self, coord: float) -> float:
        """Integral over (0, |coord|] of the deviation w against dx/x."""
        x = abs(float(coord))
        if x == 0:
            return 0.0
        return float(self._raw(x)[3])


def _choose_start(terms, cap, requested=None, start_cap=None):
    if start_cap is not None:
        if not start_cap > 0:
            raise DomainError("start cap must be positive")
        cap = min(cap, float(start_cap))
    if requested is not None:
        x0 = abs(float(requested))
        if not _START_FLOOR <= x0:
            raise DomainError(f"start below the floor {_START_FLOOR}")
        est = terms.tail_estimate(x0)
        if est > 1e-6:
            raise AccuracyError(f"series truncation {est:.3g} too large at start {x0}", est)
        return x0
    for j in range(0, 64):
        x0 = cap * 10 ** (-j / 4)
        if x0 < _START_FLOOR:
            break
        if terms.tail_estimate(x0) <= _START_REL:
            return x0
    return _START_FLOOR


def _integrate(regime, terms, x0, x_end, tol, rhs2, project, check):
    C, lam = terms.C, terms.lam
    w = np.array(terms.value(x0))
    Q0 = terms.log_integral(x0)
    z = np.concatenate([w / (C * x0**lam), [Q0 / C]])

    def f(t, zz):
        x = math.exp(t)
        sc = C * x**lam
        y0, y1, y2 = zz[0] * sc, zz[1] * sc, zz[2] * sc
        d2 = rhs2(x, y0, y1, y2)
        return [
            zz[1] - lam * zz[0],
            zz[1] + zz[2] - lam * zz[1],
            d2 / sc - lam * zz[2],
            zz[0] * x**lam,
        ]

    t0, t1 = math.log(x0), math.log(x_end)
    nseg = max(1, math.ceil((t1 - t0) / _SEG_DT))
    edges = np.linspace(t0, t1, nseg + 1)
    segments = []
    ts, zs = [], []
    atol = max(tol * 1e-3, 1e-16)
    for i in range(nseg):
        if project is not None and i > 0:
            x = math.exp(edges[i])
            sc = C * x**lam
            z = z.copy()
            z[2] = project(x, z[:3] * sc) / sc
        sol = solve_ivp(f, (edges[i], edges[i + 1]), z, method="DOP853", rtol=tol, atol=atol, dense_output=True)
        if sol.status != 0:
            if "step size" in sol.message:
                raise StiffnessError(f"step size underflow near t = {sol.t[-1]:.6g}: {sol.message}")
            raise IntegrationFailure(sol.message)
        segments.append(_Segment(edges[i], edges[i + 1], sol.sol))
        ts.append(sol.t if i == 0 else sol.t[1:])
        zs.append(sol.y if i == 0 else sol.y[:, 1:])
        z = sol.y[:, -1]
    t = np.concatenate(ts)
    Z = np.concatenate(zs, axis=1)
    x = np.exp(t)
    sc = C * x**lam
    coord = regime.sign * x
    c0, c1 = regime.base
    vals = np.stack([c0 + c1 * coord + Z[0] * sc, c1 + Z[1] * sc / coord, Z[2] * sc / coord**2], axis=1)
    res = check(coord, vals)
    bad = np.abs(res) > 100 * tol
    if np.any(bad):
        k = int(np.argmax(bad))
        raise IntegrationFailure(f"invariant drift {abs(res[k]):.3g} at {coord[k]:.6g} exceeds {100 * tol:.3g}")
    order = np.argsort(coord)
    traj = SigmaTrajectory(
        params=regime.params,
        regime=regime,
        grid=coord[order],
        values=vals[order],
        residuals=res[order],
        start=regime.sign * x0,
        end=regime.sign * x_end,
        tol=tol,
    )
    traj._terms = terms
    traj._segments = segments
    traj._C = C
    traj._lam = lam
    return traj


def _check_tol(tol):
    tol = float(tol)
    if not (0 < tol < 1e-3):
        raise DomainError("tolerance must lie in (0, 1e-3)")
    return tol


def integrate_sigma_form(
    params: SigmaParams,
    regime: BoundaryRegime,
    start: float | None,
    end: float,
    tol: float = DEFAULT_TOL,
    project: bool = True,
    start_cap: float | None = None,
) -> SigmaTrajectory:
    """Integrate the P_III' sigma-form from the boundary series out to ``end``.

    ``start=None`` selects the start adaptively, at most ``start_cap``.
    The initial data come from the extended formal series.
    """
    if regime.kind is RegimeKind.SPECTRUM_SING:
        raise DomainError("use integrate_sigma1 for the sigma_1 regime")
    if (float(params.v1), float(params.v2)) != (regime.params.v1, regime.params.v2):
        raise DomainError(f"parameters {params} do not match regime {regime}")
    tol = _check_tol(tol)
    end = float(end)
    if regime.sign * end <= 0:
        raise DomainError("end lies on the wrong side of the origin")
    if start is not None and regime.sign * float(start) <= 0:
        raise DomainError("start and end must share a sign")
    a_eff = regime.a_eff
    terms = _series.formal_terms(a_eff, *_series.default_orders(a_eff))
    x0 = _choose_start(terms, _START_MAX_HE, start, start_cap)
    x_end = abs(end)
    if not x_end > x0:
        raise DomainError("end must lie beyond the start abscissa")
    rhs2, proj = _deviation_funcs(regime)
    p = regime.params

    def check(coord, vals):
        return residual_sigma_form(p, coord, vals[:, 0], vals[:, 1], vals[:, 2])

    return _integrate(regime, terms, x0, x_end, tol, rhs2, proj if project else None, check)


def integrate_sigma1(
    a: float,
    r_start: float | None,
    r_end: float,
    tol: float = DEFAULT_TOL,
    project: bool = False,
    start_cap: float | None = None,
) -> SigmaTrajectory:
    """Integrate the sigma_1 equation from its printed series out to ``r_end``."""
    regime = BoundaryRegime.spectrum_sing(a)
    tol = _check_tol(tol)
    terms = regime.printed()
    x0 = _choose_start(terms, _START_MAX_SS, r_start, start_cap)
    r_end = float(r_end)
    if not r_end > x0:
        raise DomainError("r_end must exceed r_start")
    rhs2, proj = _ss_funcs(regime.param)

    def check(r, vals):
        return residual_ss_ode(regime.param, r, vals[:, 0], vals[:, 1], vals[:, 2])

    return _integrate(regime, terms, x0, r_end, tol, rhs2, proj if project else None, check)


# --- cached trajectories for the gap routes -----------------------------------


def _bucket(x):
    """Round an integration end up to a power of two so nearby x share work."""
    return 2.0 ** max(-2, math.ceil(math.log2(x)))


@functools.lru_cache(maxsize=256)
def _traj(kind: RegimeKind, param: float, end_bucket: float, tol: float, cap) -> SigmaTrajectory:
    regime = BoundaryRegime(kind, param)
    if kind is RegimeKind.SPECTRUM_SING:
        return integrate_sigma1(param, None, end_bucket, tol, start_cap=cap)
    return integrate_sigma_form(regime.params, regime, None, regime.sign * end_bucket, tol, start_cap=cap)


def _trajectory_for(kind, param, x, tol, cap=None):
    return _traj(kind, float(param), _bucket(x), float(tol), None if cap is None else float(cap))


def _refined(tol):
    return max(tol * 1e-2, 1e-13)


def _logE(kind, param, x, tol, sign, cap=None):
    """sign * integral of w dx/x over (0, x] with a two-tolerance error estimate."""
    if x == 0:
        return 0.0, 0.0
    q1 = _trajectory_for(kind, param, x, tol, cap).log_integral(x)
    q2 = _trajectory_for(kind, param, x, _refined(tol), cap).log_integral(x)
    return sign * q1, abs(q1 - q2)


def _check_x(x):
    x = float(x)
    if not (x >= 0 and math.isfinite(x)):
        raise DomainError("x must be finite and nonnegative")
    return x


def hard_edge_logE(a: float, X: float, tol: float = DEFAULT_TOL, start_cap: float | None = None):
    """(log E^HE(0; (0, X); a), error estimate) from the sigma-form route."""
    X = _check_x(X)
    BoundaryRegime.hard_edge_plus(a)
    return _logE(RegimeKind.HARD_EDGE_PLUS, a, X, tol, -1.0, start_cap)


def gap_hard_edge(a: float, X: float, tol: float = DEFAULT_TOL, start_cap: float | None = None):
    """(E, logE) of the hard-edge gap probability on (0, X)."""
    logE, _ = hard_edge_logE(a, X, tol, start_cap)
    return math.exp(logE), logE


def gap_ss_product(a: float, x: float, tol: float = DEFAULT_TOL, start_cap: float | None = None) -> GapResult:
    """E^SS on (-x, x) as a product of two hard-edge probabilities at (pi x)^2."""
    if not a > -0.5:
        raise DomainError("a must exceed -1/2")
    x = _check_x(x)
    X = (math.pi * x) ** 2
    l1, e1 = hard_edge_logE(a - 0.5, X, tol, start_cap)
    l2, e2 = hard_edge_logE(a + 0.5, X, tol, start_cap)
    return GapResult.from_log(a, x, Method.HARD_EDGE_PRODUCT, l1 + l2, e1 + e2)


def cross_mus(a: float, eps: int = 1):
    """The two negative-side parameters for sign ``eps``."""
    if eps not in (1, -1):
        raise DomainError("eps must be +1 or -1")
    return (-eps * a - 0.5, -eps * a + 0.5)


def gap_ss_cross(
    a: float, x: float, eps: int = 1, tol: float = DEFAULT_TOL, start_cap: float | None = None
) -> GapResult:
    """E^SS from two negative-side tau-functions at -(pi x)^2 / 4."""
    if not a > -0.5:
        raise DomainError("a must exceed -1/2")
    x = _check_x(x)
    mus = cross_mus(a, eps)
    for mu in mus:
        BoundaryRegime.negative_side(mu)
    S = (math.pi * x) ** 2
    logE, err = 0.0, 0.0
    for mu in mus:
        # log tau(-S/4) = integral of H du = -integral of w dx/x over (0, S]
        l, e = _logE(RegimeKind.NEGATIVE_SIDE, mu, S, tol, -1.0, start_cap)
        logE += l
        err += e
    return GapResult.from_log(a, x, Method.CROSS_PRODUCT, logE, err)


def gap_ss_sigma1(a: float, x: float, tol: float = DEFAULT_TOL, start_cap: float | None = None) -> GapResult:
    """E^SS from the integral of sigma_1(y)/y over (0, 2 pi x]."""
    BoundaryRegime.spectrum_sing(a)
    x = _check_x(x)
    logE, err = _logE(RegimeKind.SPECTRUM_SING, a, 2 * math.pi * x, tol, 1.0, start_cap)
    return GapResult.from_log(a, x, Method.SIGMA1, logE, err)


# --- Hamiltonians and identities ------------------------------------------------


def hamiltonian_from_sigma(params: SigmaParams, u: float, trajectory: SigmaTrajectory) -> float:
    """u H(u) = -sigma(4u) - v1 (v1 - v2) / 4 + u."""
    sig = trajectory.eval(4.0 * u)[0]
    return -sig - 0.25 * params.v1 * (params.v1 - params.v2) + u


def _he_traj(a, end, tol):
    return _trajectory_for(RegimeKind.HARD_EDGE_PLUS, a, end, tol)


def _neg_traj(mu, end, tol):
    BoundaryRegime.negative_side(mu)
    return _trajectory_for(RegimeKind.NEGATIVE_SIDE, mu, end, tol)


def identity_hamiltonian_check(a: float, s_grid, eps: int = 1, tol: float = DEFAULT_TOL) -> float:
    """max |LHS - RHS| of the additive Hamiltonian identity over ``s_grid``.

    LHS = -2s + sH(s)|(a-1/2, a-1/2) + sH(s)|(a+1/2, a+1/2) from hard-edge
    trajectories; RHS = sum over mu of sH(-s)|(mu, -mu) from negative-side
    trajectories.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any(s_grid <= 0):
        raise DomainError("s_grid must be positive")
    end = 4 * float(s_grid.max())
    worst = 0.0
    left = [(SigmaParams(b, b), _he_traj(b, end, tol)) for b in (a - 0.5, a + 0.5)]
    right = [(SigmaParams(mu, -mu), _neg_traj(mu, end, tol)) for mu in cross_mus(a, eps)]
    for s in s_grid:
        lhs = -2 * s + sum(hamiltonian_from_sigma(p, s, tr) for p, tr in left)
        rhs = sum(hamiltonian_from_sigma(p, -s, tr) for p, tr in right)
        worst = max(worst, abs(lhs - rhs))
    return worst


def tau_identity_check(a: float, X_grid, eps: int = 1, tol: float = DEFAULT_TOL) -> float:
    """max |log LHS - log RHS| of the product identity for tau-functions.

    log tau(X) on the diagonal is log E^HE(4X) + X; log tau(-X) on the
    cross-diagonal is minus the integral of w dx/x over (0, 4X].
    """
    X_grid = np.asarray(X_grid, dtype=float)
    if np.any(X_grid <= 0):
        raise DomainError("X_grid must be positive")
    worst = 0.0
    for X in X_grid:
        lhs = -2 * X
        for b in (a - 0.5, a + 0.5):
            lhs += -_he_traj(b, 4 * X, tol).log_integral(4 * X) + X
        rhs = sum(-_neg_traj(mu, 4 * X, tol).log_integral(-4 * X) for mu in cross_mus(a, eps))
        worst = max(worst, abs(lhs - rhs))
    return worst


def sigma1_consistency_check(a: float, x_grid, tol: float = DEFAULT_TOL) -> float:
    """max over x of |sigma_1(2 pi x) + 2 [sigma_(a-1/2) + sigma_(a+1/2)](pi^2 x^2)|.

    Scaled by max(1, |sigma_1|).
    """
    x_grid = np.asarray(x_grid, dtype=float)
    if np.any(x_grid <= 0):
        raise DomainError("x_grid must be positive")
    xm = float(x_grid.max())
    s1 = _trajectory_for(RegimeKind.SPECTRUM_SING, a, 2 * math.pi * xm, tol)
    he = [_he_traj(b, (math.pi * xm) ** 2, tol) for b in (a - 0.5, a + 0.5)]
    worst = 0.0
    for x in x_grid:
        lhs = s1.eval(2 * math.pi * x)[0]
        rhs = -2 * sum(tr.eval((math.pi * x) ** 2)[0] for tr in he)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return worst


# --- series / trajectory overlap --------------------------------------------------


@dataclass(frozen=True)
class OverlapResult:
    """Log-log slopes of the printed-series error over one decade.

    ``measured`` fits |trajectory - printed series|; ``predicted`` fits
    |extended series - printed series|; ``leading`` is the smallest
    omitted exponent of the printed series.
    """

    regime: BoundaryRegime
    x_lo: float
    x_hi: float
    measured: float
    predicted: float
    leading: float

    @property
    def slope_error(self) -> float:
        return abs(self.measured - self.predicted)


def _extended_deviation(regime: BoundaryRegime, x: float):
    """(w, tail estimate) from the extended series at x = |coord|."""
    if regime.kind is RegimeKind.SPECTRUM_SING:
        # sigma_1(r) = -2 [w_(a-1/2) + w_(a+1/2)](r^2 / 4)
        tot, tail = 0.0, 0.0
        for b in (regime.param - 0.5, regime.param + 0.5):
            t = _series.formal_terms(b, *_series.default_orders(b))
            tot += t.value(x * x / 4)[0]
            tail = max(tail, t.tail_estimate(x * x / 4))
        return -2.0 * tot, tail
    t = _series.formal_terms(regime.a_eff, *_series.default_orders(regime.a_eff))
    return t.value(x)[0], t.tail_estimate(x)


def _leading_omitted(regime: BoundaryRegime) -> float:
    kind = "ss" if regime.kind is RegimeKind.SPECTRUM_SING else "he"
    pr = regime.printed()
    return min(e for _, e in _series.omitted_exponents(kind, pr.lam))


def series_overlap_check(regime: BoundaryRegime, tol: float = 1e-12, n_points: int = 9) -> OverlapResult:
    """Compare the printed boundary series with the integrated trajectory.

    The decade [x_hi/10, x_hi] is placed as far out as the printed series
    stays within 1e-3 relative error and the extended series is converged.
    """
    printed = regime.printed()
    c0, c1 = regime.base

    def pred_err(x):
        w_ext, tail = _extended_deviation(regime, x)
        return abs(w_ext - printed.value(x)[0]), tail, abs(w_ext)

    x_hi = None
    for x in np.geomspace(4.0, 1e-5, 105):
        err, tail, size = pred_err(x)
        if tail <= 1e-12 and err <= 1e-3 * size:
            x_hi = float(x)
            break
    if x_hi is None:
        raise AccuracyError("no matching region found for the overlap check", float("nan"))
    if regime.kind is RegimeKind.SPECTRUM_SING:
        traj = integrate_sigma1(regime.param, None, x_hi * 1.01, tol)
    else:
        start = None if x_hi / 10 > _START_MAX_HE else regime.sign * x_hi / 20
        traj = integrate_sigma_form(regime.params, regime, start, regime.sign * x_hi * 1.01, tol)
    xs = np.geomspace(x_hi / 10, x_hi, n_points)
    meas, pred = [], []
    for x in xs:
        coord = regime.sign * x
        w_pr = printed.value(x)[0]
        meas.append(abs(traj.eval(coord)[0] - c0 - c1 * coord - w_pr))
        pred.append(pred_err(x)[0])
    lx = np.log(xs)
    with np.errstate(divide="ignore"):
        m = float(np.polyfit(lx, np.log(meas), 1)[0])
        p = float(np.polyfit(lx, np.log(pred), 1)[0])
    return OverlapResult(regime, float(xs[0]), x_hi, m, p, _leading_omitted(regime))
