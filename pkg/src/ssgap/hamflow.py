"""P_III and P_III' Hamiltonian flows and checks of their derived identities."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DegenerateRecoveryError, DomainError, IntegrationFailure, PoleDetected, SingularTimeError

__all__ = [
    "System",
    "PIIIParams",
    "HamState",
    "FlowTrajectory",
    "time_hamiltonian",
    "time_partial",
    "vector_field",
    "integrate_flow",
    "aux_h",
    "theorem1_residual",
    "proof_identity_residual",
    "recover_qp",
    "lemma_sum_check",
    "scalar_piii_coefficients",
    "scalar_piii_residual",
    "integrate_flow_span",
    "sample_piii_trajectories",
    "POLE_BOUND",
]

POLE_BOUND = 1e8


class System(enum.Enum):
    PIII = "PIII"
    PIII_PRIME = "PIIIprime"


@dataclass(frozen=True)
class PIIIParams:
    v1: float
    v2: float
    eta0: float = 1.0
    eta_inf: float = 1.0

    def __post_init__(self):
        if self.eta0 * self.eta_inf == 0:
            raise DomainError("eta0 * eta_inf must be nonzero")


@dataclass(frozen=True)
class HamState:
    """Point (time, q, p) of a flow; time is t for P_III and s for P_III'."""

    system: System
    time: float
    q: float
    p: float
    params: PIIIParams

    def __post_init__(self):
        if self.time == 0:
            raise SingularTimeError("time must be nonzero")


# --- Hamiltonians and partials ---------------------------------------------


def _th_piii(P, t, q, p):
    return (
        2 * q * q * p * p
        - (2 * P.eta_inf * t * q * q + (2 * P.v1 + 1) * q - 2 * P.eta0 * t) * p
        + P.eta_inf * (P.v1 + P.v2) * t * q
    )


def _sh_prime(P, s, q, p):
    return q * q * p * p - (q * q + P.v1 * q - s) * p + 0.5 * (P.v1 + P.v2) * q


def _partials(system, P, t, q, p):
    """(d/dp, d/dq, d/dtime) of time*H at fixed canonical variables."""
    if system is System.PIII:
        dp = 4 * q * q * p - 2 * P.eta_inf * t * q * q - (2 * P.v1 + 1) * q + 2 * P.eta0 * t
        dq = 4 * q * p * p - 4 * P.eta_inf * t * q * p - (2 * P.v1 + 1) * p + P.eta_inf * (P.v1 + P.v2) * t
        dt = -2 * P.eta_inf * q * q * p + 2 * P.eta0 * p + P.eta_inf * (P.v1 + P.v2) * q
    else:
        dp = 2 * q * q * p - q * q - P.v1 * q + t
        dq = 2 * q * p * p - 2 * q * p - P.v1 * p + 0.5 * (P.v1 + P.v2)
        dt = p
    return dp, dq, dt


def time_hamiltonian(state: HamState) -> float:
    """tH_III(t) or sH_III'(s) at the state."""
    f = _th_piii if state.system is System.PIII else _sh_prime
    return f(state.params, state.time, state.q, state.p)


def time_partial(state: HamState) -> float:
    """Explicit time derivative of time*H at fixed (q, p)."""
    return _partials(state.system, state.params, state.time, state.q, state.p)[2]


def vector_field(state: HamState):
    """(dq/dtime, dp/dtime) from the hand-derived partials of time*H."""
    t = state.time
    if t == 0:
        raise SingularTimeError("vector field is singular at time zero")
    dp, dq, _ = _partials(state.system, state.params, t, state.q, state.p)
    return dp / t, -dq / t


# --- flows -------------------------------------------------------------------


@dataclass
class FlowTrajectory:
    """Dense Hamiltonian flow with Hamiltonian values at the accepted steps."""

    system: System
    params: PIIIParams
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray
    ham: np.ndarray
    h: np.ndarray | None
    tol: float
    _sol: object = field(default=None, repr=False)

    @property
    def span(self):
        return float(self.times[0]), float(self.times[-1])

    def state_at(self, time: float) -> HamState:
        lo, hi = sorted(self.span)
        if not lo - 1e-12 <= time <= hi + 1e-12:
            raise DomainError(f"time {time} outside trajectory span")
        q, p = self._sol(time)
        return HamState(self.system, float(time), float(q), float(p), self.params)

    def states(self):
        return [HamState(self.system, float(t), float(q), float(p), self.params) for t, q, p in zip(self.times, self.q, self.p)]


def integrate_flow(initial: HamState, time_end: float, tol: float = 1e-10) -> FlowTrajectory:
    """Adaptive DOP853 integration with dense output.

    Stops with ``PoleDetected`` once |q| or |p| exceeds ``POLE_BOUND``.
    """
    t0 = float(initial.time)
    time_end = float(time_end)
    if time_end == 0 or (time_end > 0) != (t0 > 0):
        raise DomainError("time_end must share the sign of the initial time")
    system, P = initial.system, initial.params

    def f(t, y):
        dp, dq, _ = _partials(system, P, t, y[0], y[1])
        return [dp / t, -dq / t]

    def big_q(t, y):
        return POLE_BOUND - abs(y[0])

    def big_p(t, y):
        return POLE_BOUND - abs(y[1])

    big_q.terminal = big_p.terminal = True
    sol = solve_ivp(
        f,
        (t0, time_end),
        [initial.q, initial.p],
        method="DOP853",
        rtol=tol,
        atol=tol * 1e-2,
        dense_output=True,
        events=(big_q, big_p),
    )
    if sol.status == -1:
        raise IntegrationFailure(sol.message)
    traj = _make_traj(system, P, sol.t, sol.y, tol, sol.sol)
    if sol.status == 1:
        hits = [e for e in sol.t_events if len(e)]
        where = float(hits[0][0]) if hits else float(sol.t[-1])
        raise PoleDetected(f"pole near time {where:.8g}", location=where, partial=traj)
    return traj


def _make_traj(system, P, t, y, tol, dense):
    q, p = y
    ham = _th_piii(P, t, q, p) if system is System.PIII else _sh_prime(P, t, q, p)
    h = ham + (2 * P.v1 + 1) ** 2 / 8.0 if system is System.PIII else None
    return FlowTrajectory(system, P, np.asarray(t), np.asarray(q), np.asarray(p), ham, h, tol, dense)


# --- auxiliary Hamiltonian and the second-order equation -------------------------


def _aux(P, t, q, p):
    h = _th_piii(P, t, q, p) + (2 * P.v1 + 1) ** 2 / 8.0
    dp, dq, h1 = _partials(System.PIII, P, t, q, p)
    qd, pd = dp / t, -dq / t
    h2 = (-4 * P.eta_inf * q * p + P.eta_inf * (P.v1 + P.v2)) * qd + (-2 * P.eta_inf * q * q + 2 * P.eta0) * pd
    return h, h1, h2


def aux_h(state: HamState):
    """(h, h', h'') for h = tH_III + (2 v1 + 1)^2 / 8 along the flow."""
    if state.system is not System.PIII:
        raise DomainError("aux_h applies to P_III states")
    return tuple(float(v) for v in _aux(state.params, state.time, state.q, state.p))


def _theorem1_terms(P, t, h, h1, h2, eps):
    R = 2 * (h - t * h1)
    k = 16 * P.eta0 * P.eta_inf
    root = np.sqrt(np.maximum(R, 0.0))
    parts = (
        4 * h1 * h1,
        k * R,
        -k * eps * (P.v2 - P.v1 - 1) * root,
        -k * (P.v2 - 0.5) * (P.v1 + 0.5),
    )
    lhs = (t * h2) ** 2
    rhs = R * sum(parts)
    scale = np.maximum.reduce([np.ones_like(lhs), lhs] + [np.abs(R * x) for x in parts])
    return (lhs - rhs) / scale, R


def theorem1_residual(traj: FlowTrajectory):
    """Per-node scaled residual of the second-order h equation, minimized over eps.

    Returns (residual, eps); nodes with 2(h - t h') < 0 get NaN and eps 0.
    """
    if traj.system is not System.PIII:
        raise DomainError("theorem1_residual needs a P_III trajectory")
    P, t = traj.params, traj.times
    h, h1, h2 = _aux(P, t, traj.q, traj.p)
    rp, R = _theorem1_terms(P, t, h, h1, h2, 1)
    rm, _ = _theorem1_terms(P, t, h, h1, h2, -1)
    res = np.where(np.abs(rp) <= np.abs(rm), np.abs(rp), np.abs(rm))
    eps = np.where(np.abs(rp) <= np.abs(rm), 1, -1)
    bad = R < 0
    res = np.where(bad, np.nan, res)
    eps = np.where(bad, 0, eps)
    return res, eps


def proof_identity_residual(traj: FlowTrajectory) -> float:
    """max |8(h - t h') - (4 q p - 2 v1 - 1)^2| scaled by max(1, |8(h - t h')|)."""
    P, t = traj.params, traj.times
    h, h1, _ = _aux(P, t, traj.q, traj.p)
    lhs = 8 * (h - t * h1)
    rhs = (4 * traj.q * traj.p - 2 * P.v1 - 1) ** 2
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))))


def recover_qp(h: float, h1: float, h2: float, t: float, params: PIIIParams, eps: int):
    """Canonical variables (q, p) from (h, h', h'') for sign ``eps``."""
    if eps not in (1, -1):
        raise DomainError("eps must be +1 or -1")
    R = h - t * h1
    if not R > 0:
        raise DegenerateRecoveryError("h - t h' must be positive")
    ratio = t * h2 / math.sqrt(8 * R)
    den = params.v2 - 0.5 - eps * math.sqrt(2 * R)
    if abs(den) < 1e-12 * max(1.0, abs(params.v2) + math.sqrt(2 * R)):
        raise DegenerateRecoveryError("vanishing denominator in the q formula")
    p = (h1 - eps * ratio) / (4 * params.eta0)
    q = (h1 + eps * ratio) / den / (2 * params.eta_inf)
    return q, p


def lemma_sum_check(traj: FlowTrajectory) -> float:
    """max scaled |tH_III - (sH'|v + (sH' - Q P))| with s = t^2, Q = t q, P = p / t."""
    if traj.system is not System.PIII:
        raise DomainError("lemma_sum_check needs a P_III trajectory")
    P = traj.params
    if P.eta0 != 1 or P.eta_inf != 1:
        raise DomainError("the P_III' Hamiltonian carries no eta; set eta0 = eta_inf = 1")
    t = traj.times
    s, Q, Pm = t * t, t * traj.q, traj.p / t
    sh = _sh_prime(P, s, Q, Pm)
    total = sh + (sh - Q * Pm)
    return float(np.max(np.abs(traj.ham - total) / np.maximum(1.0, np.abs(traj.ham))))


def scalar_piii_coefficients(params: PIIIParams):
    """(alpha, beta, gamma, delta) of the scalar P_III equation."""
    P = params
    return -4 * P.eta_inf * P.v2, 4 * P.eta0 * (P.v1 + 1), 4 * P.eta_inf**2, -4 * P.eta0**2


def scalar_piii_residual(traj: FlowTrajectory, q_floor: float = 1e-3):
    """(max scaled residual, number of skipped nodes) of the scalar P_III equation.

    q'' comes from the chain rule through the vector field along the flow.
    Nodes with |q| < ``q_floor`` are skipped.
    """
    if traj.system is not System.PIII:
        raise DomainError("scalar_piii_residual needs a P_III trajectory")
    P = traj.params
    al, be, ga, de = scalar_piii_coefficients(P)
    t, q, p = traj.times, traj.q, traj.p
    keep = np.abs(q) >= q_floor
    t, q, p = t[keep], q[keep], p[keep]
    G = 4 * q * q * p - 2 * P.eta_inf * t * q * q - (2 * P.v1 + 1) * q + 2 * P.eta0 * t
    dq = G / t
    _, Hq, _ = _partials(System.PIII, P, t, q, p)
    dp = -Hq / t
    Gt = -2 * P.eta_inf * q * q + 2 * P.eta0
    Gq = 8 * q * p - 4 * P.eta_inf * t * q - (2 * P.v1 + 1)
    Gp = 4 * q * q
    d2q = -G / t**2 + (Gt + Gq * dq + Gp * dp) / t
    terms = (dq * dq / q, -dq / t, (al * q * q + be) / t, ga * q**3, de / q)
    res = d2q - sum(terms)
    scale = np.maximum.reduce([np.ones_like(d2q), np.abs(d2q)] + [np.abs(x) for x in terms])
    worst = float(np.max(np.abs(res) / scale)) if res.size else 0.0
    return worst, int(np.count_nonzero(~keep))


def integrate_flow_span(initial: HamState, time_lo: float, time_hi: float, tol: float = 1e-10) -> FlowTrajectory:
    """Integrate outward from an interior initial time to both ends of a span."""
    t0 = initial.time
    if not time_lo <= t0 <= time_hi:
        raise DomainError("initial time must lie inside the span")
    parts = [integrate_flow(initial, end, tol) for end in (time_lo, time_hi) if end != t0]
    if len(parts) == 1:
        return parts[0]
    back, fwd = parts
    t = np.concatenate([back.times[::-1], fwd.times[1:]])
    y = np.stack([np.concatenate([back.q[::-1], fwd.q[1:]]), np.concatenate([back.p[::-1], fwd.p[1:]])])
    sb, sf = back._sol, fwd._sol

    def dense(time):
        return sb(time) if time <= t0 else sf(time)

    return _make_traj(initial.system, initial.params, t, y, tol, dense)


def sample_piii_trajectories(
    seed: int,
    n: int,
    t_span=(1.0, 3.0),
    v_box=2.0,
    q_box=1.0,
    p_box=0.5,
    tol=1e-11,
    system=System.PIII,
):
    """Random regular trajectories on ``t_span``.

    v uniform on [-v_box, v_box]^2; at the midpoint of the span q and p are
    uniform on [-q_box, q_box] and [-p_box, p_box]; eta0 = eta_inf = 1.
    The flow is integrated outward to both ends.  Draws that hit a pole are
    redrawn.  Returns (trajectories, redraw count).
    """
    rng = np.random.default_rng(seed)
    lo, hi = float(t_span[0]), float(t_span[1])
    mid = 0.5 * (lo + hi)
    out, redraws = [], 0
    while len(out) < n:
        v1, v2 = rng.uniform(-v_box, v_box, 2)
        q0 = rng.uniform(-q_box, q_box)
        p0 = rng.uniform(-p_box, p_box)
        st = HamState(system, mid, float(q0), float(p0), PIIIParams(float(v1), float(v2)))
        try:
            out.append(integrate_flow_span(st, lo, hi, tol))
        except PoleDetected:
            redraws += 1
            if redraws > 100 * n + 100:
                raise IntegrationFailure("too many pole encounters while sampling")
    return out, redraws
