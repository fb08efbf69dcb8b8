"""Backlund transformations of the P_III' system on extended states.

Each generator maps (v1, v2, p, q, s, sH) to a new extended state.  The
rows for s0 and T2 contain a bare time symbol t; it is read either as s
or as sqrt(s) according to ``TimeConvention``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvariantError, TransformSingularError
from .hamflow import FlowTrajectory, PIIIParams, System, sample_piii_trajectories

__all__ = [
    "TransformId",
    "TimeConvention",
    "ExtendedState",
    "prime_hamiltonian",
    "apply",
    "apply_raw",
    "solution_map_check",
    "hamiltonian_column_residual",
    "group_relation_check",
    "hamiltonian_column_check",
    "resolve_time_convention",
    "INVOLUTIONS",
]


class TransformId(enum.Enum):
    S0 = "s0"
    S1 = "s1"
    S2 = "s2"
    S_MINUS = "s_minus"
    T2 = "T2"


INVOLUTIONS = (TransformId.S0, TransformId.S1, TransformId.S2, TransformId.S_MINUS)


class TimeConvention(enum.Enum):
    T_MEANS_S = "t_means_s"
    T_MEANS_SQRT_S = "t_means_sqrt_s"


def prime_hamiltonian(v1, v2, q, p, s):
    """sH of the P_III' system."""
    return q * q * p * p - (q * q + v1 * q - s) * p + 0.5 * (v1 + v2) * q


@dataclass(frozen=True)
class ExtendedState:
    """(v1, v2, p, q, s, sH) with sH consistent with the other fields."""

    v1: float
    v2: float
    p: float
    q: float
    s: float
    sH: float

    def __post_init__(self):
        ref = prime_hamiltonian(self.v1, self.v2, self.q, self.p, self.s)
        if abs(ref - self.sH) > 1e-10 * max(1.0, abs(ref)):
            raise InvariantError(f"stored sH {self.sH!r} differs from recomputed {ref!r}")

    @classmethod
    def from_point(cls, v1, v2, q, p, s):
        return cls(float(v1), float(v2), float(p), float(q), float(s), float(prime_hamiltonian(v1, v2, q, p, s)))

    def as_tuple(self):
        return (self.v1, self.v2, self.p, self.q, self.s, self.sH)


def _tsym(s, convention):
    if convention is TimeConvention.T_MEANS_S:
        return s
    if s <= 0:
        raise TransformSingularError("sqrt(s) convention needs s > 0")
    return math.sqrt(s)


def _nz(x, what):
    if x == 0 or not math.isfinite(x):
        raise TransformSingularError(f"zero denominator in {what}")
    return x


def apply_raw(tid: TransformId, fields, convention: TimeConvention = TimeConvention.T_MEANS_S):
    """Row of the transformation table applied to a raw six-tuple."""
    v1, v2, p, q, s, sH = (float(x) for x in fields)
    if tid is TransformId.S0:
        t = _tsym(s, convention)
        _nz(q, "s0 (q)")
        return (
            -1 - v2,
            -1 - v1,
            q / t * (q * (p - 1) - 0.5 * (v1 - v2)) + 1,
            -t / q,
            s,
            sH - q * (p - 1) + 0.5 * (v1 - v2) * (1 + 0.5 * (v1 + v2)),
        )
    if tid is TransformId.S1:
        den = _nz(2 * (p - 1), "s1 (p - 1)")
        return (v2, v1, p, q + (v2 - v1) / den, s, sH - 0.25 * (v2 * v2 - v1 * v1))
    if tid is TransformId.S2:
        return (v1, -v2, 1 - p, -q, -s, sH - s)
    if tid is TransformId.S_MINUS:
        den = _nz(p * (p - 1), "s_minus p(p - 1)")
        return (-v1, -v2, p, q - (v1 * p - 0.5 * (v1 + v2)) / den, s, sH)
    if tid is TransformId.T2:
        t = _tsym(s, convention)
        _nz(q, "T2 (q)")
        den = _nz(q * (q * p - 0.5 * (v1 + v2)) + t, "T2 bracket")
        return (
            v1 + 1,
            v2 - 1,
            q / t * (0.5 * (v1 + v2) - q * p),
            t / q - 0.5 * (2 + v1 - v2) * t / den,
            s,
            sH - q * p,
        )
    raise DomainError(f"unknown transform {tid!r}")


def apply(tid: TransformId, state: ExtendedState, convention: TimeConvention = TimeConvention.T_MEANS_S) -> ExtendedState:
    """Transformed extended state; raises InvariantError if the row is inconsistent."""
    return ExtendedState(*apply_raw(tid, state.as_tuple(), convention))


def hamiltonian_column_residual(tid, fields, convention) -> float:
    """|sH column of the image - sH recomputed at the image|, scaled."""
    v1, v2, p, q, s, sH = apply_raw(tid, fields, convention)
    ref = prime_hamiltonian(v1, v2, q, p, s)
    return abs(ref - sH) / max(1.0, abs(ref))


def _prime_field(v1, v2, q, p, s):
    dq = (2 * q * q * p - q * q - v1 * q + s) / s
    dp = -(2 * q * p * p - 2 * q * p - v1 * p + 0.5 * (v1 + v2)) / s
    return dq, dp


def _row_denominators(tid, v1, v2, p, q, s, convention):
    if tid is TransformId.S0:
        return (q,)
    if tid is TransformId.S1:
        return (p - 1,)
    if tid is TransformId.S_MINUS:
        return (p, p - 1)
    if tid is TransformId.T2:
        t = _tsym(s, convention)
        return (q, q * (q * p - 0.5 * (v1 + v2)) + t)
    return ()


def solution_map_check(
    tid: TransformId,
    traj: FlowTrajectory,
    convention: TimeConvention = TimeConvention.T_MEANS_S,
    min_den: float = 0.1,
    return_skipped: bool = False,
):
    """Max scaled residual of the image flow against the P_III' equations.

    Image derivatives come from a five-point central difference of the
    transformed dense output.  Nodes too close to the ends, or where a row
    denominator is below ``min_den`` in magnitude, are skipped.
    """
    if traj.system is not System.PIII_PRIME:
        raise DomainError("solution_map_check needs a P_III' trajectory")
    P = traj.params
    lo, hi = sorted(traj.span)
    worst = 0.0
    skipped = 0

    def image(s):
        st = traj.state_at(s)
        return apply_raw(tid, (P.v1, P.v2, st.p, st.q, s, 0.0), convention)

    for s, q, p in zip(traj.times, traj.q, traj.p):
        h = 1e-3 * abs(s)
        if s - 2 * h < lo or s + 2 * h > hi:
            continue
        if any(abs(d) < min_den for d in _row_denominators(tid, P.v1, P.v2, p, q, s, convention)):
            skipped += 1
            continue
        pts = [image(s + k * h) for k in (-2, -1, 1, 2)]
        V1, V2, Pi, Qi, S, _ = image(s)
        dS = (pts[2][4] - pts[1][4]) / (2 * h)

        def deriv(j):
            return (pts[0][j] - 8 * pts[1][j] + 8 * pts[2][j] - pts[3][j]) / (12 * h) / dS

        fq, fp = _prime_field(V1, V2, Qi, Pi, S)
        rq = abs(deriv(3) - fq) / max(1.0, abs(fq))
        rp = abs(deriv(2) - fp) / max(1.0, abs(fp))
        worst = max(worst, rq, rp)
    return (worst, skipped) if return_skipped else worst


def _random_state(rng, box=2.0):
    v1, v2, q, p = rng.uniform(-box, box, 4)
    s = rng.uniform(0.5, 3.0)
    return ExtendedState.from_point(v1, v2, q, p, s)


def _singular(state, convention, min_den=1e-3):
    """True if any row denominator is small at this state or its images."""
    try:
        for tid in TransformId:
            apply_raw(tid, state.as_tuple(), convention)
        v1, v2, p, q, s, _ = state.as_tuple()
        dens = [q, p - 1, p * (p - 1), q * (q * p - 0.5 * (v1 + v2)) + s]
        return min(abs(d) for d in dens) < min_den
    except TransformSingularError:
        return True


def group_relation_check(seed: int, trials: int, convention: TimeConvention = TimeConvention.T_MEANS_S) -> dict:
    """Involution and reflection-composite residuals on random states.

    Returns a dict with per-generator max residuals, the s_minus s2
    composite residuals, the T2 shift residual, and the redraw count.
    """
    rng = np.random.default_rng(seed)
    inv = {tid.value: 0.0 for tid in INVOLUTIONS}
    comp_params = comp_shift = t2_shift = 0.0
    redraws = 0
    done = 0
    while done < trials:
        st = _random_state(rng)
        if _singular(st, convention):
            redraws += 1
            continue
        x = np.array(st.as_tuple())
        for tid in INVOLUTIONS:
            once = apply_raw(tid, x, convention)
            try:
                twice = np.array(apply_raw(tid, once, convention))
            except TransformSingularError:
                redraws += 1
                break
            inv[tid.value] = max(inv[tid.value], float(np.max(np.abs(twice - x) / np.maximum(1.0, np.abs(x)))))
        else:
            y = apply_raw(TransformId.S_MINUS, apply_raw(TransformId.S2, x, convention), convention)
            comp_params = max(comp_params, abs(y[0] + x[0]), abs(y[1] - x[1]), abs(y[4] + x[4]))
            comp_shift = max(comp_shift, abs(y[5] - (x[5] - x[4])))
            z = apply_raw(TransformId.T2, x, convention)
            t2_shift = max(t2_shift, abs(z[5] - (x[5] - x[3] * x[2])))
            done += 1
    return {
        "involution": inv,
        "composite_params": comp_params,
        "composite_shift": comp_shift,
        "T2_shift": t2_shift,
        "redraws": redraws,
        "trials": trials,
    }


def hamiltonian_column_check(seed: int, trials: int, convention: TimeConvention = TimeConvention.T_MEANS_S) -> dict:
    """Per-row max of ``hamiltonian_column_residual`` on random nonsingular states."""
    rng = np.random.default_rng(seed)
    worst = {tid.value: 0.0 for tid in TransformId}
    done = 0
    while done < trials:
        st = _random_state(rng)
        if _singular(st, convention):
            continue
        for tid in TransformId:
            worst[tid.value] = max(worst[tid.value], hamiltonian_column_residual(tid, st.as_tuple(), convention))
        done += 1
    return worst


def resolve_time_convention(seed: int = 0, n_traj: int = 4, threshold: float = 1e-6):
    """Decide the reading of the time symbol from solution-map residuals.

    Returns (winner or None, residual table {convention: {row: residual}}).
    The winner must map solutions to solutions for every row while the
    other convention fails at least one row.
    """
    trajs, _ = sample_piii_trajectories(seed, n_traj, t_span=(1.0, 2.0), system=System.PIII_PRIME)
    table = {}
    for conv in TimeConvention:
        rows = {}
        for tid in TransformId:
            rows[tid.value] = max(solution_map_check(tid, tr, conv) for tr in trajs)
        table[conv.value] = rows
    passing = [c for c in TimeConvention if all(r <= threshold for r in table[c.value].values())]
    winner = passing[0] if len(passing) == 1 else None
    return winner, table
