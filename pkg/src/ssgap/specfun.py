"""Real-order Bessel functions J, I and the Gamma function.

I_nu: power series (all terms positive) or the Hankel asymptotic
expansion once it has converged.  J_nu: power series up to
``EvalPolicy.j_series_limit``, where cancellation is still mild; beyond it
the Hankel expansion when converged, else downward (Miller) recurrence
normalized by a Neumann sum.  Integer-order families for Toeplitz
determinants also come from Miller recurrence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "EvalPolicy",
    "DEFAULT_POLICY",
    "gamma",
    "rgamma",
    "bessel_j",
    "bessel_i",
    "bessel_j_family",
    "bessel_i_family",
]


@dataclass(frozen=True)
class EvalPolicy:
    """Switching and truncation controls for the Bessel evaluators."""

    series_threshold: float = 12.0
    asymptotic_terms: int = 40
    target_rel_err: float = 1e-17
    j_series_limit: float = 6.0
    hankel_accept: float = 1e-14

    def __post_init__(self):
        if not self.series_threshold > 0:
            raise DomainError("series_threshold must be positive")
        if not 0 < self.j_series_limit <= self.series_threshold:
            raise DomainError("j_series_limit must lie in (0, series_threshold]")
        if not 0 < self.hankel_accept < 1e-6:
            raise DomainError("hankel_accept must lie in (0, 1e-6)")
        if self.asymptotic_terms < 1:
            raise DomainError("asymptotic_terms must be a positive integer")
        if not (0 < self.target_rel_err <= 1e-6):
            raise DomainError("target_rel_err must lie in (0, 1e-6]")


DEFAULT_POLICY = EvalPolicy()

# Lanczos approximation, g = 7, nine terms; relative error about 2e-15
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _sinpi(x: float) -> float:
    # reduce first so that sin(pi*x) keeps relative accuracy near integers
    r = x - 2.0 * round(x / 2.0)
    return math.sin(math.pi * r)


def _is_nonpos_int(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma(x: float) -> float:
    """Gamma function for real ``x`` away from the poles.

    Lanczos approximation (g = 7, nine coefficients) with the reflection
    formula for ``x < 0.5``.  Relative error is below 1e-13 for |x| <= 30.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma: non-finite argument {x!r}")
    if _is_nonpos_int(x):
        raise DomainError(f"gamma: pole at x = {x!r}")
    if x == math.floor(x) and x <= 21:
        return float(math.prod(range(1, int(x))))
    if x < 0.5:
        return math.pi / (_sinpi(x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def rgamma(x: float) -> float:
    """Reciprocal Gamma, equal to zero at the poles."""
    x = float(x)
    if _is_nonpos_int(x):
        return 0.0
    return 1.0 / gamma(x)


def _check_args(nu, z):
    nu = float(nu)
    if not math.isfinite(nu):
        raise DomainError("Bessel order must be finite")
    z = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z)):
        raise DomainError("Bessel argument must be finite")
    if np.any(z < 0):
        raise DomainError("Bessel argument must be nonnegative")
    if np.any(z > 100):
        raise DomainError("Bessel argument above 100 is not supported")
    return nu, z


def _series(nu, z, sign, policy):
    """Sum_k sign^k (z/2)^(2k+nu) / (k! Gamma(k+nu+1)) for z > 0."""
    h = 0.5 * z
    lead = np.exp(nu * np.log(h)) * rgamma(nu + 1.0)
    q = sign * h * h
    term = np.ones_like(z)
    total = np.ones_like(z)
    k = 0
    kmin = int(np.max(h)) + 2 if z.size else 2
    while True:
        k += 1
        denom = k * (k + nu)
        term = term * q / denom
        total = total + term
        if k > kmin and np.all(np.abs(term) <= policy.target_rel_err * np.abs(total)):
            break
        if k > 600:
            break
    return lead * total


def _hankel_coeffs(nu, n):
    mu = 4.0 * nu * nu
    a = [1.0]
    for k in range(1, n + 1):
        a.append(a[-1] * (mu - (2 * k - 1) ** 2) / (k * 8.0))
    return a


def _hankel_j(nu, z, policy):
    a = _hankel_coeffs(nu, 2 * policy.asymptotic_terms + 1)
    P = np.zeros_like(z)
    Q = np.zeros_like(z)
    inv = 1.0 / z
    best = np.full_like(z, np.inf)
    peak = np.zeros_like(z)
    done = np.zeros(z.shape, dtype=bool)
    for k in range(policy.asymptotic_terms):
        tp = (-1) ** k * a[2 * k] * inv ** (2 * k)
        tq = (-1) ** k * a[2 * k + 1] * inv ** (2 * k + 1)
        size = np.abs(tp) + np.abs(tq)
        # stop each lane at the smallest term past the initial hump
        if (4 * k - 1) ** 2 > 4.0 * nu * nu:
            done |= size > best
        P = np.where(done, P, P + tp)
        Q = np.where(done, Q, Q + tq)
        best = np.where(done, best, size)
        peak = np.where(done, peak, np.maximum(peak, size))
        if np.all(done | (size < 1e-17)):
            break
    chi = z - (0.5 * nu + 0.25) * math.pi
    # error estimate relative to the envelope: truncation plus rounding in
    # the alternating sum
    err = best + peak * np.finfo(float).eps
    return np.sqrt(2.0 / (math.pi * z)) * (P * np.cos(chi) - Q * np.sin(chi)), err


def _hankel_i(nu, z, policy):
    a = _hankel_coeffs(nu, policy.asymptotic_terms)
    S = np.zeros_like(z)
    inv = 1.0 / z
    best = np.full_like(z, np.inf)
    peak = np.zeros_like(z)
    done = np.zeros(z.shape, dtype=bool)
    for k in range(policy.asymptotic_terms):
        t = (-1) ** k * a[k] * inv ** k
        if (2 * k - 1) ** 2 > 4.0 * nu * nu:
            done |= np.abs(t) > best
        S = np.where(done, S, S + t)
        best = np.where(done, best, np.abs(t))
        peak = np.where(done, peak, np.maximum(peak, np.abs(t)))
        if np.all(done | (np.abs(t) < 1e-17)):
            break
    # the expansion drops a recessive e^{-z} companion series
    err = (best + peak * (np.finfo(float).eps + np.exp(-2.0 * z))) / np.abs(S)
    return np.exp(z) / np.sqrt(2.0 * math.pi * z) * S, err


def _miller_j(nu, z):
    """J_nu(z) by downward recurrence from orders mu + m, mu = nu - floor(nu).

    Normalized by (z/2)^mu = sum_k (mu + 2k) Gamma(mu + k) / k! J_{mu+2k}(z)
    (for mu = 0 this is J_0 + 2 sum J_2k = 1).
    """
    mu = nu - math.floor(nu)
    target = int(math.floor(nu))  # nu = mu + target
    top = max(target, 0)
    N = _miller_start(top + 1, float(np.max(z)))
    N += N % 2
    nxt = np.zeros_like(z)
    cur = np.full_like(z, 1e-300)
    norm = np.zeros_like(z)
    vals = {}
    # weight of J_{mu+2k}: (mu + 2k) Gamma(mu + k) / k!
    def weight(k):
        if mu == 0.0:
            return 1.0 if k == 0 else 2.0
        return (mu + 2 * k) * math.exp(math.lgamma(mu + k) - math.lgamma(k + 1))

    for m in range(N, -1, -1):
        # cur holds f_m, nxt holds f_{m+1}
        if m <= top + 1:
            vals[m] = cur.copy()
        if m % 2 == 0:
            norm = norm + weight(m // 2) * cur
        if m == 0:
            break
        prev = 2.0 * (mu + m) / z * cur - nxt
        nxt, cur = cur, prev
        big = np.abs(cur) > 1e250
        if np.any(big):
            f = np.where(big, 1e-250, 1.0)
            cur, nxt, norm = cur * f, nxt * f, norm * f
            for key in vals:
                vals[key] = vals[key] * f
    scale = np.exp(mu * np.log(0.5 * z)) / norm
    if target >= 0:
        return vals[target] * scale
    # step below mu: J_{o-1} = (2 o / z) J_o - J_{o+1}
    hi, lo = vals[1] * scale, vals[0] * scale
    o = mu
    for _ in range(-target):
        hi, lo = lo, 2.0 * o / z * lo - hi
        o -= 1.0
    return lo


def _eval(nu, z, policy, kind):
    nu, z = _check_args(nu, z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if nu < 0 and nu == math.floor(nu):
        n = int(-nu)
        out = _eval(float(n), z, policy, kind)
        return out * ((-1) ** n if kind == "j" else 1)
    out = np.empty_like(z)
    zero = z == 0
    if np.any(zero):
        out[zero] = 1.0 if nu == 0 else (0.0 if nu > 0 else np.inf)
    limit = policy.j_series_limit if kind == "j" else policy.series_threshold
    small = (~zero) & (z <= limit)
    sign = -1.0 if kind == "j" else 1.0
    if np.any(small):
        out[small] = _series(nu, z[small], sign, policy)
    rest = np.flatnonzero(z > limit)
    if rest.size:
        zr = z[rest]
        vals = np.full_like(zr, np.nan)
        far = zr > policy.series_threshold
        if np.any(far):
            f = _hankel_j if kind == "j" else _hankel_i
            h, err = f(nu, zr[far], policy)
            vals[far] = np.where(err <= policy.hankel_accept, h, np.nan)
        todo = np.isnan(vals)
        if np.any(todo):
            if kind == "j":
                vals[todo] = _miller_j(nu, zr[todo])
            else:
                vals[todo] = _series(nu, zr[todo], sign, policy)
        out[rest] = vals
    return out[0] if scalar else out


def bessel_j(nu, z, policy: EvalPolicy = DEFAULT_POLICY):
    """Bessel function of the first kind J_nu(z) for real nu and 0 <= z <= 100.

    ``z`` may be an array; ``nu`` is a scalar.  Negative integer orders use
    J_{-n} = (-1)^n J_n.  Beyond the series region accuracy is relative to
    the envelope max(|J_nu(z)|, sqrt(2/(pi z))).
    """
    return _eval(nu, z, policy, "j")


def bessel_i(nu, z, policy: EvalPolicy = DEFAULT_POLICY):
    """Modified Bessel function I_nu(z) for real nu and 0 <= z <= 100."""
    return _eval(nu, z, policy, "i")


def _miller_start(nmax, z):
    return nmax + 20 + int(z) + int(math.sqrt(40.0 * (nmax + z + 1)))


def bessel_i_family(nmax: int, z: float, policy: EvalPolicy = DEFAULT_POLICY):
    """Array [I_0(z), ..., I_nmax(z)] by downward recurrence.

    Normalized with the directly evaluated I_0(z).
    """
    if nmax < 0:
        raise DomainError("nmax must be nonnegative")
    z = float(z)
    _check_args(0.0, z)
    out = np.zeros(nmax + 1)
    if z == 0.0:
        out[0] = 1.0
        return out
    m = _miller_start(nmax, z)
    nxt, cur = 0.0, 1e-300
    for n in range(m, 0, -1):
        prev = 2.0 * n / z * cur + nxt
        nxt, cur = cur, prev
        if n - 1 <= nmax:
            out[n - 1] = cur
        if abs(cur) > 1e250:
            out /= 1e250
            nxt /= 1e250
            cur /= 1e250
    return out * (bessel_i(0.0, z, policy) / out[0])


def bessel_j_family(nmax: int, z: float, policy: EvalPolicy = DEFAULT_POLICY):
    """Array [J_0(z), ..., J_nmax(z)] by downward recurrence.

    Normalized with the sum rule J_0 + 2 sum_k J_2k = 1, which stays well
    conditioned near zeros of J_0.
    """
    if nmax < 0:
        raise DomainError("nmax must be nonnegative")
    z = float(z)
    _check_args(0.0, z)
    out = np.zeros(nmax + 1)
    if z == 0.0:
        out[0] = 1.0
        return out
    m = _miller_start(nmax, z)
    m += m % 2
    nxt, cur = 0.0, 1e-300
    norm = 0.0
    for n in range(m, 0, -1):
        prev = 2.0 * n / z * cur - nxt
        nxt, cur = cur, prev
        k = n - 1
        if k <= nmax:
            out[k] = cur
        if k > 0 and k % 2 == 0:
            norm += 2.0 * cur
        if abs(cur) > 1e250:
            out /= 1e250
            nxt /= 1e250
            cur /= 1e250
            norm /= 1e250
    norm += cur
    return out / norm
