"""Small-argument series for the sigma functions.

Two kinds of series live here:

* the truncated series with the three leading powers of the constant
  (``printed_terms``), one per boundary regime;
* an extended formal series for the hard-edge-type problem
  (``formal_terms``), generated by a double recursion in powers
  x^(k*lam + m) of the deviation from the affine exact solution.

All series are returned as ``SeriesTerms``: coefficients ``c`` on powers
``x**e`` of the positive variable x = |s| (or r).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import DomainError
from .specfun import gamma

__all__ = [
    "c_ss",
    "c_he",
    "c_tilde",
    "SeriesTerms",
    "printed_he",
    "printed_negative",
    "printed_ss",
    "formal_terms",
    "omitted_exponents",
    "default_orders",
]


def c_ss(a: float) -> float:
    """Leading constant C^SS_a of sigma_1 at r -> 0+."""
    return -2.0 / (4.0 ** (2 * a + 1) * gamma(a + 0.5) * gamma(a + 1.5))


def c_he(a: float) -> float:
    """Leading constant C^HE_a of the hard-edge sigma at s -> 0+."""
    return 1.0 / (2.0 ** (2 * a + 2) * gamma(a + 2) * gamma(a + 1))


def c_tilde(mu: float) -> float:
    """Leading constant of the negative-side sigma at s -> 0-."""
    return 1.0 / (4.0 ** (1 - mu) * gamma(2 - mu) * gamma(1 - mu))


@dataclass(frozen=True)
class SeriesTerms:
    """Truncated series  sum_i coeffs[i] * x**exps[i].

    ``lam`` and ``C`` describe the leading term C x**lam.  ``tail`` flags
    the last retained term of each direction; their size estimates the
    truncation error.  ``index`` holds the (k, m) label of each term.
    """

    coeffs: np.ndarray
    exps: np.ndarray
    index: tuple
    tail: np.ndarray
    lam: float
    C: float

    def value(self, x):
        """(w, x w', x^2 w'') at x > 0."""
        x = float(x)
        p = self.coeffs * x**self.exps
        e = self.exps
        return float(p.sum()), float((e * p).sum()), float((e * (e - 1) * p).sum())

    def log_integral(self, x):
        """Integral of w(x')/x' over (0, x]."""
        return float((self.coeffs * float(x) ** self.exps / self.exps).sum())

    def tail_estimate(self, x):
        """Relative size of the last retained terms against the leading term."""
        x = float(x)
        t = np.abs(self.coeffs[self.tail]) * x ** self.exps[self.tail]
        lead = abs(self.C) * x**self.lam
        return float(t.max() / lead) if t.size else 0.0


def _make(entries, lam, C, tail_labels):
    idx = tuple((k, m) for k, m, _ in entries)
    coeffs = np.array([c for _, _, c in entries], dtype=float)
    exps = np.array([k * lam + m for k, m, _ in entries], dtype=float)
    tail = np.array([lab in tail_labels for lab in idx], dtype=bool)
    return SeriesTerms(coeffs, exps, idx, tail, float(lam), float(C))


def printed_he(a: float) -> SeriesTerms:
    """Hard-edge series, v = (a, a), in powers of s > 0."""
    if not a > -1:
        raise DomainError("hard-edge series needs a > -1")
    C = c_he(a)
    lam = a + 1.0
    entries = [
        (1, 0, C),
        (1, 1, -C / (2 * (a + 2))),
        (1, 2, C * (2 * a + 3) / (16 * (a + 3) * (a + 2) * (a + 1))),
        (2, 0, C**2 / (a + 1)),
        (2, 1, -(C**2) * (2 * a + 3) / (2 * (a + 2) ** 2 * (a + 1))),
        (3, 0, C**3 / (a + 1) ** 2),
    ]
    return _make(entries, lam, C, {(1, 2), (2, 1), (3, 0)})


def printed_negative(mu: float) -> SeriesTerms:
    """Negative-side series, v = (mu, -mu), in powers of x = -s > 0.

    Covers only the deviation from -mu^2/2 + s/4.
    """
    if not mu < 1:
        raise DomainError("negative-side series needs mu < 1")
    C = c_tilde(mu)
    lam = 1.0 - mu
    entries = [
        (1, 0, C),
        (1, 1, C / (2 * (mu - 2))),
        (1, 2, C * (2 * mu - 3) / (16 * (mu - 3) * (mu - 2) * (mu - 1))),
        (2, 0, -(C**2) / (mu - 1)),
        (2, 1, -(C**2) * (2 * mu - 3) / (2 * (mu - 1) * (mu - 2) ** 2)),
        (3, 0, C**3 / (mu - 1) ** 2),
    ]
    return _make(entries, lam, C, {(1, 2), (2, 1), (3, 0)})


def printed_ss(a: float) -> SeriesTerms:
    """sigma_1 series in powers of r > 0."""
    if not a > -0.5:
        raise DomainError("sigma_1 series needs a > -1/2")
    C = c_ss(a)
    lam = 2 * a + 1.0
    entries = [
        (1, 0, C),
        (1, 2, -C * a / (2 * (2 * a + 3) * (2 * a + 1))),
        (1, 4, C * a / (16 * (2 * a + 5) * (2 * a + 3) * (2 * a + 1))),
        (2, 0, -(C**2) / (2 * a + 1)),
        (2, 2, C**2 * (a + 1) / ((2 * a + 1) * (2 * a + 3) ** 2)),
        (3, 0, C**3 / (2 * a + 1) ** 2),
    ]
    return _make(entries, lam, C, {(1, 4), (2, 2), (3, 0)})


def omitted_exponents(kind: str, lam: float):
    """Labels and exponents of the first terms dropped from a printed series."""
    if kind == "ss":
        labels = [(1, 6), (2, 4), (3, 2), (4, 0)]
    else:
        labels = [(1, 3), (2, 2), (3, 1), (4, 0)]
    return [(lab, lab[0] * lam + lab[1]) for lab in labels]


# --- extended formal series -------------------------------------------------


def _residual_coeffs(c, lam, kappa):
    """Double-series coefficients of the hard-edge-type invariant.

    With w = sum c[k,m] x^(k lam + m) and w1 = x w', w2 = x^2 w'':
        F = w2^2 - kappa w1^2 + 4 w1^2 (w - w1) - x w1 (w - w1).
    """
    K1, M1 = c.shape
    k = np.arange(K1)[:, None]
    m = np.arange(M1)[None, :]
    E = k * lam + m
    w1 = E * c
    w2 = E * (E - 1) * c
    d = c - w1

    def mul(A, B):
        return convolve2d(A, B)[:K1, :M1]

    w11 = mul(w1, w1)
    out = mul(w2, w2) - kappa * w11 + 4.0 * mul(w11, d)
    shifted = mul(w1, d)
    out[:, 1:] -= shifted[:, :-1]
    return out


@functools.lru_cache(maxsize=128)
def _formal_coeffs(a_eff: float, K: int, M: int):
    lam = 1.0 + a_eff
    kappa = a_eff * a_eff
    C = c_he(a_eff)
    c = np.zeros((K + 2, M + 1))
    c[1, 0] = C
    for m in range(M + 1):
        for k in range(1, K + 1):
            if (k, m) == (1, 0):
                continue
            # F[k+1, m] is affine in c[k, m]; only the pairing with c[1, 0]
            # is linear, with coefficient 2 C lam a E (E - lam)
            sub = c[: k + 2, : m + 1].copy()
            sub[k, m] = 0.0
            f0 = _residual_coeffs(sub, lam, kappa)[k + 1, m]
            E = k * lam + m
            c[k, m] = -f0 / (2.0 * C * lam * a_eff * E * (E - lam))
    c = c[: K + 1]
    c.setflags(write=False)
    return c


def formal_terms(a_eff: float, K: int, M: int) -> SeriesTerms:
    """Extended series of the hard-edge-type deviation w(x).

    ``a_eff`` is a for v = (a, a) and -mu for v = (mu, -mu).  At a_eff = 0
    the recursion is degenerate, but w = x/4 is exact and is returned as
    a single term.
    """
    a_eff = float(a_eff)
    if not a_eff > -1:
        raise DomainError("formal series needs a_eff > -1")
    if abs(a_eff) < 1e-8:
        return _make([(1, 0, 0.25)], 1.0, 0.25, set())
    c = _formal_coeffs(a_eff, int(K), int(M))
    lam = 1.0 + a_eff
    entries = [(k, m, c[k, m]) for k in range(1, K + 1) for m in range(M + 1)]
    tails = {(K, m) for m in range(M + 1)} | {(k, M) for k in range(1, K + 1)}
    return _make(entries, lam, c[1, 0], tails)


def default_orders(a_eff: float):
    """(K, M) giving a truncation far below double precision near x = 1e-2."""
    lam = 1.0 + a_eff
    K = int(min(48, max(6, math.ceil(14.0 / lam) + 1)))
    return K, 8
