"""Bessel Toeplitz determinants for half-integer a.

At a = n - 1/2 the tau-functions are n x n Toeplitz determinants with
modified (diagonal family) or ordinary (cross family) Bessel entries.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .sigma_ode import gap_hard_edge
from .specfun import bessel_i, bessel_i_family, bessel_j_family

__all__ = [
    "BesselFamily",
    "ToeplitzSpec",
    "toeplitz_matrix",
    "tau_diag",
    "tau_cross",
    "tau_cross_negated",
    "cofactor_det",
    "classical_identity_check",
    "he_classical_check",
]


class BesselFamily(enum.Enum):
    I_MODIFIED = "I"
    J_ORDINARY = "J"


@dataclass(frozen=True)
class ToeplitzSpec:
    n: int
    X: float
    family: BesselFamily = BesselFamily.I_MODIFIED

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"matrix size must be a nonnegative integer, got {self.n!r}")
        if not self.X >= 0:
            raise DomainError(f"X must be >= 0, got {self.X!r}")


def toeplitz_matrix(spec: ToeplitzSpec) -> np.ndarray:
    """Matrix [B_{j-k}(2 sqrt X)] for j, k = 0..n-1."""
    n = spec.n
    if n == 0:
        return np.zeros((0, 0))
    z = 2.0 * math.sqrt(spec.X)
    idx = np.subtract.outer(np.arange(n), np.arange(n))
    if spec.family is BesselFamily.I_MODIFIED:
        vals = bessel_i_family(n - 1, z)
        return vals[np.abs(idx)]
    vals = bessel_j_family(n - 1, z)
    # J_{-m} = (-1)^m J_m
    sign = np.where((idx < 0) & (idx % 2 == 1), -1.0, 1.0)
    return sign * vals[np.abs(idx)]


def _det(M: np.ndarray) -> float:
    if M.shape[0] == 0:
        return 1.0
    sign, logdet = np.linalg.slogdet(M)
    return float(sign * math.exp(logdet))


def tau_diag(n: int, X: float) -> float:
    """det[I_{j-k}(2 sqrt X)], j, k = 0..n-1."""
    return _det(toeplitz_matrix(ToeplitzSpec(n, float(X), BesselFamily.I_MODIFIED)))


def tau_cross(n: int, X: float) -> float:
    """e^X det[J_{j-k}(2 sqrt X)], j, k = 0..n-1."""
    X = float(X)
    return math.exp(X) * _det(toeplitz_matrix(ToeplitzSpec(n, X, BesselFamily.J_ORDINARY)))


def tau_cross_negated(n: int, X: float) -> float:
    """The cross-family tau-function at argument -X, for X >= 0.

    With J_m(2i sqrt X) = i^m I_m(2 sqrt X), the entries become
    i^(j-k) I_{|j-k|}(2 sqrt X).  Conjugating by diag(i^j) removes the
    phases, so the determinant equals the real modified-Bessel one.
    Entries are evaluated one by one, independently of the recurrence
    used by ``tau_diag``.
    """
    X = float(X)
    if not X >= 0:
        raise DomainError(f"X must be >= 0, got {X!r}")
    if n < 0:
        raise DomainError("n must be nonnegative")
    z = 2.0 * math.sqrt(X)
    col = np.array([float(bessel_i(float(m), z)) for m in range(n)])
    M = col[np.abs(np.subtract.outer(np.arange(n), np.arange(n)))] if n else np.zeros((0, 0))
    return math.exp(-X) * _det(M)


def cofactor_det(M) -> float:
    """Leibniz-formula determinant; only meant as an oracle for n <= 4."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n > 4:
        raise DomainError("cofactor expansion is limited to n <= 4")
    total = 0.0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = -1.0 if inv % 2 else 1.0
        for i, j in enumerate(perm):
            term *= M[i, j]
        total += term
    return total


def classical_identity_check(n: int, X_grid) -> float:
    """Max relative residual of the tau identity on the classical solutions.

    Left side: e^{-2X} tau_diag(n-1, X) tau_diag(n, X).  Right side: the
    product of the cross-family tau-functions at -X for sizes n and n-1.
    """
    if n < 1:
        raise DomainError("identity check needs n >= 1")
    worst = 0.0
    for X in np.atleast_1d(np.asarray(X_grid, dtype=float)):
        if not X > 0:
            raise DomainError("X_grid must be positive")
        lhs = math.exp(-2.0 * X) * tau_diag(n - 1, X) * tau_diag(n, X)
        rhs = tau_cross_negated(n, X) * tau_cross_negated(n - 1, X)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst


def he_classical_check(n: int, X_grid, tol: float = 1e-10) -> float:
    """Max relative gap between e^{-X/4} tau_diag(n, X/4) and the ODE route."""
    worst = 0.0
    for X in np.atleast_1d(np.asarray(X_grid, dtype=float)):
        if not 0 < X <= 20:
            raise DomainError("X_grid must lie in (0, 20]")
        ref = math.exp(-X / 4) * tau_diag(n, X / 4)
        E, _ = gap_hard_edge(float(n), float(X), tol)
        worst = max(worst, abs(E - ref) / ref)
    return worst
