"""Kernels, Nystrom discretization, Fredholm determinants and resolvents."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError, NumericError, SingularPointError
from .specfun import bessel_j

__all__ = [
    "KernelKind",
    "KernelSpec",
    "QuadratureRule",
    "Method",
    "GapResult",
    "eval_kernel",
    "kernel_matrix",
    "build_rule",
    "fredholm_det",
    "fredholm_logdet",
    "gap_fredholm",
    "gap_fredholm_hard_edge",
    "parity_dets",
    "resolvent_diag",
    "DEFAULT_ORDER",
    "MAX_ORDER",
]

DEFAULT_ORDER = 60
MAX_ORDER = 400


class KernelKind(enum.Enum):
    SPECTRUM_SINGULARITY = "spectrum-singularity"
    HARD_EDGE = "hard-edge"
    SINE = "sine"


@dataclass(frozen=True)
class KernelSpec:
    """Integral-operator kernel and its parameter ``a``."""

    kind: KernelKind
    a: float = 0.0

    def __post_init__(self):
        a = float(self.a)
        if not math.isfinite(a):
            raise DomainError("kernel parameter must be finite")
        if self.kind is KernelKind.SPECTRUM_SINGULARITY and not a > -0.5:
            raise DomainError(f"spectrum-singularity kernel needs a > -1/2, got {a}")
        if self.kind is KernelKind.HARD_EDGE and not a > -1.0:
            raise DomainError(f"hard-edge kernel needs a > -1, got {a}")
        object.__setattr__(self, "a", a)

    @property
    def endpoint_exponent(self) -> float:
        """Exponent beta with K(t,t) ~ |t|^beta at the origin."""
        if self.kind is KernelKind.SPECTRUM_SINGULARITY:
            return 2.0 * self.a
        if self.kind is KernelKind.HARD_EDGE:
            return self.a
        return 0.0


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss rule.

    ``exponents[k]`` is the Jacobi exponent used on panel ``k`` at its end
    touching the origin (0 for plain Gauss-Legendre panels).
    """

    nodes: np.ndarray
    weights: np.ndarray
    panels: tuple
    exponents: tuple = field(default=())

    @property
    def size(self) -> int:
        return len(self.nodes)


class Method(enum.Enum):
    FREDHOLM = "fredholm"
    SIGMA1 = "sigma1"
    HARD_EDGE_PRODUCT = "hard-edge"
    CROSS_PRODUCT = "cross"


@dataclass(frozen=True)
class GapResult:
    """Gap probability with its log and an error estimate.

    ``err_est`` estimates the absolute error of ``logE``, i.e. the
    relative error of ``E``.
    """

    a: float
    x: float
    method: Method
    E: float
    logE: float
    err_est: float

    @classmethod
    def from_log(cls, a, x, method, logE, err_est):
        return cls(float(a), float(x), method, math.exp(logE), float(logE), float(abs(err_est)))


# --- kernel evaluation -----------------------------------------------------


def _phi_psi(spec: KernelSpec, u: np.ndarray):
    """Real-form factor functions with K = (phi(u)psi(v) - phi(v)psi(u)) / (2(u-v))."""
    a = spec.a
    if spec.kind is KernelKind.SPECTRUM_SINGULARITY:
        z = math.pi * np.abs(u)
        phi = np.zeros_like(z)
        psi = np.zeros_like(z)
        nz = z > 0
        if np.any(nz):
            r = np.sqrt(z[nz])
            phi[nz] = np.sign(u[nz]) * r * bessel_j(a + 0.5, z[nz])
            psi[nz] = r * bessel_j(a - 0.5, z[nz])
        if np.any(~nz):
            if a < 0:
                raise SingularPointError("kernel is infinite at the origin for a < 0")
            psi[~nz] = math.sqrt(2.0 / math.pi) if a == 0 else 0.0
        return phi, psi
    if spec.kind is KernelKind.HARD_EDGE:
        if np.any(u <= 0):
            raise DomainError("hard-edge kernel requires positive arguments")
        r = np.sqrt(u)
        return r * bessel_j(a + 1.0, r), bessel_j(a, r)
    raise AssertionError("sine kernel has no phi/psi factorization here")


def _diag(spec: KernelSpec, u: np.ndarray) -> np.ndarray:
    a = spec.a
    if spec.kind is KernelKind.SINE:
        return np.ones_like(u)
    if spec.kind is KernelKind.SPECTRUM_SINGULARITY:
        z = math.pi * np.abs(u)
        out = np.empty_like(z)
        nz = z > 0
        if np.any(nz):
            jm = bessel_j(a - 0.5, z[nz])
            jp = bessel_j(a + 0.5, z[nz])
            out[nz] = 0.5 * math.pi * (z[nz] * (jm * jm + jp * jp) - 2.0 * a * jp * jm)
        if np.any(~nz):
            if a < 0:
                raise SingularPointError("kernel diagonal is infinite at the origin for a < 0")
            out[~nz] = 1.0 if a == 0 else 0.0
        return out
    if np.any(u <= 0):
        raise DomainError("hard-edge kernel requires positive arguments")
    z = np.sqrt(u)
    j0 = bessel_j(a, z)
    j1 = bessel_j(a + 1.0, z)
    return (z * (j0 * j0 + j1 * j1) - 2.0 * a * j0 * j1) / (4.0 * z)


def eval_kernel(spec: KernelSpec, u, v):
    """Kernel value K(u, v); broadcasts over array arguments.

    Exactly equal arguments use the analytic diagonal limit.
    """
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    shape = u.shape
    u = np.atleast_1d(u).ravel()
    v = np.atleast_1d(v).ravel()
    if spec.kind is KernelKind.SINE:
        out = np.sinc(u - v)
    else:
        out = np.empty_like(u)
        same = u == v
        if np.any(same):
            out[same] = _diag(spec, u[same])
        off = ~same
        if np.any(off):
            fu, gu = _phi_psi(spec, u[off])
            fv, gv = _phi_psi(spec, v[off])
            out[off] = (fu * gv - fv * gu) / (2.0 * (u[off] - v[off]))
    return float(out[0]) if shape == () else out.reshape(shape)


def kernel_matrix(spec: KernelSpec, nodes) -> np.ndarray:
    """Matrix K(x_i, x_j) over distinct nodes."""
    x = np.asarray(nodes, dtype=float)
    if spec.kind is KernelKind.SINE:
        return np.sinc(x[:, None] - x[None, :])
    f, g = _phi_psi(spec, x)
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    K = (f[:, None] * g[None, :] - g[:, None] * f[None, :]) / (2.0 * d)
    np.fill_diagonal(K, _diag(spec, x))
    return K


# --- quadrature -------------------------------------------------------------


def _panel(lo, hi, order, beta):
    """Gauss nodes on (lo, hi); Jacobi-weighted toward an endpoint at 0."""
    half = 0.5 * (hi - lo)
    if beta == 0.0 or (lo != 0.0 and hi != 0.0):
        t, w = np.polynomial.legendre.leggauss(order)
        return lo + half * (t + 1.0), half * w
    # weight (1+t)^beta on [-1,1]; the origin sits at t=-1 after orientation
    t, w = roots_jacobi(order, 0.0, beta)
    dist = half * (t + 1.0)  # distance from the origin
    wt = w * half ** (beta + 1.0) / dist**beta
    if lo == 0.0:
        return dist, wt
    return -dist[::-1], wt[::-1]


def build_rule(interval, order: int, split_at_zero: bool = True, endpoint_exponent: float = 0.0) -> QuadratureRule:
    """Composite Gauss rule on ``interval``.

    Panels are split at 0 when requested.  A nonzero ``endpoint_exponent``
    beta switches panels that touch 0 to Gauss-Jacobi, integrating
    |t|^beta times a polynomial exactly; the stored weights are divided by
    |t_i|^beta so they act on the full integrand.
    """
    lo, hi = (float(interval[0]), float(interval[1]))
    if not lo < hi:
        raise DomainError("build_rule needs lo < hi")
    order = int(order)
    if order < 1 or order > MAX_ORDER:
        raise DomainError(f"order must lie in [1, {MAX_ORDER}]")
    beta = float(endpoint_exponent)
    if not beta > -1.0:
        raise DomainError("endpoint exponent must exceed -1")
    if split_at_zero and lo < 0.0 < hi:
        panels = ((lo, 0.0), (0.0, hi))
    else:
        panels = ((lo, hi),)
    nodes, weights, exps = [], [], []
    for p_lo, p_hi in panels:
        b = beta if (p_lo == 0.0 or p_hi == 0.0) else 0.0
        x, w = _panel(p_lo, p_hi, order, b)
        nodes.append(x)
        weights.append(w)
        exps.append(b)
    return QuadratureRule(np.concatenate(nodes), np.concatenate(weights), panels, tuple(exps))


# --- determinants -----------------------------------------------------------


def _values(spec, u, v):
    """Kernel values for a KernelSpec or a plain vectorized callable K(u, v)."""
    if callable(spec):
        return np.asarray(spec(u, v), dtype=float) * np.ones(np.broadcast(u, v).shape)
    return eval_kernel(spec, u, v)


def _nystrom(spec, rule):
    if callable(spec):
        x = rule.nodes
        K = _values(spec, x[:, None], x[None, :])
    else:
        K = kernel_matrix(spec, rule.nodes)
    sw = np.sqrt(rule.weights)
    A = np.eye(rule.size) - sw[:, None] * K * sw[None, :]
    if not np.all(np.isfinite(A)):
        raise NumericError("non-finite Nystrom matrix entries")
    return A


def fredholm_logdet(spec, rule: QuadratureRule) -> float:
    """log det(1 - K) from the LU factors of the symmetrized Nystrom matrix.

    ``spec`` is a KernelSpec or a symmetric vectorized callable K(u, v).
    """
    sign, logdet = np.linalg.slogdet(_nystrom(spec, rule))
    if not np.isfinite(logdet):
        raise NumericError("Fredholm determinant factorization broke down")
    if sign <= 0:
        raise NumericError("Fredholm determinant is not positive")
    return float(logdet)


def fredholm_det(spec, rule: QuadratureRule) -> float:
    """det(1 - K) on the rule's interval."""
    return math.exp(fredholm_logdet(spec, rule))


def _doubling_pair(order):
    order = int(order)
    if order < 1 or order > MAX_ORDER:
        raise DomainError(f"order must lie in [1, {MAX_ORDER}]")
    return (order, 2 * order) if 2 * order <= MAX_ORDER else (order, order // 2)


def gap_fredholm(a: float, x: float, order: int = DEFAULT_ORDER) -> GapResult:
    """E^SS on (-x, x) as a Fredholm determinant; ``err_est`` from doubling."""
    spec = KernelSpec(KernelKind.SPECTRUM_SINGULARITY, a)
    x = float(x)
    if not x >= 0:
        raise DomainError("x must be nonnegative")
    if x == 0.0:
        return GapResult.from_log(a, 0.0, Method.FREDHOLM, 0.0, 0.0)
    n1, n2 = _doubling_pair(order)
    beta = spec.endpoint_exponent
    l1 = fredholm_logdet(spec, build_rule((-x, x), n1, True, beta))
    l2 = fredholm_logdet(spec, build_rule((-x, x), n2, True, beta))
    return GapResult.from_log(a, x, Method.FREDHOLM, l1, abs(l1 - l2))


def gap_fredholm_hard_edge(a: float, X: float, order: int = DEFAULT_ORDER) -> GapResult:
    """Hard-edge gap probability on (0, X) as a Fredholm determinant."""
    spec = KernelSpec(KernelKind.HARD_EDGE, a)
    X = float(X)
    if not X >= 0:
        raise DomainError("X must be nonnegative")
    if X == 0.0:
        return GapResult.from_log(a, 0.0, Method.FREDHOLM, 0.0, 0.0)
    n1, n2 = _doubling_pair(order)
    l1 = fredholm_logdet(spec, build_rule((0.0, X), n1, False, spec.endpoint_exponent))
    l2 = fredholm_logdet(spec, build_rule((0.0, X), n2, False, spec.endpoint_exponent))
    return GapResult.from_log(a, X, Method.FREDHOLM, l1, abs(l1 - l2))


def parity_dets(spec: KernelSpec, x: float, order: int = DEFAULT_ORDER):
    """(det(1-K+), det(1-K-)) with K±(u,v) = K(u,v) ± K(u,-v) on (0, x).

    Relies on K(-u,-v) = K(u,v), true for the real-form kernels.
    """
    if spec.kind is KernelKind.HARD_EDGE:
        raise DomainError("parity factorization applies to symmetric kernels")
    rule = build_rule((0.0, x), order, False, spec.endpoint_exponent)
    t = rule.nodes
    Kd = kernel_matrix(spec, t)
    Kr = eval_kernel(spec, t[:, None], -t[None, :])
    sw = np.sqrt(rule.weights)
    out = []
    for sgn in (1.0, -1.0):
        A = np.eye(rule.size) - sw[:, None] * (Kd + sgn * Kr) * sw[None, :]
        out.append(float(np.linalg.det(A)))
    return tuple(out)


def resolvent_diag(spec, rule: QuadratureRule, point: float) -> float:
    """R(point, point) for R = K(1-K)^{-1} via the Nystrom interpolant."""
    A = _nystrom(spec, rule)
    sw = np.sqrt(rule.weights)
    point = float(point)
    b = sw * _values(spec, rule.nodes, np.full(rule.size, point))
    try:
        y = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NumericError("singular Nystrom system") from exc
    if not np.all(np.isfinite(y)):
        raise NumericError("non-finite resolvent solution")
    return float(_values(spec, point, point) + b @ y)
