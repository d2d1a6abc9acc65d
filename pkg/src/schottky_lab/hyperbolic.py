"""Upper half-plane geometry: points, distance, Poisson kernel and the free-space Green kernel.

Points carry a boundary vector ``y`` (length n) and a height so formulas stay
dimension-general, but every solver in the package runs with n = 1.  Internally the
surface case works with complex coordinates z = y + i*height.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import loggamma

from .errors import DomainError


@dataclass(frozen=True)
class HPoint:
    y: tuple
    height: float

    def __post_init__(self):
        y = tuple(float(v) for v in np.atleast_1d(self.y))
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "height", float(self.height))
        if not (self.height > 0 and np.isfinite(self.height)):
            raise DomainError(f"height must be finite and positive, got {self.height}")
        if not all(np.isfinite(y)):
            raise DomainError("boundary coordinates must be finite")

    @classmethod
    def at(cls, x: float, h: float) -> "HPoint":
        return cls((x,), h)

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls((z.real,), z.imag)

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def z(self) -> complex:
        if self.n != 1:
            raise DomainError("complex chart only exists for n = 1")
        return complex(self.y[0], self.height)


@dataclass(frozen=True)
class BoundaryPoint:
    y: tuple | None = None
    infinite: bool = False

    def __post_init__(self):
        if self.infinite:
            if self.y is not None:
                raise DomainError("point at infinity carries no coordinates")
            return
        if self.y is None:
            raise DomainError("finite boundary point needs coordinates")
        y = tuple(float(v) for v in np.atleast_1d(self.y))
        if not all(np.isfinite(y)):
            raise DomainError("boundary coordinates must be finite")
        object.__setattr__(self, "y", y)

    @classmethod
    def at(cls, x: float) -> "BoundaryPoint":
        return cls((x,))

    @classmethod
    def infinity(cls) -> "BoundaryPoint":
        return cls(None, True)


def cosh_dist(m: HPoint, m2: HPoint) -> float:
    dy2 = sum((a - b) ** 2 for a, b in zip(m.y, m2.y))
    return (m.height ** 2 + m2.height ** 2 + dy2) / (2.0 * m.height * m2.height)


def hyp_dist(m: HPoint, m2: HPoint) -> float:
    # arccosh loses digits near the diagonal; use the sinh(d/2) form instead
    dy2 = sum((a - b) ** 2 for a, b in zip(m.y, m2.y))
    s = np.sqrt((dy2 + (m.height - m2.height) ** 2) / (4.0 * m.height * m2.height))
    return float(2.0 * np.arcsinh(s))


def hyp_dist_z(z, w):
    """Vectorized distance between complex upper half-plane points."""
    z = np.asarray(z)
    w = np.asarray(w)
    s = np.abs(z - w) / (2.0 * np.sqrt(z.imag * w.imag))
    return 2.0 * np.arcsinh(s)


def poisson_kernel(m: HPoint, y: BoundaryPoint) -> float:
    # the point at infinity gets weight 0 by convention; no measure used here puts mass there
    if y.infinite:
        return 0.0
    dy2 = sum((a - b) ** 2 for a, b in zip(m.y, y.y))
    return m.height / (m.height ** 2 + dy2)


# Green kernel -----------------------------------------------------------------

_SERIES_SIGMA2_MAX = 0.5
_DE_HALF_WIDTH = 4.0
_DE_DECAY = 40.0  # endpoint weights below e^{-40} are dropped


def _log_prefactor(lam, n):
    return -0.5 * (n + 1) * np.log(2 * np.pi) + loggamma(lam) - loggamma(lam - 0.5 * (n + 1) + 1)


def _de_half_width(decay_rate):
    """Window in x so the endpoint factor exp(-decay_rate |u|), u = (pi/2) sinh x, is below e^{-40}."""
    u_max = _DE_DECAY / max(decay_rate, 1e-3)
    return max(_DE_HALF_WIDTH, float(np.arcsinh(2 * u_max / np.pi)))


@lru_cache(maxsize=64)
def _de_nodes(quad_nodes, half_width=_DE_HALF_WIDTH):
    x, w = np.polynomial.legendre.leggauss(quad_nodes)
    x = half_width * x
    w = half_width * w
    u = 0.5 * np.pi * np.sinh(x)
    # log cosh(u), stable for large |u|
    lch = np.abs(u) + np.log1p(np.exp(-2 * np.abs(u))) - np.log(2.0)
    # t = (1 + tanh u)/2, so 2t(1-t) = sech(u)^2 / 2 and dt = (pi/4) cosh(x) sech(u)^2 dx
    log_2t1t = -np.log(2.0) - 2 * lch
    log_jac = np.log(0.25 * np.pi * np.cosh(x)) - 2 * lch
    # 1 - tanh(u) and 1 + tanh(u) without cancellation
    e = np.exp(-2 * np.abs(u))
    one_m = np.where(u > 0, 2 * e / (1 + e), 2 / (1 + e))
    one_p = np.where(u > 0, 2 / (1 + e), 2 * e / (1 + e))
    return w, log_2t1t, log_jac, one_m, one_p


def k_integral(lam, sigma, quad_nodes=128, n=1, one_minus_sigma=None):
    """Integral over t in (0,1) of (2t(1-t))^(lam-(n+1)/2) (1+sigma(1-2t))^(-lam).

    A tanh-sinh substitution absorbs the endpoint singularity, which is integrable
    but not smooth once Re(lam) < (n+1)/2.  Near the diagonal pass 1 - sigma
    separately; recomputing it from sigma cancels.
    """
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    gap = 1 - sigma if one_minus_sigma is None else np.atleast_1d(np.asarray(one_minus_sigma, dtype=float))
    a = lam - 0.5 * (n + 1)
    # the integrand decays like exp(-2 Re(a + 1) |u|) at both ends
    w, log_2t1t, log_jac, one_m, one_p = _de_nodes(quad_nodes, _de_half_width(2 * (a + 1).real))
    # with t = (1 + tanh u)/2: 1 - 2t = -tanh u, so 1 + sigma(1-2t) = (1-sigma) + sigma(1 - tanh u)
    base = gap[:, None] + sigma[:, None] * one_m[None, :]
    logf = a * log_2t1t[None, :] - lam * np.log(base) + log_jac[None, :]
    return np.exp(logf) @ w


def _hyp2f1_series(a, b, c, x, tol=1e-17, max_terms=400):
    x = np.asarray(x, dtype=float)
    term = np.ones(x.shape, dtype=complex)
    total = term.copy()
    for k in range(max_terms):
        term = term * (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        total += term
        if np.all(np.abs(term) <= tol * np.abs(total)):
            break
    return total


def green_kernel_series(lam, d):
    """Surface Green kernel from its hypergeometric series in sigma^2; accurate for sigma^2 <= 1/2."""
    d = np.asarray(d, dtype=float)
    sigma = 1.0 / np.cosh(d)
    logc = loggamma(lam) - loggamma(lam + 0.5) - np.log(2 * np.sqrt(np.pi))
    # (2 cosh d)^(-lam) = exp(-lam * (d + log(1 + e^{-2d})))
    log2c = d + np.log1p(np.exp(-2 * d))
    f = _hyp2f1_series(0.5 * (lam + 1), 0.5 * lam, lam + 0.5, sigma ** 2)
    return np.exp(logc - lam * log2c) * f


def green_kernel(lam, d, quad_nodes: int = 128, n: int = 1):
    """Outgoing Green kernel of Delta - lam(n - lam) on the (n+1)-dimensional half-space at distance d.

    Returns sigma^lam k_lam(sigma) with sigma = 1/cosh(d).  Accepts an array of
    distances.  Near the diagonal the n = 1 kernel behaves like -log(d)/(2 pi).
    """
    lam = complex(lam)
    scalar = np.ndim(d) == 0
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if lam.real <= 0.5 * (n - 1):
        raise DomainError(f"green kernel needs Re(lambda) > {(n - 1) / 2}, got {lam}")
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise DomainError("green kernel is only defined off the diagonal (d > 0)")
    # log sigma = -log cosh d, computed without overflow
    log_sigma = -(d + np.log1p(np.exp(-2 * d)) - np.log(2.0))
    sigma = np.exp(log_sigma)
    gap = 2 * np.sinh(0.5 * d) ** 2 * sigma
    out = np.exp(lam * log_sigma + _log_prefactor(lam, n)) * k_integral(lam, sigma, quad_nodes, n, gap)
    return complex(out[0]) if scalar else out


def nodes_for_lambda(lam, base: int = 256, n: int = 1) -> int:
    """Quadrature order for the tanh-sinh rule at spectral parameter lam.

    Near the ends the integrand oscillates with total phase about
    |Im lam| u_max, where u_max = 40 / (2 Re(lam - (n-1)/2)) is the window in u;
    2.5 nodes per radian resolve it.
    """
    lam = complex(lam)
    phase = abs(lam.imag) * _DE_DECAY / (2 * max(lam.real - 0.5 * (n - 1), 1e-3))
    return max(base, int(np.ceil(2.5 * phase)))


def green_kernel_fast(lam, d):
    """Vectorized n = 1 Green kernel: series far from the diagonal, quadrature near it."""
    lam = complex(lam)
    d = np.asarray(d, dtype=float)
    out = np.empty(d.shape, dtype=complex)
    far = np.cosh(np.minimum(d, 350.0)) ** -2 <= _SERIES_SIGMA2_MAX
    if np.any(far):
        out[far] = green_kernel_series(lam, d[far])
    if np.any(~far):
        out[~far] = green_kernel(lam, d[~far], nodes_for_lambda(lam))
    return out


def laplacian_fd(f, z: complex, h: float = 1e-3) -> complex:
    """Five-point hyperbolic Laplacian -Im(z)^2 (d_x^2 + d_y^2) f at z."""
    y = z.imag
    lap = (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4 * f(z)) / h ** 2
    return -(y ** 2) * lap
