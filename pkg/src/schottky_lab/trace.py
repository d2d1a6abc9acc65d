"""Smoothed resonance trace formula: geodesic and topological terms against a sum over resonances."""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize

from .errors import DomainError
from .schottky import LengthSpectrum, SchottkyGroup, primitive_geodesics
from .zeta import ORIENTATIONS, ResonanceHit

DEFAULT_NODES = 256


def bump(t):
    """exp(1 - 1/(1 - t^2)) on (-1, 1), zero outside; equals 1 at t = 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


@dataclass(frozen=True)
class TestFunction:
    alpha: float
    d: float

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if not (self.alpha > 0 and self.d > self.alpha):
            raise DomainError(f"need 0 < alpha < d, got alpha={self.alpha}, d={self.d}")

    @property
    def support(self):
        return (self.d - self.alpha, self.d + self.alpha)

    def __call__(self, t):
        return bump((np.asarray(t, dtype=float) - self.d) / self.alpha)


@dataclass(frozen=True)
class TraceReport:
    geodesic_sum: float
    topological_term: float
    resonance_sum: float
    dk_sum: float
    tail_bound: float
    rel_discrepancy: float
    floor: float = 0.0
    resonance_imag: float = 0.0

    @property
    def informative(self) -> bool:
        """False when the error floor exceeds the geometric side, so the ratio carries no information."""
        return self.floor < abs(self.geometric)

    @property
    def geometric(self) -> float:
        return self.geodesic_sum + self.topological_term

    @property
    def spectral(self) -> float:
        return self.resonance_sum + self.dk_sum


def _nodes_for(tf: TestFunction, zmax: float, nodes: int | None) -> int:
    # Gauss-Legendre needs a fixed number of nodes per oscillation of e^{-itz} across the support
    need = int(math.ceil(0.75 * tf.alpha * zmax)) + 128
    return max(nodes or DEFAULT_NODES, need)


@lru_cache(maxsize=32)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def phi_hat(tf: TestFunction, z, nodes: int | None = None):
    """Fourier transform of the test function, integral of phi(t) e^{-i t z} dt, for scalar or array z.

    Gauss-Legendre on the support; the node count grows with |Re z| so the
    oscillation stays resolved.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    n = _nodes_for(tf, float(np.abs(z.real).max(initial=0.0)), nodes)
    x, w = _gauss_legendre(n)
    t = tf.d + tf.alpha * x
    f = tf.alpha * w * bump(x)
    out = np.empty(z.shape, dtype=complex)
    block = max(1, 2 ** 22 // n)
    for i in range(0, len(z), block):
        out[i:i + block] = np.exp(-1j * np.outer(z[i:i + block], t)) @ f
    return complex(out[0]) if scalar else out


def bump_integral() -> float:
    """Integral of the bump over (-1, 1)."""
    return quad(lambda t: float(bump(t)), -1, 1, epsabs=0.0, epsrel=1e-13, limit=200)[0]


@lru_cache(maxsize=64)
def _envelope_samples(tf: TestFunction, im_max: float, x_max: float, samples: int):
    re = np.concatenate([[0.0], np.geomspace(1e-2, x_max, samples) / tf.alpha])
    out = []
    for im in np.linspace(0.0, im_max, 7):
        z = re + 1j * im
        out.append((z, np.abs(phi_hat(tf, -z)), tf.alpha * np.exp(-tf.d * im + tf.alpha * abs(im))))
    return out


@lru_cache(maxsize=64)
def fit_envelope(tf: TestFunction, power: float = 2.0, im_max: float = 3.0, x_max: float = 2000.0,
                 samples: int = 600, noise: float = 1e-12, polish: int = 8) -> float:
    """Smallest C with |phi_hat(-z)| <= alpha C e^{-d Im z + alpha |Im z|} / (1 + alpha |z|)^power.

    The grid runs to alpha |Re z| = x_max; points where phi_hat is below the
    quadrature noise (noise * alpha) are skipped.  The largest grid ratios are then
    polished by a bounded local maximization, since the sup usually falls between
    grid points.  |phi_hat| is symmetric under Re z -> -Re z, so Re z >= 0 suffices.
    """
    rows = _envelope_samples(tf, im_max, x_max, samples)
    ims = np.linspace(0.0, im_max, len(rows))
    re = rows[0][0].real
    starts = []
    for k, (z, v, scale) in enumerate(rows):
        ok = v > noise * scale
        ratio = np.where(ok, v / (scale / (1 + tf.alpha * np.abs(z)) ** power), 0.0)
        starts += [(ratio[i], i, k) for i in np.argsort(ratio)[-polish:]]
    starts.sort(reverse=True)

    def neg_ratio(p):
        z = complex(p[0], p[1])
        scale = tf.alpha * np.exp(-tf.d * p[1] + tf.alpha * abs(p[1]))
        v = abs(complex(phi_hat(tf, -z)))
        # same noise gate as the grid; below it the ratio is rounding error
        return -v * (1 + tf.alpha * abs(z)) ** power / scale if v > noise * scale else 0.0

    C = starts[0][0]
    dy = ims[1] - ims[0]
    for _, i, k in starts[:polish]:
        bounds = [(re[max(i - 1, 0)], re[min(i + 1, len(re) - 1)]),
                  (max(ims[k] - dy, 0.0), min(ims[k] + dy, im_max))]
        res = minimize(neg_ratio, [re[i], ims[k]], bounds=bounds, method="L-BFGS-B", options={"maxiter": 50})
        C = max(C, -float(res.fun))
    return float(C)


def geometric_side(tf: TestFunction, spectrum: LengthSpectrum, chi: float, m_max: int = 64, n: int = 1):
    """(geodesic sum, topological term).

    Each unoriented class is counted for both orientations, matching the zeta
    function whose zeros form the spectral side.
    """
    lo, hi = tf.support
    if spectrum.complete_below < hi:
        raise DomainError(f"spectrum certified only below {spectrum.complete_below}, need {hi}")
    total = 0.0
    for geo in spectrum.geodesics:
        for m in range(1, m_max + 1):
            t = m * geo.length
            if t > hi:
                break
            if t >= lo:
                total += ORIENTATIONS * geo.length * math.exp(-0.5 * n * t) * float(tf(t)) / (2 * geo.stability(m))
    topo = 0.0
    if chi != 0:
        x, w = np.polynomial.legendre.leggauss(DEFAULT_NODES)
        t = tf.d + tf.alpha * x
        g = np.cosh(0.5 * t) / (2 * np.sinh(0.5 * t)) ** (n + 1)
        topo = chi * tf.alpha * float(np.sum(w * bump(x) * g))
    return total, topo


def _z_of(lam, n=1):
    return -1j * (np.asarray(lam, dtype=complex) - 0.5 * n)


def resonance_points(hits, n: int = 1):
    """(z values, multiplicities) over hits and their conjugates; real hits are counted once."""
    zs, ms = [], []
    for h in hits:
        zs.append(complex(_z_of(h.lam, n)))
        ms.append(h.multiplicity)
        if abs(h.lam.imag) > 1e-12:
            zs.append(complex(_z_of(np.conj(h.lam), n)))
            ms.append(h.multiplicity)
    return np.array(zs, dtype=complex), np.array(ms, dtype=float)


def spectral_side(tf: TestFunction, hits, dk_values=(), R_cut: float = 60.0, n: int = 1,
                  density_const: float | None = None, nodes: int | None = None, deltahat: float = 0.0):
    """(resonance sum, d_k sum, tail bound).

    hits are the resonances in the upper half plane (Im lam >= 0); conjugates are
    added here.  Only resonances with |z| <= R_cut enter the sum.  The tail bound
    integrates the fitted decay envelope of phi_hat against the counting density
    dN <= C (1 + r)^n dr beyond R_cut.
    """
    zs, ms = resonance_points(hits, n)
    keep = np.abs(zs) <= R_cut
    zs, ms = zs[keep], ms[keep]
    vals = phi_hat(tf, -zs, nodes) if len(zs) else np.zeros(0, dtype=complex)
    res = 0.5 * complex(np.sum(ms * vals))
    dk = 0.5 * sum(dk * phi_hat(tf, -1j * (k + 1), nodes) for k, dk in enumerate(dk_values))
    if density_const is None:
        r = np.abs(zs)
        density_const = float(((n + 1) * np.cumsum(ms[np.argsort(r)]) / (1 + np.sort(r)) ** (n + 1)).max()) if len(r) else 0.0
    tail = tail_bound(tf, R_cut, density_const, n=n, deltahat=deltahat)
    return res, complex(dk).real, tail


def tail_bound(tf: TestFunction, R_cut: float, density_const: float, powers=(2, 4, 6, 8, 10), n: int = 1,
               deltahat: float = 0.0) -> float:
    """Bound on the resonance sum beyond |z| = R_cut.

    Integrates the fitted envelope alpha C_p e^{-(d - alpha)(n/2 - deltahat)} / (1 + alpha r)^p
    against dN <= C_N (1 + r)^n dr, using Im z >= n/2 - deltahat for every resonance,
    and keeps the smallest result over the powers p.  The bump is smooth, so
    its transform obeys the envelope for every p once C_p is fitted.
    """
    if density_const == 0:
        return 0.0
    damp = np.exp(-(tf.d - tf.alpha) * (0.5 * n - deltahat))
    best = np.inf
    for p in powers:
        if p <= n + 1:
            continue  # the integral against (1 + r)^n dr diverges
        C_phi = fit_envelope(tf, p)
        f = lambda r: tf.alpha * C_phi * damp / (1 + tf.alpha * r) ** p * density_const * (1 + r) ** n
        best = min(best, quad(f, R_cut, np.inf, limit=200)[0])
    # the spectral sum carries a factor 1/2 and N counts conjugate pairs
    return float(0.5 * best)


def cylinder_resonances(ell0: float, R_cut: float, n: int = 1):
    """Exact resonances -k + 2 pi i j / ell0 (Im >= 0) with |z| <= R_cut, multiplicity 2 from the two orientations."""
    hits = []
    spacing = 2 * math.pi / ell0
    kmax = int(R_cut) + 1
    jmax = int(R_cut / spacing) + 1
    for k in range(kmax + 1):
        for j in range(jmax + 1):
            lam = complex(-k, spacing * j)
            if abs(_z_of(lam, n)) <= R_cut:
                hits.append(ResonanceHit(lam, ORIENTATIONS, 0.0, (lam.real, lam.real, lam.imag, lam.imag)))
    return hits


def trace_report(group: SchottkyGroup, tf: TestFunction, R_cut: float, hits, spectrum: LengthSpectrum | None = None,
                 n: int = 1, quad_bound: float = 1e-12, nodes: int | None = None,
                 deltahat: float = 0.0) -> TraceReport:
    """Both sides of the trace formula and their relative discrepancy.

    hits must be complete for |z| <= R_cut; the group's d_k values enter the spectral side.
    """
    if spectrum is None:
        spectrum = primitive_geodesics(group, tf.support[1] + 1e-9)
    geo, topo = geometric_side(tf, spectrum, group.euler_char, n=n)
    res, dk, tail = spectral_side(tf, hits, group.dk_values, R_cut, n, nodes=nodes, deltahat=deltahat)
    floor = tail + quad_bound
    geometric = geo + topo
    spectral = res.real + dk
    rel = abs(geometric - spectral) / max(abs(geometric), floor)
    return TraceReport(geo, topo, res.real, dk, tail, rel, floor, res.imag)


__all__ = ["bump", "TestFunction", "TraceReport", "phi_hat", "bump_integral", "fit_envelope",
           "geometric_side", "spectral_side", "tail_bound", "cylinder_resonances", "trace_report",
           "resonance_points"]
