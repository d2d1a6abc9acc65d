"""Wave solutions on the surface from the spectral representation, decay fits and the leading resonance term.

The field is assembled as u(t, m) = sum_j w_j sum_gamma W(t, d(m, gamma m_j)), where
W(t, r) is the band-limited, heat-mollified sine propagator of the free plane,

    W(t, r) = -(2/pi) int_0^V sin(t v) Im G(1/2 + i v; r) exp(-eps (1/4 + v^2)) dv,

tabulated once on an r-grid.  This is the v-integral of the orbit-summed resolvent
with the orbit sum moved outside.  For eps > 0 the kernel is negligible beyond
r = t + a few sqrt(eps), so only orbit points within that radius contribute.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma as gamma_fn

from .dimension import AtomicMeasure, u_delta_z
from .errors import DomainError
from .hyperbolic import HPoint, green_kernel_fast, hyp_dist_z
from .resolvent import ResidueEstimate
from .schottky import DEFAULT_WORD_BUDGET, SchottkyGroup, mobius_image, orbit_ball, word_levels

PANEL_WIDTH = 0.25
PANEL_NODES = 8
GAUSS_CUTOFF = 40.0  # mollifier weight e^{-40} is treated as zero
TAIL_SIGMAS = 6.0


@dataclass(frozen=True)
class InitialData:
    f0_atoms: tuple = ()
    f1_atoms: tuple = ()
    mollifier_width: float = 0.0

    def __post_init__(self):
        f0 = tuple((p, float(w)) for p, w in self.f0_atoms)
        f1 = tuple((p, float(w)) for p, w in self.f1_atoms)
        if not f0 and not f1:
            raise DomainError("initial data needs at least one atom")
        if self.mollifier_width < 0:
            raise DomainError("mollifier width must be non-negative")
        object.__setattr__(self, "f0_atoms", f0)
        object.__setattr__(self, "f1_atoms", f1)

    def scaled(self, c0: float = 1.0, c1: float = 1.0) -> "InitialData":
        return InitialData(tuple((p, c0 * w) for p, w in self.f0_atoms),
                           tuple((p, c1 * w) for p, w in self.f1_atoms), self.mollifier_width)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    intercept: float
    window: tuple
    residual: float
    predicted_rate: float

    def __post_init__(self):
        if not self.window[0] < self.window[1]:
            raise DomainError("decay window must have t_min < t_max")

    @property
    def rel_rate_error(self) -> float:
        return abs(self.rate - self.predicted_rate) / abs(self.predicted_rate)


def v_nodes(V: float, eps: float):
    """Gauss-Legendre panels of width PANEL_WIDTH on [0, V_eff], V_eff = min(V, where the mollifier dies)."""
    v_eff = V if eps <= 0 else min(V, np.sqrt(GAUSS_CUTOFF / eps))
    n_pan = max(1, int(np.ceil(v_eff / PANEL_WIDTH)))
    edges = np.linspace(0.0, v_eff, n_pan + 1)
    x, w = np.polynomial.legendre.leggauss(PANEL_NODES)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    v = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wv = (half[:, None] * w[None, :]).ravel()
    return v, wv


def im_green_table(r, V: float, eps: float):
    """Im G(1/2 + i v; r) on the v-quadrature nodes, shape (len(v), len(r))."""
    v, wv = v_nodes(V, eps)
    r = np.asarray(r, dtype=float)
    table = np.empty((len(v), len(r)))
    for i, vi in enumerate(v):
        table[i] = green_kernel_fast(0.5 + 1j * vi, r).imag
    return v, wv, table


@dataclass
class PropagatorTable:
    """W(t, r) and its time derivative on a grid of times and distances, spline-interpolated in r."""
    times: np.ndarray
    r: np.ndarray
    sine: np.ndarray  # W(t, r)
    cosine: np.ndarray  # dW/dt (t, r)
    V: float
    eps: float
    splines: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, times, r_min: float, r_max: float, V: float = 40.0, eps: float = 1.0, dr: float = 0.02):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        r = np.linspace(r_min, r_max, int(np.ceil((r_max - r_min) / dr)) + 1)
        v, wv, table = im_green_table(r, V, eps)
        weight = wv * np.exp(-eps * (0.25 + v ** 2))
        sine = -(2 / np.pi) * (np.sin(np.outer(times, v)) * weight) @ table
        cosine = -(2 / np.pi) * (np.cos(np.outer(times, v)) * (v * weight)) @ table
        return cls(times, r, sine, cosine, V, eps)

    def _spline(self, kind, i):
        key = (kind, i)
        if key not in self.splines:
            data = self.sine if kind == "sine" else self.cosine
            self.splines[key] = CubicSpline(self.r, data[i])
        return self.splines[key]

    def __call__(self, kind: str, t_index: int, dist):
        dist = np.asarray(dist, dtype=float)
        if dist.size and (dist.min() < self.r[0] - 1e-12 or dist.max() > self.r[-1] + 1e-12):
            raise DomainError("distance outside the tabulated range")
        return self._spline(kind, t_index)(dist)


def field_radius(t_max: float, eps: float) -> float:
    """Distance beyond which the mollified propagator is negligible at times <= t_max."""
    return t_max + TAIL_SIGMAS * np.sqrt(2 * max(eps, 1e-12)) + 1.0


def wave_field(t, m: HPoint, data: InitialData, V: float, L: int, group: SchottkyGroup,
               table: PropagatorTable | None = None, budget: int = DEFAULT_WORD_BUDGET):
    """u_V(t, m) for an array of times t >= 0 (or a scalar).

    With a positive mollifier width every orbit point within field_radius is
    summed, whatever its word length; with width 0 the words of length <= L enter.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    eps = data.mollifier_width
    radius = field_radius(times.max(), eps) if eps > 0 else np.inf
    groups = []
    for kind, atoms in (("cosine", data.f0_atoms), ("sine", data.f1_atoms)):
        for p, w in atoms:
            if eps > 0:
                dist = hyp_dist_z(m.z, orbit_ball(group, m.z, p.z, radius, budget))
            else:
                dist = np.concatenate([hyp_dist_z(m.z, mobius_image(mats, p.z))
                                       for _, _, mats in word_levels(group, L, budget)])
            if dist.min() < 1e-6:
                raise DomainError("field point lies on the orbit of a data atom")
            groups.append((kind, w, dist))
    if table is None:
        lo = min(g[2].min() for g in groups)
        hi = max(g[2].max() for g in groups)
        table = PropagatorTable.build(times, max(lo - 0.05, 1e-3), hi + 0.05, V, eps)
    index = {float(tt): i for i, tt in enumerate(table.times)}
    out = np.zeros(len(times))
    for i, tt in enumerate(times):
        if float(tt) not in index:
            raise DomainError(f"time {tt} is not in the propagator table")
        j = index[float(tt)]
        for kind, w, dist in groups:
            out[i] += w * table(kind, j, dist).sum()
    return float(out[0]) if np.ndim(t) == 0 else out


def free_sine_kernel(t: float, r):
    """Sine propagator kernel of Delta - 1/4 on the plane: 1{r < t} / (2 pi sqrt(2 (cosh t - cosh r)))."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < abs(t)
    gap = 2 * (np.cosh(abs(t)) - np.cosh(r[inside]))
    out[inside] = np.sign(t) / (2 * np.pi * np.sqrt(gap))
    return out


def decay_fit(samples, deltahat: float, noise_floor: float = 0.0, n: int = 1) -> DecayFit:
    """Least-squares line through (t, log|u|)."""
    t = np.array([s[0] for s in samples], dtype=float)
    u = np.array([s[1] for s in samples], dtype=float)
    if len(t) < 8:
        raise DomainError("decay fit needs at least 8 samples")
    if np.any(np.abs(u) <= 10 * noise_floor) or np.any(u == 0):
        raise DomainError("samples do not clear ten times the noise floor")
    y = np.log(np.abs(u))
    A = np.vstack([t, np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return DecayFit(float(coef[0]), float(coef[1]), (float(t.min()), float(t.max())), res, deltahat - 0.5 * n)


def pairing(data: InitialData, mu: AtomicMeasure, deltahat: float, n: int = 1) -> float:
    """<u_delta, (delta - n/2) f0 + f1> for point-source data."""
    s1 = sum(w * u_delta_z(p.z, mu) for p, w in data.f1_atoms)
    s0 = sum(w * u_delta_z(p.z, mu) for p, w in data.f0_atoms)
    return float(s1 + (deltahat - 0.5 * n) * s0)


def leading_term(m: HPoint, data: InitialData, residue: ResidueEstimate, mu: AtomicMeasure, deltahat: float,
                 n: int = 1):
    """t -> A_X / Gamma(delta - n/2 + 1) e^{-t (n/2 - delta)} <u_delta, (delta - n/2) f0 + f1> u_delta(m).

    The heat mollifier multiplies the term by exp(-eps delta (n - delta)), its value on
    the eigenfunction u_delta.
    """
    coeff = (residue.A_X / gamma_fn(deltahat - 0.5 * n + 1) * pairing(data, mu, deltahat, n)
             * u_delta_z(m.z, mu) * np.exp(-data.mollifier_width * deltahat * (n - deltahat)))
    beta = 0.5 * n - deltahat

    def term(t):
        return coeff * np.exp(-beta * np.asarray(t, dtype=float))

    return term


def remainder_analysis(samples, leading, deltahat: float, n: int = 1) -> dict:
    """Envelope statistic sup |u - leading| e^{(n/2 + delta^2) t} over the sample window."""
    t = np.array([s[0] for s in samples], dtype=float)
    u = np.array([s[1] for s in samples], dtype=float)
    lead = np.asarray(leading(t), dtype=float) if callable(leading) else np.asarray(leading, dtype=float)
    r = u - lead
    env = np.abs(r) * np.exp((0.5 * n + deltahat ** 2) * t)
    scale = env.max()
    return {
        "t": t,
        "remainder": r,
        "envelope": env,
        "sup": float(scale),
        "min": float(env.min()),
        "spread": float((env.max() - env.min()) / scale) if scale > 0 else 0.0,
        "rel_remainder": np.abs(r) / np.where(lead == 0, 1.0, np.abs(lead)),
    }


__all__ = ["InitialData", "DecayFit", "PropagatorTable", "v_nodes", "im_green_table", "field_radius", "wave_field", "free_sine_kernel", "decay_fit", "pairing", "leading_term",
           "remainder_analysis"]
