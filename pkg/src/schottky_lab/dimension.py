"""Critical exponent, atomic Patterson-Sullivan measure and the Patterson eigenfunction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError
from .hyperbolic import BoundaryPoint, HPoint, hyp_dist_z, poisson_kernel
from .schottky import DEFAULT_WORD_BUDGET, SchottkyGroup, mobius_image, word_levels

BASE_POINT = 1j


@dataclass(frozen=True)
class DeltaEstimate:
    value: float
    bracket: tuple
    word_length_used: int
    method: str

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo <= self.value <= hi:
            raise DomainError(f"estimate {self.value} outside its bracket {self.bracket}")

    @property
    def width(self) -> float:
        return self.bracket[1] - self.bracket[0]


@dataclass(frozen=True)
class AtomicMeasure:
    atoms: np.ndarray  # boundary positions, sorted
    weights: np.ndarray
    exponent: float

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if atoms.shape != w.shape:
            raise DomainError("atoms and weights must have equal length")
        if np.any(w < 0):
            raise DomainError("weights must be non-negative")
        if abs(w.sum() - 1) > 1e-12:
            raise DomainError(f"weights sum to {w.sum()}, not 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", w)

    def boundary_points(self):
        return [BoundaryPoint.at(x) for x in self.atoms]

    def mean(self) -> float:
        return float(self.weights @ self.atoms)


def _distances_by_level(group, z, z2, L, budget):
    for k, codes, mats in word_levels(group, L, budget):
        yield k, hyp_dist_z(z, mobius_image(mats, z2))


def poincare_partial(lam, m: HPoint, m2: HPoint, L: int, group: SchottkyGroup,
                     budget: int = DEFAULT_WORD_BUDGET) -> complex:
    """Sum of exp(-lam d(m, w m2)) over reduced words of length <= L."""
    total = 0.0 + 0.0j
    for _, dist in _distances_by_level(group, m.z, m2.z, L, budget):
        total += np.exp(-lam * dist).sum()
    return complex(total)


def level_sums(group, L, budget=DEFAULT_WORD_BUDGET):
    """Return a function s -> [a_0(s), ..., a_L(s)] with a_k(s) = sum_{|w|=k} e^{-s d(o, w o)}."""
    dists = [d for _, d in _distances_by_level(group, BASE_POINT, BASE_POINT, L, budget)]
    dmin = [float(d.min()) for d in dists]

    def a(s):
        # factor out the smallest distance to keep the logs finite for large s
        return [(np.exp(-s * (d - m)).sum(), -s * m) for d, m in zip(dists, dmin)]

    return a


def pressure_root(group, L, budget=DEFAULT_WORD_BUDGET, n=1, tol=1e-10):
    if group.rank == 1:
        # a_k(0) = 2 for every k >= 1, so the level ratio has its root exactly at s = 0
        return 0.0
    a = level_sums(group, L, budget)

    def g(s):
        levels = a(s)
        (x1, e1), (x0, e0) = levels[L], levels[L - 1]
        return np.log(x1) + e1 - np.log(x0) - e0

    lo, hi = 1e-9, n - 1e-9
    if not g(lo) > 0 > g(hi):
        raise ConvergenceError("level-ratio function has no sign change on (0, n)")
    return brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)


def estimate_delta(group: SchottkyGroup, L: int, budget: int = DEFAULT_WORD_BUDGET, n: int = 1) -> DeltaEstimate:
    """Root of log(a_L/a_{L-1}); bracket from the roots at L-2, L-1, L."""
    if L < 4:
        raise DomainError("estimate_delta needs L >= 4")
    if group.rank == 1:
        return DeltaEstimate(0.0, (0.0, 0.0), L, "pressure")
    roots = [pressure_root(group, k, budget, n) for k in (L - 2, L - 1, L)]
    return DeltaEstimate(roots[-1], (min(roots), max(roots)), L, "pressure")


def ps_measure(group: SchottkyGroup, delta: float, L: int, budget: int = DEFAULT_WORD_BUDGET) -> AtomicMeasure:
    """Atoms at the boundary shadows Re(w o) of words of length exactly L.

    Weights are |w'(o)|^delta = Im(w o)^delta, the L-th dual transfer iterate of a
    point mass at o.  This approximates the Euclidean delta-conformal density, for
    which the Poisson integral below is invariant under the group.
    """
    for k, codes, mats in word_levels(group, L, budget):
        if k == L:
            w = mobius_image(mats, BASE_POINT)
    x = w.real
    logw = delta * np.log(w.imag)
    order = np.argsort(x, kind="stable")
    x, logw = x[order], logw[order]
    wt = np.exp(logw - logw.max())
    wt /= wt.sum()
    return AtomicMeasure(x, wt, float(delta))


def u_delta_eval(m: HPoint, mu: AtomicMeasure) -> float:
    """Poisson integral of the atomic measure: sum_j w_j P(m, y_j)^delta."""
    return float(u_delta_z(m.z, mu))


def u_delta_z(z, mu: AtomicMeasure):
    """Vectorized Patterson eigenfunction at complex points z."""
    z = np.asarray(z)
    x, h = z.real[..., None], z.imag[..., None]
    p = h / (h * h + (x - mu.atoms) ** 2)
    return (p ** mu.exponent) @ mu.weights


def f_delta_profile(y: BoundaryPoint, mu: AtomicMeasure) -> float:
    """Boundary profile sum_j w_j |y - y_j|^(-2 delta), with boundary defining factor 1."""
    if y.infinite:
        return 0.0
    dist = np.abs(y.y[0] - mu.atoms)
    if dist.min() < 1e-6:
        raise DomainError("boundary point lies within 1e-6 of an atom")
    return float(mu.weights @ dist ** (-2 * mu.exponent))


def invariance_defect(group: SchottkyGroup, mu: AtomicMeasure, points) -> float:
    """Largest relative change of u_delta under the generators and their inverses."""
    worst = 0.0
    for g in group.letter_maps():
        for m in points:
            u0 = u_delta_z(m.z, mu)
            u1 = u_delta_z(g(m.z), mu)
            worst = max(worst, abs(u1 - u0) / u0)
    return float(worst)


def eigen_residual(mu: AtomicMeasure, m: HPoint, h: float = 1e-3) -> float:
    """Relative residual |Delta u - delta(1-delta) u| / u from the five-point stencil."""
    z = m.z
    f = lambda w: u_delta_z(w, mu)
    lap = -(z.imag ** 2) * (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4 * f(z)) / h ** 2
    s = mu.exponent
    u = f(z)
    return float(abs(lap - s * (1 - s) * u) / u)


__all__ = [
    "DeltaEstimate", "AtomicMeasure", "poincare_partial", "estimate_delta", "ps_measure",
    "u_delta_eval", "u_delta_z", "f_delta_profile", "invariance_defect", "eigen_residual",
    "poisson_kernel",
]
