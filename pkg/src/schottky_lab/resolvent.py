"""Orbit-averaged resolvent kernel and the residue of the resolvent at the critical exponent."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from .dimension import AtomicMeasure, u_delta_z
from .errors import DomainError
from .hyperbolic import HPoint, green_kernel_fast, hyp_dist_z
from .schottky import DEFAULT_WORD_BUDGET, SchottkyGroup, mobius_image, word_levels
from .zeta import TransferDeterminant

DIAGONAL_TOL = 1e-9
DEFAULT_EPS = (0.08, 0.04, 0.02, 0.01)


@dataclass(frozen=True)
class ResolventSum:
    value: complex
    tail_bound: float
    level_sums: np.ndarray  # S_k = sum over words of length exactly k

    def __complex__(self):
        return complex(self.value)


@dataclass
class ResidueEstimate:
    c_values: np.ndarray
    A_X: float
    rank1_defect: float
    fit_diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.rank1_defect <= 1.0 + 1e-12:
            raise DomainError(f"rank-one defect {self.rank1_defect} outside [0, 1]")

    @property
    def spread(self) -> float:
        ratios = np.asarray(self.fit_diagnostics.get("A_pairs", [self.A_X]))
        return float((ratios.max() - ratios.min()) / abs(self.A_X))


def orbit_distances(group: SchottkyGroup, m: HPoint, m2: HPoint, L: int,
                    budget: int = DEFAULT_WORD_BUDGET, skip_identity: bool = False):
    """Distances d(m, w m2) grouped by word length k = 0..L."""
    out = []
    for k, codes, mats in word_levels(group, L, budget):
        if k == 0 and skip_identity:
            out.append(np.empty(0))
            continue
        out.append(hyp_dist_z(m.z, mobius_image(mats, m2.z)))
    return out


def _level_sums(lam, dists):
    return np.array([green_kernel_fast(lam, d).sum() if len(d) else 0.0 for d in dists], dtype=complex)


def resolvent_kernel(lam, m: HPoint, m2: HPoint, L: int, group: SchottkyGroup, deltahat: float,
                     margin: float = 0.02, budget: int = DEFAULT_WORD_BUDGET) -> ResolventSum:
    """Sum of green_kernel(lam, d(m, w m2)) over reduced words of length <= L.

    The tail bound is e^{-(Re lam - deltahat) l_min} with l_min the shortest orbit
    distance at the last level, scaled by the size of the final level sum.
    """
    lam = complex(lam)
    if lam.real <= deltahat + margin:
        raise DomainError(f"orbit sum needs Re(lambda) > {deltahat + margin}, got {lam}")
    dists = orbit_distances(group, m, m2, L, budget)
    dmin = min(d.min() for d in dists)
    if dmin < DIAGONAL_TOL:
        raise DomainError("m lies on the orbit of m2 within the enumerated words")
    S = _level_sums(lam, dists)
    ell_min = float(dists[-1].min())
    tail = float(np.abs(S).max() * np.exp(-(lam.real - deltahat) * ell_min))
    return ResolventSum(complex(S.sum()), tail, S)


def accelerated_sum(level_sums, ratio: float) -> complex:
    """Partial sum plus the geometric tail S_L ratio/(1 - ratio)."""
    S = np.asarray(level_sums)
    if not 0 <= ratio < 1:
        raise DomainError(f"tail ratio {ratio} must lie in [0, 1)")
    return complex(S.sum() + S[-1] * ratio / (1 - ratio))


def richardson(values, factor: float = 2.0):
    """Extrapolate values at steps h, h/factor, h/factor^2, ... to h -> 0 assuming a power series in h.

    Returns (estimate, update sizes per level), the last update serving as the residual.
    """
    row = [complex(v) for v in values]
    updates = []
    j = 1
    while len(row) > 1:
        p = factor ** j
        new = [(p * row[i + 1] - row[i]) / (p - 1) for i in range(len(row) - 1)]
        updates.append(abs(new[-1] - row[-1]))
        row = new
        j += 1
    return row[0], updates


def estimate_A_X(group: SchottkyGroup, mu: AtomicMeasure, deltahat: float, samples, L: int = 12,
                 eps=DEFAULT_EPS, nodes: int = 48, n: int = 1,
                 budget: int = DEFAULT_WORD_BUDGET) -> ResidueEstimate:
    """Residue matrix c_ij of Gamma(lam - n/2 + 1) R(lam; m_i, m_j) at lam = deltahat and the constant A_X.

    F(lam) = (lam - deltahat) Gamma(lam - n/2 + 1) R(lam) is evaluated on the real
    approach lam = deltahat + eps.  Each orbit sum is completed by its geometric tail,
    whose ratio is the leading eigenvalue of the transfer operator at lam, and the
    four values are Richardson-extrapolated to eps = 0.  On the diagonal the identity
    term is dropped: it is analytic in lam and does not contribute to the residue.
    """
    samples = list(samples)
    if len(samples) < 3:
        raise DomainError("estimate_A_X needs at least three sample points")
    T = TransferDeterminant(group, nodes)
    eps = sorted(eps, reverse=True)
    lams = [deltahat + e for e in eps]
    rhos = [T.leading_eigenvalue(s) for s in lams]
    gam = [np.exp(loggamma(s - 0.5 * n + 1)).real for s in lams]
    k = len(samples)
    c = np.zeros((k, k))
    residuals = np.zeros((k, k))
    ratio_err = np.zeros((k, k))
    stabilizing = np.ones((k, k), dtype=bool)
    for i in range(k):
        for j in range(i, k):
            dists = orbit_distances(group, samples[i], samples[j], L, budget, skip_identity=(i == j))
            if min(d.min() for d in dists if len(d)) < DIAGONAL_TOL:
                raise DomainError(f"sample points {i} and {j} lie on a common orbit")
            F = []
            for s, e, rho, g in zip(lams, eps, rhos, gam):
                S = _level_sums(s, dists).real
                F.append(e * g * accelerated_sum(S, rho).real)
                ratio_err[i, j] = max(ratio_err[i, j], abs(S[-1] / S[-2] - rho))
            est, updates = richardson(F, eps[0] / eps[1])
            c[i, j] = c[j, i] = est.real
            residuals[i, j] = residuals[j, i] = updates[-1]
            stabilizing[i, j] = stabilizing[j, i] = all(b <= 0.5 * a for a, b in zip(updates, updates[1:]))
            ratio_err[j, i] = ratio_err[i, j]
    u = np.array([u_delta_z(m.z, mu) for m in samples])
    A_pairs = (c / np.outer(u, u))[np.triu_indices(k)]
    A_X = float(np.median(A_pairs))
    sv = np.linalg.svd(c, compute_uv=False)
    diag = {
        "residuals": residuals,
        "A_pairs": A_pairs,
        "stabilizing": stabilizing,
        "tail_ratio_error": ratio_err,
        "nonconverged": [(int(a), int(b)) for a, b in zip(*np.nonzero(residuals > 0.1 * np.abs(c)))],
        "singular_values": sv,
    }
    return ResidueEstimate(c, A_X, float(sv[1] / sv[0]), diag)


__all__ = ["ResolventSum", "ResidueEstimate", "orbit_distances", "resolvent_kernel",
           "accelerated_sum", "richardson", "estimate_A_X"]
