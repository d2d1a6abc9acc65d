"""Selberg zeta function: Dirichlet series, cycle expansion, transfer determinant, zero search.

Conventions.  Primitive closed geodesics are stored unoriented; each one stands for
two oriented classes (a free group never conjugates a word to its inverse), so the
Euler product runs over oriented classes:

    Z(lam) = prod_gamma prod_k (1 - e^{-(lam + k) l(gamma)})   (oriented gamma).

This is the determinant det(1 - L_lam) of the transfer operator
L_lam f(z) = sum_{letters a, z not in the source disk of a} a'(z)^lam f(a z),
whose traces are sums over periodic words.  With this convention Z is entire and
has a simple zero at the critical exponent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import brentq

from .errors import BudgetError, ConvergenceError, DomainError
from .schottky import DEFAULT_WORD_BUDGET, LengthSpectrum, SchottkyGroup, word_levels

ORIENTATIONS = 2


@dataclass(frozen=True)
class ZetaValue:
    lam: complex
    value: complex
    truncation_bound: float
    method: str

    def __post_init__(self):
        if not np.isfinite(self.truncation_bound):
            raise DomainError("truncation bound must be finite")
        if self.method not in ("dirichlet", "cycle-expansion", "transfer"):
            raise DomainError(f"unknown method {self.method}")


@dataclass(frozen=True)
class ResonanceHit:
    lam: complex
    multiplicity: int
    newton_residual: float
    box: tuple  # (re_min, re_max, im_min, im_max)

    @property
    def box_w(self) -> float:
        return self.box[1] - self.box[0]

    @property
    def box_h(self) -> float:
        return self.box[3] - self.box[2]


@dataclass
class CountingReport:
    radii: list
    counts: list
    strip_counts: list
    fitted_exponents: tuple
    strip: tuple = ()

    def __post_init__(self):
        if any(b < a for a, b in zip(self.counts, self.counts[1:])):
            raise DomainError("counts must be nondecreasing in r")


# Dirichlet series ---------------------------------------------------------------------

def zeta_dirichlet(lam, spectrum: LengthSpectrum, m_max: int, delta_est: float) -> ZetaValue:
    """exp(-sum_gamma sum_m e^{-lam m l}/(m (1 - e^{-m l}))) over oriented primitive classes."""
    lam = complex(lam)
    if lam.real <= delta_est + 0.05:
        raise DomainError(f"Dirichlet series needs Re(lambda) > delta + 0.05 = {delta_est + 0.05}")
    ell = spectrum.lengths
    m = np.arange(1, m_max + 1)[:, None]
    terms = np.exp(-lam * m * ell) / (m * -np.expm1(-m * ell))
    log_z = -ORIENTATIONS * terms.sum()
    # tail in m: geometric in e^{-Re(lam) l}; tail in length: orbit growth e^{delta l}/l
    x = lam.real
    tail_m = ORIENTATIONS * np.sum(np.exp(-x * (m_max + 1) * ell) / ((m_max + 1) * -np.expm1(-ell)
                                                                        * -np.expm1(-x * ell)))
    L = spectrum.complete_below
    gap = x - delta_est
    tail_l = ORIENTATIONS * np.exp(-gap * L) / (gap * max(L, 1.0) * -np.expm1(-ell.min() if len(ell) else -1.0))
    value = np.exp(log_z)
    bound = abs(value) * np.expm1(tail_m + tail_l)
    return ZetaValue(lam, complex(value), float(bound), "dirichlet")


# Periodic words and the cycle expansion ----------------------------------------------------

def cyclic_word_count(p: int, k: int) -> int:
    """Number of cyclically reduced words of length k >= 1 in a free group of rank p."""
    return (2 * p - 1) ** k + 1 + (p - 1) * (1 + (-1) ** k)


def periodic_traces(group: SchottkyGroup, k: int, budget: int = DEFAULT_WORD_BUDGET) -> np.ndarray:
    """|trace| of every cyclically reduced word of length k (non-primitive ones included).

    Each word is split as a prefix of length k//2 and a suffix; traces are block
    matrix products between compatible (first letter, last letter) classes.
    """
    p = group.rank
    P = 2 * p
    if cyclic_word_count(p, k) > budget:
        raise BudgetError(f"{cyclic_word_count(p, k)} periodic words exceed the budget of {budget}")
    letters = group.letter_matrices()
    if k == 1:
        return np.abs(letters[:, 0, 0] + letters[:, 1, 1])
    a, b = k // 2, k - k // 2
    levels = {}
    for kk, codes, mats in word_levels(group, b, budget):
        if kk in (a, b):
            levels[kk] = (codes, mats)
    cu, mu = levels[a]
    cv, mv = levels[b]
    inv = lambda x: (x + p) % P
    out = []
    for fu in range(P):
        for lu in range(P):
            su = (cu[:, 0] == fu) & (cu[:, -1] == lu)
            if not su.any():
                continue
            U = mu[su].reshape(-1, 4)
            for fv in range(P):
                if fv == inv(lu):
                    continue
                for lv in range(P):
                    if lv == inv(fu):
                        continue
                    sv = (cv[:, 0] == fv) & (cv[:, -1] == lv)
                    if not sv.any():
                        continue
                    # tr(UV) = sum_ij U_ij V_ji
                    Vt = mv[sv].transpose(0, 2, 1).reshape(-1, 4)
                    out.append(np.abs(U @ Vt.T).ravel())
    return np.concatenate(out)


@dataclass
class PeriodicData:
    """Compressed periodic-orbit data: for each word length k, distinct lengths and their counts."""
    group: SchottkyGroup
    n_max: int
    lengths: list = field(default_factory=list)
    counts: list = field(default_factory=list)

    @classmethod
    def build(cls, group, n_max, budget=DEFAULT_WORD_BUDGET):
        data = cls(group, n_max)
        for k in range(1, n_max + 1):
            tr = periodic_traces(group, k, budget)
            ell = 2 * np.arccosh(tr / 2)
            # rotations and inversions share a length; merge values equal to ~1e-12 relative
            key = np.round(ell, 11)
            u, cnt = np.unique(key, return_counts=True)
            data.lengths.append(u)
            data.counts.append(cnt.astype(float))
        return data

    def traces(self, lam) -> np.ndarray:
        """t_k(lam) = sum over periodic words of e^{-lam l}/(1 - e^{-l}), k = 1..n_max."""
        return np.array([np.sum(c * np.exp(-lam * u) / -np.expm1(-u))
                         for u, c in zip(self.lengths, self.counts)])


def cycle_coefficients(t) -> list:
    """d_0 = 1, d_N = -(1/N) sum_{k=1}^N t_k d_{N-k}; works for floats or mpmath numbers."""
    d = [t[0] * 0 + 1]
    for N in range(1, len(t) + 1):
        acc = 0
        for k in range(1, N + 1):
            acc += t[k - 1] * d[N - k]
        d.append(-acc / N)
    return d


@lru_cache(maxsize=16)
def _mp_periodic(gens_key, n_max, dps):
    """Exact-arithmetic periodic data for rank-one groups: words g^k and g^-k."""
    with mp.workdps(dps):
        a, b, c, d = [mp.mpf(x) for x in gens_key]
        tr = a + d
        ell0 = 2 * mp.acosh(abs(tr) / 2)
        return [[ell0 * k] for k in range(1, n_max + 1)]


def zeta_cycle(lam, group: SchottkyGroup, N_max: int = 14, periodic: PeriodicData | None = None,
               dps: int | None = None) -> ZetaValue:
    """Cycle expansion sum_{N <= N_max} d_N(lam).

    For rank one the lam-independent coefficients are built once in extended
    precision (dps digits, default 60), since the recursion cancels
    catastrophically left of the critical line when run on numerical values.
    """
    if group.rank == 1:
        g = group.generators[0]
        ell0, c = _rank_one_polynomial((g.a, g.b, g.c, g.d), N_max, dps or 60)
        d = c * np.exp(-complex(lam) * ell0) ** np.arange(N_max + 1)
        return ZetaValue(complex(lam), complex(d.sum()), float(abs(d[-1])), "cycle-expansion")
    if periodic is None or periodic.n_max < N_max:
        periodic = PeriodicData.build(group, N_max)
    t = periodic.traces(complex(lam))[:N_max]
    if dps:
        with mp.workdps(dps):
            d = cycle_coefficients([mp.mpc(x) for x in t])
            return ZetaValue(complex(lam), complex(mp.fsum(d)), float(abs(d[-1])), "cycle-expansion")
    d = cycle_coefficients(list(t))
    return ZetaValue(complex(lam), complex(np.sum(d)), float(abs(d[-1])), "cycle-expansion")


@lru_cache(maxsize=32)
def _rank_one_polynomial(gens_key, n_max, dps):
    """Coefficients c_N with d_N(lam) = c_N x^N, x = exp(-lam ell_0), computed in extended precision.

    Every closed word of a rank-one group is a power of the generator, so the cycle
    expansion is a polynomial in x whose coefficients do not depend on lam.
    """
    ell0 = _mp_periodic(gens_key, 1, dps)[0][0]
    with mp.workdps(dps):
        a = [ORIENTATIONS / (1 - mp.exp(-k * ell0)) for k in range(1, n_max + 1)]
        c = cycle_coefficients(a)
        return float(ell0), np.array([float(v) for v in c])


def zeta_cycle_log(lam, group: SchottkyGroup, N_max: int = 14, dps: int = 60):
    """(log Z, Z'/Z) for the rank-one cycle expansion, evaluated as a polynomial in exp(-lam ell_0)."""
    if group.rank != 1:
        raise DomainError("polynomial log evaluation is only provided for rank one")
    g = group.generators[0]
    ell0, c = _rank_one_polynomial((g.a, g.b, g.c, g.d), N_max, dps)
    x = np.exp(-complex(lam) * ell0)
    powers = x ** np.arange(N_max + 1)
    v = c @ powers
    dv = -ell0 * (np.arange(N_max + 1) * c) @ powers
    return complex(np.log(v)), complex(dv / v)


def cycle_profile(lam, periodic: PeriodicData) -> np.ndarray:
    """log10 |d_N| for N = 1..n_max."""
    d = cycle_coefficients(list(periodic.traces(complex(lam))))
    return np.log10(np.abs(np.array(d[1:])) + 1e-300)


# Transfer operator determinant ---------------------------------------------------------

def _cheb_nodes(M):
    k = np.arange(M)
    return np.cos(np.pi * (2 * k + 1) / (2 * M))


def _bary_weights(M):
    k = np.arange(M)
    return (-1.0) ** k * np.sin(np.pi * (2 * k + 1) / (2 * M))


def _interp_matrix(nodes, weights, pts):
    D = pts[:, None] - nodes[None, :]
    hit = np.abs(D) < 1e-15
    D[hit] = 1.0
    A = weights[None, :] / D
    rows = hit.any(axis=1)
    A[rows] = hit[rows].astype(float)
    return A / A.sum(axis=1, keepdims=True)


def nodes_for_height(im_max: float) -> int:
    return int(32 + math.ceil(1.5 * abs(im_max)))


class TransferDeterminant:
    """det(1 - L_lam) from Chebyshev collocation on the real diameters of the disks.

    Functions on each disk are represented by their values at M Chebyshev points;
    the operator is exact on polynomials of degree < M and converges geometrically
    in M for analytic data.
    """

    def __init__(self, group: SchottkyGroup, nodes: int = 48):
        self.group = group
        self.M = M = int(nodes)
        p = group.rank
        P = 2 * p
        disks = group.letter_disks
        maps = group.letter_maps()
        t, w = _cheb_nodes(M), _bary_weights(M)
        pts = [c + r * t for c, r in disks]
        B = np.zeros((P * M, P * M))
        E = np.zeros((P * M, P * M))
        for j in range(P):
            x = pts[j]
            for a in range(P):
                if a == j:
                    continue
                g = maps[a]
                y = g(x)
                tgt = (a + p) % P
                c, r = disks[tgt]
                block = _interp_matrix(t, w, (y - c) / r)
                rows = slice(j * M, (j + 1) * M)
                cols = slice(tgt * M, (tgt + 1) * M)
                B[rows, cols] = block
                # log a'(x) is real: a'(x) = 1/(cx + d)^2 > 0 on the real line
                E[rows, cols] = -2 * np.log(np.abs(g.c * x + g.d))[:, None]
        self.B, self.E = B, E
        self.mask = B != 0

    def matrix(self, lam) -> np.ndarray:
        A = np.zeros(self.B.shape, dtype=complex)
        A[self.mask] = np.exp(lam * self.E[self.mask]) * self.B[self.mask]
        return A

    def log_value(self, lam) -> complex:
        """log|Z| + i arg Z."""
        A = self.matrix(complex(lam))
        sign, logabs = np.linalg.slogdet(np.eye(len(A)) - A)
        return complex(logabs, np.angle(sign))

    def log_derivative(self, lam) -> complex:
        """Z'/Z = -tr((1 - A)^{-1} A') with A' = E * A entrywise."""
        A = self.matrix(complex(lam))
        I = np.eye(len(A))
        X = np.linalg.solve(I - A, self.E * A)
        return complex(-np.trace(X))

    def evaluate(self, lam):
        """(log Z, Z'/Z) from one LU factorization."""
        lam = complex(lam)
        A = self.matrix(lam)
        lu, piv = lu_factor(np.eye(len(A)) - A, check_finite=False)
        diag = np.diag(lu)
        swaps = np.count_nonzero(piv != np.arange(len(piv)))
        logabs = np.log(np.abs(diag)).sum()
        phase = np.angle(diag).sum() + np.pi * swaps
        X = lu_solve((lu, piv), self.E * A, check_finite=False)
        return complex(logabs, _wrap(phase)), complex(-np.trace(X))

    def value(self, lam) -> ZetaValue:
        lv = self.log_value(lam)
        return ZetaValue(complex(lam), complex(np.exp(lv)), 0.0, "transfer")

    def leading_eigenvalue(self, s: float) -> float:
        ev = np.linalg.eigvals(self.matrix(complex(s)).real)
        return float(ev[np.argmax(np.abs(ev))].real)


def zeta_real_root(group: SchottkyGroup, nodes: int = 48, bracket=(1e-6, 1 - 1e-6)) -> float:
    """Critical exponent as the real zero of Z, i.e. where the leading eigenvalue of L_s equals 1."""
    if group.rank == 1:
        return 0.0
    T = TransferDeterminant(group, nodes)
    return brentq(lambda s: T.leading_eigenvalue(s) - 1.0, *bracket, xtol=1e-14)


# Argument-principle zero search ------------------------------------------------------------

def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


class ZeroFinder:
    """Recursive rectangle subdivision driven by winding numbers of f along box edges.

    evaluate(lam) returns (log|f| + i arg f, f'/f).  An edge segment is accepted
    only when |dz| |f'/f| stays below one radian at both ends and the phase step
    agrees with the derivative prediction, which rules out aliasing of the full
    2 pi swing past a nearby zero.  Samples are cached so sibling boxes share edges.
    """

    def __init__(self, evaluate, grid_step=0.05, min_box=1e-5, max_refine=24,
                 newton_tol=1e-12, jitter=None, cluster_tol=1e-7):
        self.evaluate = evaluate
        self.step = grid_step
        self.min_box = min_box
        self.max_refine = max_refine
        self.newton_tol = newton_tol
        self.cluster_tol = cluster_tol
        self.jitter = jitter if jitter is not None else grid_step / 7
        self.cache = {}
        self.failures = []
        self.evaluations = 0

    def _f(self, lam):
        key = (round(lam.real, 14), round(lam.imag, 14))
        v = self.cache.get(key)
        if v is None:
            v = self.evaluate(complex(lam))
            self.evaluations += 1
            if not (np.isfinite(v[0]) and np.isfinite(v[1])):
                raise ConvergenceError(f"contour passes through a zero near {lam}")
            self.cache[key] = v
        return v

    def _edge_phase(self, z0, z1):
        """Total change of arg f from z0 to z1."""
        n = max(4, int(math.ceil(abs(z1 - z0) / self.step)))
        ts = np.linspace(0.0, 1.0, n + 1)
        vals = [self._f(z0 + (z1 - z0) * t) for t in ts]
        total = 0.0
        stack = [(ta, tb, va, vb, 0) for ta, tb, va, vb in zip(ts[:-1], ts[1:], vals[:-1], vals[1:])][::-1]
        while stack:
            ta, tb, (la, ga), (lb, gb), depth = stack.pop()
            dz = (z1 - z0) * (tb - ta)
            dphi = _wrap(lb.imag - la.imag)
            predicted = (0.5 * (ga + gb) * dz).imag
            ok = (abs(dz) * max(abs(ga), abs(gb)) < 1.0 and abs(dphi) < np.pi / 3
                  and abs(dphi - predicted) < 0.2)
            if not ok:
                if depth >= self.max_refine:
                    raise ConvergenceError("phase unresolved along contour")
                tm = 0.5 * (ta + tb)
                vm = self._f(z0 + (z1 - z0) * tm)
                stack.append((tm, tb, vm, (lb, gb), depth + 1))
                stack.append((ta, tm, (la, ga), vm, depth + 1))
                continue
            total += dphi
        return total

    def winding(self, box) -> float:
        x0, x1, y0, y1 = box
        corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
        total = 0.0
        for a, b in zip(corners, corners[1:] + corners[:1]):
            total += self._edge_phase(a, b)
        return total / (2 * np.pi)

    def _winding_int(self, box):
        w = self.winding(box)
        k = int(round(w))
        if abs(w - k) > 0.1:
            raise ConvergenceError(f"winding {w} not within 0.1 of an integer")
        return k

    def _residual(self, lam, box):
        # |f| at the root relative to the mean of log|f| over the box corners
        x0, x1, y0, y1 = box
        ref = np.mean([self._f(complex(x, y))[0].real for x in (x0, x1) for y in (y0, y1)])
        return float(np.exp(self.evaluate(lam)[0].real - ref))

    def _moments(self, box, samples=96):
        """Zero count and first two power sums from trapezoid rules for f'/f on the circumscribed circle."""
        x0, x1, y0, y1 = box
        c = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        r = 0.55 * math.hypot(x1 - x0, y1 - y0)
        e = np.exp(2j * np.pi * np.arange(samples) / samples)
        g = np.array([self.evaluate(c + r * z)[1] for z in e])
        # with lam = c + r e, dlam = i r e dtheta, so (1/2 pi i) int u^p g dlam is mean(u^p g r e)
        q = g * r * e
        u = r * e
        return np.mean(q), np.mean(u * q), np.mean(u * u * q), c, r

    def _cluster(self, box, k):
        """Location of a k-fold zero cluster in box, or None if it is not a single point."""
        count, s1, s2, c, r = self._moments(box)
        if abs(count - k) > 1e-3:
            return None
        mean = s1 / k
        spread = abs(s2 / k - mean * mean) ** 0.5
        # zeros closer together than cluster_tol are reported as one multiple zero; a
        # single zero has no spread, and the square root would only amplify noise in f'/f
        if k > 1 and spread > self.cluster_tol:
            return None
        lam = c + mean
        if k > 1:
            # Newton stalls in rounding noise at a multiple zero; re-center the moment circle instead
            d = 0.01 * r
            count, s1, _, c2, _ = self._moments((lam.real - d, lam.real + d, lam.imag - d, lam.imag + d))
            return c2 + s1 / k if abs(count - k) < 1e-3 else lam
        polished = self._newton(lam, k, r)
        if polished is not None and abs(polished - lam) < 0.5 * r:
            lam = polished
        return lam

    def _newton(self, lam, k, size):
        start = lam
        for _ in range(40):
            g = self.evaluate(lam)[1]
            step = k / g
            if not np.isfinite(step) or abs(lam - step - start) > size:
                return None if _ == 0 else lam
            lam = lam - step
            if abs(step) < self.newton_tol * max(1.0, abs(lam)):
                break
        return lam

    def _search(self, box, k, out):
        x0, x1, y0, y1 = box
        w, h = x1 - x0, y1 - y0
        size = max(w, h)
        if k == 0:
            return
        if size <= 4 * self.step or size < self.min_box:
            lam = self._cluster(box, k)
            if lam is not None and x0 <= lam.real <= x1 and y0 <= lam.imag <= y1:
                out.append(ResonanceHit(lam, k, self._residual(lam, box), box))
                return
            if size < self.min_box:
                self.failures.append(box)
                return
        # split the longer side slightly off-center so split lines avoid symmetric zeros
        if w >= h:
            xm = x0 + 0.5137 * w
            halves = [(x0, xm, y0, y1), (xm, x1, y0, y1)]
        else:
            ym = y0 + 0.5137 * h
            halves = [(x0, x1, y0, ym), (x0, x1, ym, y1)]
        ks = [self._winding_int(b) for b in halves]
        if sum(ks) != k:
            raise ConvergenceError(f"winding numbers of halves {ks} do not add up to {k}")
        for b, kb in zip(halves, ks):
            self._search(b, kb, out)

    def find(self, rect):
        """Return (hits, total_winding) for the rectangle, jittering its boundary on failure."""
        x0, x1, y0, y1 = rect
        last = None
        for attempt in range(4):
            j = self.jitter * attempt
            box = (x0 - j, x1 + j, y0 - j, y1 + j)
            try:
                k = self._winding_int(box)
                out = []
                self._search(box, k, out)
                return out, k
            except ConvergenceError as err:
                last = err
        raise ConvergenceError(f"zero search failed after 3 jittered retries: {last}")


def with_numeric_derivative(logf, h=1e-6):
    """Wrap a log-evaluator so it also returns f'/f by central differences.

    f itself is differenced, through the ratios f(lam +- h)/f(lam), so the
    estimate stays accurate when lam is closer to a zero than the step.
    """
    def evaluate(lam):
        v = logf(lam)
        step = h * max(1.0, abs(lam))
        a, b = logf(lam + step), logf(lam - step)
        return v, complex(np.exp(a - v) - np.exp(b - v)) / (2 * step)
    return evaluate


def excluded_points(rect, n=1, radius=1e-3):
    """Points of -N_0 and n/2 - N inside the rectangle (where zeros need not be resonances)."""
    x0, x1, y0, y1 = rect
    if not (y0 - radius <= 0 <= y1 + radius):
        return []
    pts = [float(-k) for k in range(0, int(math.ceil(-x0)) + 2)]
    pts += [n / 2 - k for k in range(1, int(math.ceil(n / 2 - x0)) + 2)]
    return sorted(p for p in set(pts) if x0 - radius <= p <= x1 + radius)


def find_zeros(evaluate, rect, grid_step=0.05, **kw):
    """Zeros of f in rect; evaluate(lam) returns (log f, f'/f)."""
    finder = ZeroFinder(evaluate, grid_step, **kw)
    hits, total = finder.find(rect)
    hits.sort(key=lambda h: (h.lam.imag, h.lam.real))
    return hits, total, finder


def find_resonances(group: SchottkyGroup, rect, grid_step: float = 0.05, nodes: int | None = None,
                    n: int = 1, return_masked: bool = False):
    """Zeros of Z in rect with multiplicities; zeros at excluded points are masked out.

    The determinant of the collocated transfer operator is the evaluator; its node
    count grows with the height of the rectangle.
    """
    x0, x1, y0, y1 = rect
    for pt in excluded_points(rect, n):
        on_edge = min(abs(pt - x0), abs(pt - x1)) < 1e-3 or min(abs(y0), abs(y1)) < 1e-3
        if on_edge:
            raise DomainError(f"rectangle boundary passes within 1e-3 of the excluded point {pt}")
    M = nodes or nodes_for_height(max(abs(y0), abs(y1)))
    T = TransferDeterminant(group, M)
    hits, total, finder = find_zeros(T.evaluate, rect, grid_step)
    if finder.failures:
        raise ConvergenceError(f"{len(finder.failures)} boxes did not converge")
    ex = excluded_points(rect, n)
    keep, masked = [], []
    for h in hits:
        if any(abs(h.lam - p) < 1e-3 for p in ex):
            masked.append(h)
        else:
            keep.append(h)
    return (keep, masked) if return_masked else keep


def winding_on_circle(evaluate, center, radius, samples=256):
    """Winding number of f around a circle, refining samples until steps are below pi/3."""
    while True:
        th = 2 * np.pi * np.arange(samples + 1) / samples
        vals = np.array([evaluate(center + radius * np.exp(1j * t))[0].imag for t in th])
        d = _wrap(np.diff(vals))
        if np.abs(d).max() < np.pi / 3 or samples > 8192:
            return d.sum() / (2 * np.pi)
        samples *= 2


# Counting ---------------------------------------------------------------------------------

def _slope(r, c):
    r, c = np.asarray(r, float), np.asarray(c, float)
    ok = c > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(r[ok]), np.log(c[ok]), 1)[0])


def counting_census(hits, deltahat: float, eps: float, radii=None, n: int = 1, tol: float = 1e-8) -> CountingReport:
    """N(r) = #{|lam| <= r}, strip count with Re lam in [-n delta - eps, delta], log-log slopes.

    Strip edges and radii are widened by tol, since located zeros carry rounding error
    and lattice zeros can sit exactly on an edge.
    """
    lam = np.array([h.lam for h in hits], dtype=complex)
    mult = np.array([h.multiplicity for h in hits], dtype=float)
    if radii is None:
        rmax = np.abs(lam).max() if len(lam) else 1.0
        radii = list(np.geomspace(max(rmax / 8, 1e-3), rmax, 8))
    lo, hi = -n * deltahat - eps, deltahat
    in_strip = (lam.real >= lo - tol) & (lam.real <= hi + tol)
    counts = [int(mult[np.abs(lam) <= r + tol].sum()) for r in radii]
    strip = [int(mult[in_strip & (np.abs(lam) <= r + tol)].sum()) for r in radii]
    return CountingReport(list(radii), counts, strip, (_slope(radii, counts), _slope(radii, strip)), (lo, hi))


def strip_count(hits, lo, hi, im_max) -> int:
    return int(sum(h.multiplicity for h in hits if lo < h.lam.real < hi and abs(h.lam.imag) <= im_max))
