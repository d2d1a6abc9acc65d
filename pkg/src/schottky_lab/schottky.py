"""Classical Schottky groups acting on the upper half-plane.

Letters are coded internally as integers 0..2p-1: code i < p is generator i and
code i + p is its inverse.  Code a maps the exterior of disk a onto the interior of
disk (a + p) mod 2p, where disks 0..p-1 are the source disks and p..2p-1 the targets.
Public words use signed 1-based generator indices (+k for g_k, -k for its inverse).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import BudgetError, DomainError, SchottkyViolation
from .hyperbolic import HPoint, hyp_dist_z

DEFAULT_WORD_BUDGET = 10 ** 7


@dataclass(frozen=True)
class MoebiusMap:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0:
            raise DomainError(f"orientation-preserving map needs ad - bc > 0, got {det}")
        s = np.sqrt(det)
        for name in "abcd":
            object.__setattr__(self, name, float(getattr(self, name)) / s)

    @classmethod
    def from_matrix(cls, m) -> "MoebiusMap":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __call__(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def derivative(self, z):
        return 1.0 / (self.c * z + self.d) ** 2

    def close_to(self, other: "MoebiusMap", tol=1e-12) -> bool:
        # PSL(2,R): a matrix and its negative are the same map
        m, o = self.matrix, other.matrix
        return min(np.abs(m - o).max(), np.abs(m + o).max()) <= tol


def compose(g: MoebiusMap, h: MoebiusMap) -> MoebiusMap:
    return MoebiusMap.from_matrix(g.matrix @ h.matrix)


def inverse(g: MoebiusMap) -> MoebiusMap:
    return MoebiusMap(g.d, -g.b, -g.c, g.a)


def apply(g: MoebiusMap, m: HPoint) -> HPoint:
    return HPoint.from_complex(complex(g(m.z)))


def translation_length(g, unimodular: bool = False) -> float:
    """2 arccosh(|trace|/2).  Pass unimodular=True for products of determinant-one
    matrices, whose determinant cannot be recomputed accurately once entries are large."""
    m = g.matrix if isinstance(g, MoebiusMap) else np.asarray(g)
    tr = abs(m[0, 0] + m[1, 1])
    if not (unimodular or isinstance(g, MoebiusMap)):
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if not det > 0:
            raise DomainError("matrix must have positive determinant")
        tr /= np.sqrt(det)
    if tr <= 2.0:
        raise DomainError(f"element is not hyperbolic (|trace| = {tr})")
    return float(2.0 * np.arccosh(tr / 2.0))


def generator_from_disks(c_src, r_src, c_dst, r_dst) -> MoebiusMap:
    """Map sending the exterior of D(c_src, r_src) onto the interior of D(c_dst, r_dst).

    z -> c_dst - r_src r_dst / (z - c_src), which reverses orientation of the boundary
    circles and is orientation preserving on the half-plane.
    """
    return MoebiusMap(c_dst, -r_src * r_dst - c_src * c_dst, 1.0, -c_src)


@dataclass(frozen=True)
class Word:
    letters: tuple = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if any(x == 0 for x in letters):
            raise DomainError("letters are nonzero signed generator indices")
        for u, v in zip(letters, letters[1:]):
            if u == -v:
                raise DomainError(f"word {letters} is not reduced")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    def is_cyclically_reduced(self) -> bool:
        return len(self.letters) <= 1 or self.letters[0] != -self.letters[-1]


@dataclass
class SchottkyGroup:
    generators: list
    disks: list
    euler_char: int | None = None
    dk_values: list = field(default_factory=list)

    def __post_init__(self):
        self.generators = list(self.generators)
        self.disks = [(float(c), float(r)) for c, r in self.disks]
        if len(self.disks) != 2 * len(self.generators):
            raise SchottkyViolation("need exactly two disks per generator")
        if self.euler_char is None:
            self.euler_char = 1 - self.rank

    @classmethod
    def from_disk_pairs(cls, pairs, euler_char=None, dk_values=()):
        gens, disks = [], []
        for c1, r1, c2, r2 in pairs:
            if r1 <= 0 or r2 <= 0:
                raise SchottkyViolation(f"disk radius must be positive, got {(r1, r2)}")
            gens.append(generator_from_disks(c1, r1, c2, r2))
            disks += [(c1, r1), (c2, r2)]
        return cls(gens, disks, euler_char, list(dk_values))

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def letter_disks(self):
        """Disks indexed by letter code: source disks first, then target disks."""
        p = self.rank
        return [self.disks[2 * i] for i in range(p)] + [self.disks[2 * i + 1] for i in range(p)]

    def letter_matrices(self) -> np.ndarray:
        mats = [g.matrix for g in self.generators] + [inverse(g).matrix for g in self.generators]
        return np.array(mats)

    def letter_maps(self) -> list:
        return list(self.generators) + [inverse(g) for g in self.generators]

    def code(self, signed: int) -> int:
        return signed - 1 if signed > 0 else -signed - 1 + self.rank

    def signed(self, code: int) -> int:
        return code + 1 if code < self.rank else -(code - self.rank + 1)

    def word_matrix(self, word: Word) -> np.ndarray:
        mats = self.letter_matrices()
        out = np.eye(2)
        for x in word.letters:
            out = out @ mats[self.code(x)]
        return out

    def contraction_bounds(self) -> np.ndarray:
        """kappa[a, b] = max of |letter a'(z)| over the disk that letter b maps into.

        A cyclically reduced word l_1...l_k has length at least
        sum_i -log kappa[l_i, l_{i+1}] (indices mod k).
        """
        P = 2 * self.rank
        disks = self.letter_disks
        maps = self.letter_maps()
        kappa = np.zeros((P, P))
        for a in range(P):
            g = maps[a]
            pole = -g.d / g.c if g.c != 0 else np.inf
            for b in range(P):
                if b == (a + self.rank) % P:
                    kappa[a, b] = np.nan  # a followed by its inverse never occurs
                    continue
                c, r = disks[(b + self.rank) % P]
                # |g'(z)| = 1/(c z + d)^2 is maximal at the disk point nearest the pole
                dist = abs(c - pole) - r
                kappa[a, b] = 1.0 / (g.c * dist) ** 2 if np.isfinite(pole) else 1.0 / g.d ** 2
        return kappa

    def max_contraction(self) -> float:
        return float(np.nanmax(self.contraction_bounds()))


def validate(group: SchottkyGroup, samples: int = 8, tol: float = 1e-9):
    """Return None if the group is a valid classical Schottky configuration, else a report string."""
    disks = group.disks
    for i, (c, r) in enumerate(disks):
        if not (r > 0 and np.isfinite(r) and np.isfinite(c)):
            return f"disk {i} has invalid center/radius ({c}, {r})"
    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            (c1, r1), (c2, r2) = disks[i], disks[j]
            if abs(c1 - c2) <= r1 + r2:
                return f"disks {i} and {j} intersect: centers {c1}, {c2}, radii {r1}, {r2}"
    theta = 2 * np.pi * (np.arange(samples) + 0.5) / samples
    for k, g in enumerate(group.generators):
        (c1, r1), (c2, r2) = disks[2 * k], disks[2 * k + 1]
        # points just outside the source circle must land inside the target disk
        for scale in (1.0, 1.5, 10.0):
            z = c1 + scale * r1 * np.exp(1j * theta)
            w = g(z)
            if np.any(np.abs(w - c2) > r2 * (1 + tol)):
                return f"generator {k + 1} does not map the exterior of disk {2 * k} into disk {2 * k + 1}"
        z = c1 + r1 * np.exp(1j * theta)
        if np.any(np.abs(np.abs(g(z) - c2) - r2) > tol * max(1.0, r2)):
            return f"generator {k + 1} does not map circle {2 * k} onto circle {2 * k + 1}"
    return None


def require_valid(group: SchottkyGroup):
    report = validate(group)
    if report is not None:
        raise SchottkyViolation(report)
    return group


# enumeration --------------------------------------------------------------------

def word_count(p: int, k: int) -> int:
    return 1 if k == 0 else 2 * p * (2 * p - 1) ** (k - 1)


def word_levels(group: SchottkyGroup, L: int, budget: int = DEFAULT_WORD_BUDGET):
    """Yield (k, codes, mats) level by level: codes has shape (N, k), mats (N, 2, 2).

    Words are products letter_1 @ ... @ letter_k, listed in lexicographic order of codes.
    """
    if L < 0:
        raise DomainError("L must be non-negative")
    p = group.rank
    P = 2 * p
    total = sum(word_count(p, k) for k in range(L + 1))
    if total > budget:
        raise BudgetError(f"{total} words exceed the budget of {budget}")
    letters = group.letter_matrices()
    codes = np.zeros((1, 0), dtype=np.int16)
    mats = np.eye(2)[None]
    yield 0, codes, mats
    for k in range(1, L + 1):
        if k == 1:
            nxt = np.arange(P)[None, :].repeat(1, 0)
            allowed = np.ones((1, P), bool)
        else:
            last = codes[:, -1]
            nxt = np.arange(P)[None, :].repeat(len(codes), 0)
            allowed = nxt != ((last + p) % P)[:, None]
        parent = np.nonzero(allowed)[0]
        new_letter = nxt[allowed]
        codes = np.concatenate([codes[parent], new_letter[:, None].astype(np.int16)], axis=1)
        mats = mats[parent] @ letters[new_letter]
        yield k, codes, mats


def enumerate_words(group: SchottkyGroup, L: int, budget: int = DEFAULT_WORD_BUDGET) -> Iterator:
    """Stream (Word, MoebiusMap) over all reduced words of length <= L."""
    for k, codes, mats in word_levels(group, L, budget):
        for row, m in zip(codes, mats):
            yield Word(tuple(group.signed(int(c)) for c in row)), MoebiusMap.from_matrix(m)


def mobius_image(mats, z):
    """Images of z under a stack of unimodular matrices.

    The imaginary part uses Im(z)/|cz+d|^2, which stays accurate when the
    quotient form would cancel for long words.
    """
    a, b, c, d = mats[..., 0, 0], mats[..., 0, 1], mats[..., 1, 0], mats[..., 1, 1]
    den = c * z + d
    re = ((a * z + b) * np.conj(den)).real / np.abs(den) ** 2
    return re + 1j * (np.imag(z) / np.abs(den) ** 2)


def _real_image(mats, x):
    return (mats[..., 0, 0] * x + mats[..., 0, 1]) / (mats[..., 1, 0] * x + mats[..., 1, 1])


def orbit_ball(group: SchottkyGroup, center: complex, source: complex, radius: float,
               budget: int = DEFAULT_WORD_BUDGET) -> np.ndarray:
    """All orbit points w(source) within hyperbolic distance radius of center.

    Every extension of a word w = a_1...a_k sends source into the half-disk over
    D_w = a_1...a_{k-1}(target disk of a_k), so a branch is dropped once that
    half-disk lies farther than radius from center.  source must lie outside
    every Schottky half-disk.
    """
    p = group.rank
    P = 2 * p
    disks = group.letter_disks
    for c, r in disks:
        if abs(source - c) <= r:
            raise DomainError("source point lies inside a Schottky half-disk")
    letters = group.letter_matrices()
    lo = np.array([disks[(a + p) % P][0] - disks[(a + p) % P][1] for a in range(P)])
    hi = np.array([disks[(a + p) % P][0] + disks[(a + p) % P][1] for a in range(P)])
    sinh_r = np.sinh(radius)
    x, h = center.real, center.imag
    out = [np.array([source])]
    mats = np.eye(2)[None]
    last = np.array([-1])
    total = 1
    while len(mats):
        nxt = np.arange(P)[None, :].repeat(len(mats), 0)
        allowed = nxt != np.where(last < 0, -1, (last + p) % P)[:, None]
        parent = np.nonzero(allowed)[0]
        letter = nxt[allowed]
        prefix = mats[parent]
        e1, e2 = _real_image(prefix, lo[letter]), _real_image(prefix, hi[letter])
        c, rho = 0.5 * (e1 + e2), 0.5 * np.abs(e2 - e1)
        gap = ((x - c) ** 2 + h * h - rho ** 2) / (2 * rho * h)
        keep = gap <= sinh_r
        mats = prefix[keep] @ letters[letter[keep]]
        last = letter[keep]
        total += len(mats)
        if total > budget:
            raise BudgetError(f"orbit ball holds more than {budget} candidate words")
        out.append(mobius_image(mats, source))
    pts = np.concatenate(out)
    return pts[hyp_dist_z(center, pts) <= radius]


def orbit_points(group: SchottkyGroup, z, L: int, budget: int = DEFAULT_WORD_BUDGET):
    """Images w(z) for all reduced words of length <= L, grouped as a list per word length."""
    out = []
    for k, codes, mats in word_levels(group, L, budget):
        out.append(mobius_image(mats, z))
    return out


# conjugacy classes ------------------------------------------------------------------

def canonical_form(letters: tuple) -> tuple:
    """Lexicographically least rotation of the word or of its inverse (signed letters)."""
    if not letters:
        return letters
    inv = tuple(-x for x in reversed(letters))
    k = len(letters)
    cands = [letters[i:] + letters[:i] for i in range(k)] + [inv[i:] + inv[:i] for i in range(k)]
    return min(cands)


def is_primitive(letters: tuple) -> bool:
    k = len(letters)
    for q in range(1, k):
        if k % q == 0 and letters == letters[:q] * (k // q):
            return False
    return True


@dataclass(frozen=True)
class ClosedGeodesic:
    word: Word
    length: float
    rotation_angles: tuple = ()

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError("closed geodesic length must be positive")

    def stability(self, m: int = 1) -> float:
        """1 - e^{-m l}: the surface case of det(I - e^{-m l} O^m)."""
        return -np.expm1(-m * self.length)


@dataclass
class LengthSpectrum:
    geodesics: list
    cutoff: float
    complete_below: float

    @property
    def lengths(self) -> np.ndarray:
        return np.array([g.length for g in self.geodesics])

    def __len__(self):
        return len(self.geodesics)


def cyclic_words_by_cost(group: SchottkyGroup, cost_max: float, max_len: int | None = None,
                         budget: int = DEFAULT_WORD_BUDGET):
    """All cyclically reduced words whose derivative-bound cost is <= cost_max.

    Returns (codes list of tuples, matrices).  Every cyclically reduced word with
    translation length <= cost_max is included, since the cost never exceeds the length.
    """
    p = group.rank
    P = 2 * p
    cost = -np.log(group.contraction_bounds())
    cmin = np.nanmin(cost)
    letters = group.letter_matrices()
    found_codes, found_mats = [], []
    visited = 0
    # iterative DFS: (word codes, running cost excluding the closing edge, matrix)
    stack = [((a,), 0.0, letters[a]) for a in reversed(range(P))]
    while stack:
        w, c, m = stack.pop()
        visited += 1
        if visited > budget:
            raise BudgetError(f"length-spectrum search visited more than {budget} words")
        first, last = w[0], w[-1]
        if len(w) == 1 or last != (first + p) % P:
            close = c + (cost[last, first] if len(w) > 1 else cost[last, last])
            if close <= cost_max:
                found_codes.append(w)
                found_mats.append(m)
        if max_len is not None and len(w) >= max_len:
            continue
        for b in reversed(range(P)):
            if b == (last + p) % P:
                continue
            nc = c + cost[last, b]
            # the closing edge costs at least cmin
            if nc + cmin > cost_max:
                continue
            stack.append((w + (b,), nc, m @ letters[b]))
    return found_codes, np.array(found_mats).reshape(-1, 2, 2)


def primitive_geodesics(group: SchottkyGroup, ell_max: float, max_word_len: int | None = None,
                        budget: int = DEFAULT_WORD_BUDGET) -> LengthSpectrum:
    """One canonical primitive closed geodesic per unoriented free-homotopy class with length <= ell_max."""
    codes, mats = cyclic_words_by_cost(group, ell_max, max_word_len, budget)
    out = {}
    for w, m in zip(codes, mats):
        signed = tuple(group.signed(a) for a in w)
        if signed != canonical_form(signed) or not is_primitive(signed):
            continue
        ell = translation_length(m, unimodular=True)
        if ell <= ell_max:
            out[signed] = ell
    geos = [ClosedGeodesic(Word(w), ell) for w, ell in out.items()]
    geos.sort(key=lambda g: (g.length, g.word.letters))
    complete = ell_max
    if max_word_len is not None:
        complete = min(ell_max, max_word_len * -np.log(group.max_contraction()))
    return LengthSpectrum(geos, float(ell_max), float(complete))


def periodic_words(group: SchottkyGroup, k: int, budget: int = DEFAULT_WORD_BUDGET):
    """All cyclically reduced words of length exactly k as (codes, matrices)."""
    p = group.rank
    P = 2 * p
    for kk, codes, mats in word_levels(group, k, budget):
        if kk == k:
            if k == 0:
                return codes, mats
            keep = codes[:, -1] != (codes[:, 0] + p) % P if k > 1 else np.ones(len(codes), bool)
            return codes[keep], mats[keep]
