"""Permutations of {1..n} and the statistics that govern flag geometry.

Products follow the right action used on flags: ``(a * b)(i) = b(a(i))``, so
``a`` is applied first.  With this convention the permutation matrices of
:meth:`Permutation.matrix` multiply homomorphically,
``(a * b).matrix() == a.matrix() @ b.matrix()``.
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from itertools import permutations as _itperms
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .errors import DegreeMismatch, DegreeTooLarge, ParseError

HISTOGRAM_MAX_N = 9
DOUBLE_COSET_MAX_N = 8


@dataclass(frozen=True)
class Permutation:
    """One-line notation ``(pi(1), ..., pi(n))``."""

    images: tuple[int, ...]

    def __post_init__(self):
        imgs = tuple(int(x) for x in self.images)
        if sorted(imgs) != list(range(1, len(imgs) + 1)):
            raise ValueError(f"{imgs} is not a permutation of 1..{len(imgs)}")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def transposition(cls, n: int, a: int, b: int) -> "Permutation":
        imgs = list(range(1, n + 1))
        imgs[a - 1], imgs[b - 1] = b, a
        return cls(tuple(imgs))

    @classmethod
    def from_cycle(cls, n: int, cycle: Sequence[int]) -> "Permutation":
        """The cycle ``c0 -> c1 -> ... -> c0``."""
        imgs = list(range(1, n + 1))
        for i, c in enumerate(cycle):
            imgs[c - 1] = cycle[(i + 1) % len(cycle)]
        return cls(tuple(imgs))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return perm_compose(self, other)

    def inverse(self) -> "Permutation":
        return perm_inverse(self)

    def is_identity(self) -> bool:
        return all(x == i for i, x in enumerate(self.images, 1))

    def matrix(self, field) -> "FieldMatrix":
        """Permutation matrix with ``e_j * matrix = e_{pi(j)}`` (rows)."""
        from .gfq import FieldMatrix

        a = np.zeros((self.n, self.n), dtype=np.int64)
        a[np.arange(self.n), np.array(self.images) - 1] = 1
        return FieldMatrix(field, a)

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for start in range(1, self.n + 1):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            j = self(start)
            while j != start:
                cyc.append(j)
                seen.add(j)
                j = self(j)
            out.append(tuple(cyc))
        return out

    # statistics as methods, for convenience
    def length(self) -> int:
        return perm_length(self)

    def depth(self) -> int:
        return perm_depth(self)

    def __str__(self) -> str:
        return format_perm(self)


@dataclass(frozen=True)
class Composition:
    """Block sizes ``(k_1, ..., k_{m+1})`` of a Young subgroup."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(k) for k in self.parts)
        if not parts or any(k < 1 for k in parts):
            raise ValueError(f"composition parts must be positive, got {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    def blocks(self) -> list[range]:
        out, start = [], 1
        for k in self.parts:
            out.append(range(start, start + k))
            start += k
        return out

    def block_of(self) -> list[int]:
        """``block_of()[i-1]`` is the block index containing point ``i``."""
        return [b for b, k in enumerate(self.parts) for _ in range(k)]


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def format_perm(pi: Permutation) -> str:
    return f"{pi.n}: " + " ".join(str(x) for x in pi.images)


def parse_perm(text: str) -> Permutation:
    """Read ``"n: p1 ... pn"`` (the ``n:`` prefix is optional)."""
    text = text.strip()
    n = None
    if ":" in text:
        head, text = text.split(":", 1)
        try:
            n = int(head)
        except ValueError:
            raise ParseError(f"bad degree {head!r}") from None
    try:
        imgs = tuple(int(t) for t in text.split())
    except ValueError:
        raise ParseError(f"non-integer entry in {text!r}") from None
    if n is not None and n != len(imgs):
        raise ParseError(f"declared degree {n} but {len(imgs)} images")
    try:
        return Permutation(imgs)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------


def perm_length(pi: Permutation) -> int:
    """Inversion count: sum over i of #{k <= i : pi(k) > pi(i)}."""
    p = pi.images
    return sum(1 for i in range(len(p)) for k in range(i) if p[k] > p[i])


def _depth_prefix(p: Sequence[int]) -> int:
    n = len(p)
    return sum(1 for i in range(1, n) for k in range(i) if p[k] > i)


def _depth_excedance(p: Sequence[int]) -> int:
    return sum(x - k for k, x in enumerate(p, 1) if x > k)


def perm_depth(pi: Permutation) -> int:
    """sum_{i<n} #{k <= i : pi(k) > i}; cross-checked against sum of excedances."""
    d = _depth_prefix(pi.images)
    assert d == _depth_excedance(pi.images), pi
    return d


def perm_transposition_length(pi: Permutation) -> int:
    """n minus the number of cycles (fixed points included)."""
    return pi.n - len(pi.cycles())


def perm_sum_of_distances(pi: Permutation) -> int:
    return sum(abs(x - k) for k, x in enumerate(pi.images, 1))


def perm_longest(n: int) -> Permutation:
    if n < 1:
        raise ValueError("n must be >= 1")
    return Permutation(tuple(range(n, 0, -1)))


def max_depth(n: int) -> int:
    """depth of the longest element: (n/2)^2 for even n, (n-1)(n+1)/4 for odd n."""
    return (n // 2) ** 2 if n % 2 == 0 else (n - 1) * (n + 1) // 4


def perm_compose(a: Permutation, b: Permutation) -> Permutation:
    """``a`` then ``b``: ``i -> b(a(i))``."""
    if a.n != b.n:
        raise DegreeMismatch(f"degrees {a.n} and {b.n} differ")
    return Permutation(tuple(b.images[x - 1] for x in a.images))


def perm_inverse(pi: Permutation) -> Permutation:
    inv = [0] * pi.n
    for k, x in enumerate(pi.images, 1):
        inv[x - 1] = k
    return Permutation(tuple(inv))


def all_perms(n: int) -> Iterator[Permutation]:
    for p in _itperms(range(1, n + 1)):
        yield Permutation(p)


def perm_array(n: int) -> np.ndarray:
    """All of Sym_n as an (n!, n) int array of one-line notation."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(_itperms(range(1, n + 1))), dtype=np.int64)


def depth_histogram(n: int) -> dict[int, int]:
    """Number of permutations of each depth in Sym_n, by exhaustive enumeration."""
    if n > HISTOGRAM_MAX_N:
        raise DegreeTooLarge(f"histogram limited to n <= {HISTOGRAM_MAX_N}")
    P = perm_array(n)
    k = np.arange(1, n + 1)
    depths = np.clip(P - k, 0, None).sum(axis=1)
    return dict(sorted(Counter(depths.tolist()).items()))


# ---------------------------------------------------------------------------
# Young subgroups and double cosets
# ---------------------------------------------------------------------------


def _check_degree(T: Composition, pi: Permutation) -> None:
    if T.n != pi.n:
        raise DegreeMismatch(f"composition of {T.n} vs permutation of degree {pi.n}")


def young_contains(T: Composition, pi: Permutation) -> bool:
    _check_degree(T, pi)
    blk = T.block_of()
    return all(blk[k - 1] == blk[x - 1] for k, x in enumerate(pi.images, 1))


def young_subgroup(T: Composition) -> list[Permutation]:
    """All elements of the Young subgroup (product of block symmetric groups)."""
    pieces = [list(_itperms(b)) for b in T.blocks()]
    out = []
    for choice in product(*pieces):
        out.append(Permutation(tuple(x for part in choice for x in part)))
    return out


def double_coset(pi: Permutation, T: Composition) -> set[Permutation]:
    """Y pi Y, by breadth-first closure under adjacent transpositions inside blocks."""
    _check_degree(T, pi)
    if pi.n > DOUBLE_COSET_MAX_N:
        raise DegreeTooLarge(f"double cosets limited to n <= {DOUBLE_COSET_MAX_N}")
    gens = [Permutation.transposition(pi.n, i, i + 1) for b in T.blocks() for i in b if i + 1 in b]
    seen = {pi}
    queue = deque([pi])
    while queue:
        w = queue.popleft()
        for s in gens:
            for nxt in (s * w, w * s):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return seen


def min_double_coset_rep(pi: Permutation, T: Composition) -> Permutation:
    """The unique shortest element of Y_T pi Y_T."""
    coset = double_coset(pi, T)
    best = min(perm_length(w) for w in coset)
    reps = [w for w in coset if perm_length(w) == best]
    if len(reps) != 1:
        raise AssertionError(f"double coset of {pi} has {len(reps)} shortest elements")
    return reps[0]
