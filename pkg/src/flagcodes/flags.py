"""Subspaces, flags and distances on the flag variety of GF(q)^n.

Vectors are rows and matrices act on the right, so ``flag.act(g)`` is the
flag of row spaces ``W_i g``.  The Borel subgroup fixing the standard flag
``<e_1> < <e_1, e_2> < ...`` is then the group of invertible lower-triangular
matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import AmbientMismatch, NotFullFlag, ParseError, ShapeMismatch, SingularMatrix, TooLarge, TypeMismatch
from .gfq import Field, FieldMatrix, gf, mat_rref
from .symgrp import Composition, Permutation, min_double_coset_rep, perm_depth, perm_length

CIRCLE_LIMIT = 10**5


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------


class Subspace:
    """Row space of a matrix, kept as its reduced row echelon basis."""

    __slots__ = ("field", "n", "basis", "pivots")

    def __init__(self, basis: FieldMatrix, pivots: tuple[int, ...]):
        # trusted: basis is already RREF with full row rank
        self.field = basis.field
        self.n = basis.cols
        self.basis = basis
        self.pivots = pivots

    @classmethod
    def zero(cls, field: Field, n: int) -> "Subspace":
        return cls(FieldMatrix.zeros(field, 0, n), ())

    @classmethod
    def full(cls, field: Field, n: int) -> "Subspace":
        return cls(FieldMatrix.identity(field, n), tuple(range(n)))

    @property
    def dim(self) -> int:
        return self.basis.rows

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.basis == other.basis

    def __hash__(self) -> int:
        return hash(self.basis)

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, n={self.n}, basis={self.basis.tolist()})"

    def _check(self, other: "Subspace") -> None:
        if self.n != other.n or self.field != other.field:
            raise AmbientMismatch("subspaces live in different ambient spaces")

    def __le__(self, other: "Subspace") -> bool:
        self._check(other)
        return _rank(self.field, np.vstack([other.basis.a, self.basis.a])) == other.dim

    def __add__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return subspace_from_rows(self.basis.vstack(other.basis))

    def __and__(self, other: "Subspace") -> "Subspace":
        return subspace_meet_join(self, other)[0]

    def contains_vector(self, v: Sequence[int]) -> bool:
        v = np.asarray(v, dtype=np.int64).reshape(1, self.n)
        return _rank(self.field, np.vstack([self.basis.a, v])) == self.dim

    def act(self, g: FieldMatrix) -> "Subspace":
        return subspace_from_rows(self.basis @ g)


def _rank(field: Field, a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return int(kernels.rank(a, *field.tables))


def subspace_from_rows(M: FieldMatrix) -> Subspace:
    """Row space of ``M`` in canonical (RREF) form."""
    R, r, piv = mat_rref(M)
    return Subspace(R.submatrix(0, r, 0, M.cols), piv)


def subspace_meet_join(U: Subspace, W: Subspace) -> tuple[Subspace, Subspace]:
    """``(U & W, U + W)``; the intersection comes from the left kernel of [U; W]."""
    U._check(W)
    F, n = U.field, U.n
    total = U.dim + W.dim
    join = subspace_from_rows(U.basis.vstack(W.basis))
    if total == 0:
        return Subspace.zero(F, n), join
    stacked = np.vstack([U.basis.a, W.basis.a])
    aug = np.hstack([stacked, np.eye(total, dtype=np.int64)])
    R, piv = kernels.rref(aug, *F.tables)
    # rows whose left part vanished carry left-kernel vectors (x, y): xU = -yW
    kernel = R[len(piv[piv < n]):, n:]
    if kernel.shape[0] == 0:
        return Subspace.zero(F, n), join
    coeffs = FieldMatrix._wrap(F, kernel[:, :U.dim])
    meet = subspace_from_rows(coeffs @ U.basis)
    return meet, join


# ---------------------------------------------------------------------------
# types and flags
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlagType:
    """Dimension set ``0 < d_1 < ... < d_m < n``."""

    n: int
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise ValueError(f"type dimensions must increase strictly: {dims}")
        if dims and (dims[0] < 1 or dims[-1] > self.n - 1):
            raise ValueError(f"type dimensions must lie in 1..{self.n - 1}: {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def full(cls, n: int) -> "FlagType":
        return cls(n, tuple(range(1, n)))

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def is_full(self) -> bool:
        return self.dims == tuple(range(1, self.n))

    @property
    def composition(self) -> Composition:
        """Block sizes ``(d_1, d_2 - d_1, ..., n - d_m)``."""
        edges = (0,) + self.dims + (self.n,)
        return Composition(tuple(b - a for a, b in zip(edges, edges[1:])))

    @property
    def increments(self) -> tuple[int, ...]:
        """``k_i = d_i - d_{i-1}`` for the members (``d_0 = 0``)."""
        edges = (0,) + self.dims
        return tuple(b - a for a, b in zip(edges, edges[1:]))

    def label(self) -> str:
        return ",".join(str(d) for d in self.dims)


def all_types(n: int) -> list[FlagType]:
    """Every non-empty type in dimension ``n``."""
    out = []
    for mask in range(1, 2 ** (n - 1)):
        out.append(FlagType(n, tuple(d for d in range(1, n) if mask >> (d - 1) & 1)))
    return out


class _Chain:
    """Common storage for flags and stuttering flags: a nested list of subspaces."""

    def __init__(self, members: Sequence[Subspace], field: Field, n: int):
        self.field = field
        self.n = n
        self.members = tuple(members)
        for W in self.members:
            if W.n != n or W.field != field:
                raise AmbientMismatch("members live in different ambient spaces")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(W.dim for W in self.members)

    @property
    def m(self) -> int:
        return len(self.members)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, _Chain):
            return NotImplemented
        return type(self) is type(other) and self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i: int) -> Subspace:
        return self.members[i]

    @cached_property
    def adapted_basis(self) -> np.ndarray:
        """Rows ``x_1, ..., x_{dim W_m}`` whose first ``dim W_i`` rows span ``W_i``."""
        rows: list[np.ndarray] = []
        F = self.field
        for W in self.members:
            for r in W.basis.a:
                if len(rows) == W.dim:
                    break
                cand = np.vstack(rows + [r]) if rows else r[None, :]
                if _rank(F, cand) > len(rows):
                    rows.append(r)
        if not rows:
            return np.zeros((0, self.n), dtype=np.int64)
        return np.vstack(rows)

    def act(self, g: FieldMatrix):
        return type(self)._from_members([W.act(g) for W in self.members], self.field, self.n)

    @classmethod
    def _from_members(cls, members, field, n):
        raise NotImplementedError

    def to_text(self) -> str:
        header = f"{self.n} {self.field.order} T={','.join(str(d) for d in self.dims)}"
        return header + "\n" + "".join(W.basis.to_text() for W in self.members)


class Flag(_Chain):
    """Strictly nested ``W_1 < ... < W_m`` with ``0 < dim W_i < n``."""

    def __init__(self, members: Sequence[Subspace], field: Field | None = None, n: int | None = None):
        members = tuple(members)
        if field is None or n is None:
            if not members:
                raise ValueError("an empty flag needs explicit field and n")
            field, n = members[0].field, members[0].n
        super().__init__(members, field, n)
        self.type = FlagType(n, self.dims)
        for a, b in zip(self.members, self.members[1:]):
            if not a <= b:
                raise ValueError("flag members are not nested")

    @classmethod
    def _from_members(cls, members, field, n):
        return cls(members, field, n)

    def __repr__(self) -> str:
        return f"Flag(n={self.n}, q={self.field.order}, T={self.type.label()})"


class StutteringFlag(_Chain):
    """Weakly nested ``W_1 <= ... <= W_m``; dimensions may repeat, be 0 or n."""

    def __init__(self, members: Sequence[Subspace], field: Field | None = None, n: int | None = None):
        members = tuple(members)
        if field is None or n is None:
            if not members:
                raise ValueError("an empty chain needs explicit field and n")
            field, n = members[0].field, members[0].n
        super().__init__(members, field, n)
        for a, b in zip(self.members, self.members[1:]):
            if not a <= b:
                raise ValueError("stuttering flag members are not weakly nested")

    @classmethod
    def _from_members(cls, members, field, n):
        return cls(members, field, n)

    @classmethod
    def from_flag(cls, flag: Flag) -> "StutteringFlag":
        return cls(flag.members, flag.field, flag.n)

    def __repr__(self) -> str:
        return f"StutteringFlag(n={self.n}, q={self.field.order}, dims={self.dims})"


def _parse_chain(text: str, field: Field | None = None):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty flag file")
    head = lines[0].split()
    try:
        n, q = int(head[0]), int(head[1])
        if not head[2].startswith("T="):
            raise ValueError
        spec = head[2][2:]
        dims = tuple(int(t) for t in spec.split(",")) if spec else ()
    except (ValueError, IndexError):
        raise ParseError(f"bad flag header {lines[0]!r}") from None
    if field is None:
        field = gf(q)
    members, pos = [], 1
    for d in dims:
        M, pos = FieldMatrix._from_lines(lines, field, pos)
        if M.cols != n or M.rows != d:
            raise ParseError(f"member of shape {M.shape}, expected ({d}, {n})")
        S = subspace_from_rows(M)
        if S.basis != M:
            raise ParseError("member matrix is not in reduced row echelon form")
        members.append(S)
    return members, field, n


def flag_from_text(text: str, field: Field | None = None) -> Flag:
    members, field, n = _parse_chain(text, field)
    try:
        return Flag(members, field, n)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def stuttering_from_text(text: str, field: Field | None = None) -> StutteringFlag:
    members, field, n = _parse_chain(text, field)
    try:
        return StutteringFlag(members, field, n)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------


def _prefix_flag(field: Field, g: np.ndarray, dims: Iterable[int], n: int) -> Flag:
    members = [subspace_from_rows(FieldMatrix._wrap(field, g[:d])) for d in dims]
    return Flag(members, field, n)


def standard_flag(T: FlagType, field: Field) -> Flag:
    """``{<e_1..e_d> : d in T}``."""
    return _prefix_flag(field, np.eye(T.n, dtype=np.int64), T.dims, T.n)


def apartment_flag(pi: Permutation, field: Field) -> Flag:
    """``<e_pi(1)> < <e_pi(1), e_pi(2)> < ...``; equals the standard flag times pi's matrix."""
    return _prefix_flag(field, pi.matrix(field).a, range(1, pi.n), pi.n)


def flag_from_matrix(g: FieldMatrix, T: FlagType) -> Flag:
    """The flag ``Delta_T g``: member ``i`` is the span of the first ``d_i`` rows of ``g``."""
    if g.shape != (T.n, T.n):
        raise ShapeMismatch(f"need an {T.n}x{T.n} matrix, got {g.shape}")
    if g.rank() != T.n:
        raise SingularMatrix("flag generator must be invertible")
    return _prefix_flag(g.field, g.a, T.dims, T.n)


def _check_pair(L: _Chain, Lp: _Chain) -> None:
    if L.n != Lp.n or L.field != Lp.field:
        raise AmbientMismatch("flags live in different ambient spaces")


def grassmann_distance(L: Flag, Lp: Flag) -> int:
    """sum_i (d_i - dim(W_i & W'_i))."""
    _check_pair(L, Lp)
    if L.type != Lp.type:
        raise TypeMismatch(f"types {L.dims} and {Lp.dims} differ")
    total = 0
    for W, Wp in zip(L.members, Lp.members):
        total += _rank(L.field, np.vstack([W.basis.a, Wp.basis.a])) - W.dim
    return total


def _require_full(*flags: Flag) -> None:
    for f in flags:
        if not isinstance(f, Flag) or not f.type.is_full:
            raise NotFullFlag("operation needs full flags")


def intersection_dims(D: Flag, Dp: Flag) -> np.ndarray:
    """``I[i, j] = dim(V_i & V'_j)`` for ``0 <= i, j <= n`` (``V_0 = 0``, ``V_n = V``)."""
    _check_pair(D, Dp)
    n, F = D.n, D.field
    X, Y = D.adapted_basis, Dp.adapted_basis
    I = np.zeros((n + 1, n + 1), dtype=np.int64)
    I[n, :] = np.arange(n + 1)
    I[:, n] = np.arange(n + 1)
    if n < 2:
        return I
    idx = [(i, j) for i in range(1, n) for j in range(1, n)]
    stack = np.zeros((len(idx), 2 * n, n), dtype=np.int64)
    for b, (i, j) in enumerate(idx):
        stack[b, :i] = X[:i]
        stack[b, i:i + j] = Y[:j]
    ranks = kernels.batch_rank(stack, *F.tables)
    for (i, j), r in zip(idx, ranks):
        I[i, j] = i + j - r
    return I


def relative_position(D: Flag, Dp: Flag) -> Permutation:
    """Bruhat relative position ``d_W(D, Dp)``.

    ``pi(j) = i`` exactly where the intersection-dimension array jumps; with
    this orientation ``relative_position(Delta_pi, Delta_sigma) == sigma * pi^-1``.
    """
    _require_full(D, Dp)
    I = intersection_dims(D, Dp)
    jump = I[1:, 1:] - I[:-1, 1:] - I[1:, :-1] + I[:-1, :-1]
    rows, cols = np.nonzero(jump)
    if len(rows) != D.n or not np.all(jump[rows, cols] == 1):
        raise AssertionError("intersection array is not a permutation pattern")
    images = [0] * D.n
    for i, j in zip(rows, cols):
        images[j] = int(i) + 1
    return Permutation(tuple(images))


def gallery_distance(D: Flag, Dp: Flag) -> int:
    """Length of the relative position; no gallery is built."""
    return perm_length(relative_position(D, Dp))


def refine(L: Flag) -> Flag:
    """Complete ``L`` to a full flag along the pivot order of its members."""
    F, n = L.field, L.n
    basis = L.adapted_basis
    extra = sorted(set(range(n)) - set(L.members[-1].pivots)) if L.members else list(range(n))
    full = np.vstack([basis, np.eye(n, dtype=np.int64)[extra]]) if extra else basis
    return _prefix_flag(F, full, range(1, n), n)


def partial_relative_position(L: Flag, Lp: Flag) -> Permutation:
    """Minimal double-coset representative of the relative position of refinements."""
    if L.type != Lp.type:
        raise TypeMismatch("flags of different types")
    return min_double_coset_rep(relative_position(refine(L), refine(Lp)), L.type.composition)


# ---------------------------------------------------------------------------
# Bruhat decomposition and circles
# ---------------------------------------------------------------------------


def u_pi_positions(pi: Permutation) -> list[tuple[int, int]]:
    """Free entries ``(a, j)`` (0-based, ``a > j``) of the unipotent group U_pi.

    ``U_pi`` consists of lower unitriangular matrices supported on these
    positions; there are ``length(pi)`` of them.
    """
    inv = pi.inverse().images
    n = pi.n
    return [(a, j) for a in range(n) for j in range(a) if inv[j] > inv[a]]


def bruhat_decompose(A: FieldMatrix) -> tuple[FieldMatrix, Permutation, FieldMatrix]:
    """Write ``A = b @ pi.matrix() @ u`` with ``b`` lower triangular and ``u`` in U_pi.

    Row operations that add earlier rows to later ones (left multiplication by
    lower-triangular matrices) bring ``A`` to a matrix whose row ``r`` ends in
    a 1 at column ``pi(r)`` with zeros in all earlier pivot columns; that matrix
    is ``pi.matrix() @ u``.
    """
    F = A.field
    n = A.rows
    if A.shape != (n, n):
        raise ShapeMismatch("Bruhat decomposition needs a square matrix")
    add, neg, mul, inv = F.tables
    R = A.a.copy()
    Linv = np.eye(n, dtype=np.int64)
    images = [0] * n
    for r in range(n):
        nz = np.flatnonzero(R[r])
        if nz.size == 0:
            raise SingularMatrix("matrix is singular")
        c = int(nz[-1])
        s = inv[R[r, c]]
        R[r] = mul[s, R[r]]
        Linv[r] = mul[s, Linv[r]]
        for i in range(r + 1, n):
            f = R[i, c]
            if f:
                nf = neg[f]
                R[i] = add[R[i], mul[nf, R[r]]]
                Linv[i] = add[Linv[i], mul[nf, Linv[r]]]
        images[r] = c + 1
    pi = Permutation(tuple(images))
    u = np.zeros((n, n), dtype=np.int64)
    u[np.array(images) - 1] = R
    b = FieldMatrix._wrap(F, Linv).inverse()
    return b, pi, FieldMatrix._wrap(F, u)


def circle_enumerate(pi: Permutation, field: Field) -> set[Flag]:
    """All full flags at relative position ``pi`` from the standard flag.

    Parametrised as ``Delta_0 pi u`` with ``u`` running over U_pi.
    """
    n = pi.n
    free = u_pi_positions(pi)
    size = field.order ** len(free)
    if size > CIRCLE_LIMIT:
        raise TooLarge(f"circle has {size} flags (limit {CIRCLE_LIMIT})")
    P = pi.matrix(field)
    out = set()
    for vals in product(range(field.order), repeat=len(free)):
        u = np.eye(n, dtype=np.int64)
        for (a, j), v in zip(free, vals):
            u[a, j] = v
        g = P @ FieldMatrix._wrap(field, u)
        out.add(_prefix_flag(field, g.a, range(1, n), n))
    return out


def all_full_flags(field: Field, n: int) -> list[Flag]:
    """Every full flag of GF(q)^n, by growing chains one vector at a time (tiny n, q)."""
    q = field.order
    vectors = [np.array(v, dtype=np.int64) for v in product(range(q), repeat=n) if any(v)]
    chains: list[list[Subspace]] = [[]]
    for d in range(1, n):
        nxt = []
        for chain in chains:
            prev = chain[-1] if chain else Subspace.zero(field, n)
            seen = set()
            for v in vectors:
                if prev.contains_vector(v):
                    continue
                W = subspace_from_rows(FieldMatrix._wrap(field, np.vstack([prev.basis.a, v[None, :]])))
                if W not in seen:
                    seen.add(W)
                    nxt.append(chain + [W])
        chains = nxt
    return [Flag(c, field, n) for c in chains]


def depth_of_position(D: Flag, Dp: Flag) -> int:
    """depth of the relative position; equals the Grassmann distance on full flags."""
    return perm_depth(relative_position(D, Dp))
