"""Rank-metric (MRD) codes and the flag codes built from them.

Every flag code here is the orbit ``Delta_T S`` of the standard flag of type
``T`` under a set ``S`` of upper unitriangular generator matrices, one per
codeword.  Minimum distances are computed two ways: pairwise over the
codebook, and through the rank formula on upper-right blocks of
``g h^-1`` (``group`` mode).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np

from . import kernels
from .errors import (
    EmptyDistance,
    NotAGroup,
    ParameterMismatch,
    ParameterOutOfRange,
    ParseError,
    ShapeMismatch,
    TooLarge,
)
from .flags import Flag, FlagType, flag_from_matrix, grassmann_distance, standard_flag
from .gfq import Field, FieldElement, FieldMatrix, extension, gf, polynomial_basis, regular_representation

# largest codebook we materialise
MAX_CODEWORDS = 2**14
# largest generator set on which group closure is checked
MAX_CLOSURE_CHECK = 2**11

# when set, ebar cross-checks itself against the Grassmann distance on every call
DEBUG_CHECKS = os.environ.get("FLAGCODES_DEBUG_CHECKS", "") not in ("", "0")


def _span(field: Field, basis: np.ndarray) -> np.ndarray:
    """All ``field``-linear combinations of the stacked matrices ``basis`` (dim, r, c)."""
    dim = basis.shape[0]
    q = field.order
    count = q**dim
    if count > MAX_CODEWORDS:
        raise TooLarge(f"{count} codewords exceed the limit {MAX_CODEWORDS}")
    coeffs = np.array(list(product(range(q), repeat=dim)), dtype=np.int64).reshape(count, dim)
    acc = np.zeros((count,) + basis.shape[1:], dtype=np.int64)
    for i in range(dim):
        acc = field.add_t[acc, field.mul_t[coeffs[:, i, None, None], basis[i][None]]]
    return acc


# ---------------------------------------------------------------------------
# rank-metric codes
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MrdCode:
    """A GF(q)-linear space of ``rows x cols`` matrices, given by a basis.

    ``distance`` is the designed minimum rank; :meth:`min_rank` measures it.
    """

    field: Field
    rows: int
    cols: int
    basis: tuple[FieldMatrix, ...]
    distance: int
    kind: str
    params: dict = dc_field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @cached_property
    def codeword_array(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((1, self.rows, self.cols), dtype=np.int64)
        return _span(self.field, np.stack([b.a for b in self.basis]))

    def codewords(self) -> list[FieldMatrix]:
        return [FieldMatrix._wrap(self.field, c) for c in self.codeword_array]

    def __len__(self) -> int:
        return self.field.order**self.dim

    def min_rank(self) -> int:
        """Smallest rank of a nonzero codeword, by exhaustive scan."""
        words = self.codeword_array
        nonzero = words[words.reshape(len(words), -1).any(axis=1)]
        if len(nonzero) == 0:
            raise EmptyDistance("code has no nonzero codeword")
        return int(kernels.batch_rank(np.ascontiguousarray(nonzero), *self.field.tables).min())

    def transpose(self) -> "MrdCode":
        return MrdCode(self.field, self.cols, self.rows, tuple(b.T for b in self.basis),
                       self.distance, self.kind, {**self.params, "transposed": True})

    def pad(self, rows: int, cols: int) -> "MrdCode":
        """Embed in the top-left corner of ``rows x cols`` zero matrices (ranks unchanged)."""
        if rows < self.rows or cols < self.cols:
            raise ShapeMismatch("padding cannot shrink a code")
        out = []
        for b in self.basis:
            a = np.zeros((rows, cols), dtype=np.int64)
            a[:self.rows, :self.cols] = b.a
            out.append(FieldMatrix._wrap(self.field, a))
        return MrdCode(self.field, rows, cols, tuple(out), self.distance, self.kind, {**self.params, "padded": (rows, cols)})


def zero_code(field: Field, rows: int, cols: int) -> MrdCode:
    return MrdCode(field, rows, cols, (), rows + 1, "zero")


def mrd_field_rep(q: int, k: int) -> MrdCode:
    """Regular representation of GF(q^k) on itself: k x k, dimension k, every nonzero word of rank k."""
    if k < 1:
        raise ParameterOutOfRange("k must be >= 1")
    K = gf(q)
    if q**k > MAX_CODEWORDS:
        raise TooLarge(f"{q}^{k} codewords exceed the limit {MAX_CODEWORDS}")
    if k == 1:
        basis = (FieldMatrix.identity(K, 1),)
    else:
        L = extension(K, k)
        pb = polynomial_basis(L)
        basis = tuple(regular_representation(b, pb) for b in pb)
    return MrdCode(K, k, k, basis, k, "field-representation", {"q": q, "k": k})


def mrd_gabidulin(q: int, m: int, length: int, kappa: int) -> MrdCode:
    """Gabidulin code: evaluations of ``sum_{i<kappa} f_i z^(q^i)`` at ``1, x, ..., x^(length-1)``.

    Codewords are ``m x length`` matrices over GF(q); column ``j`` holds the
    coordinates of ``f(x^j)`` in the polynomial basis of GF(q^m).  Minimum rank
    ``length - kappa + 1``, dimension ``m * kappa``.
    """
    if not 1 <= kappa <= length <= m:
        raise ParameterOutOfRange(f"need 1 <= kappa <= length <= m, got kappa={kappa}, length={length}, m={m}")
    K = gf(q)
    L = extension(K, m)
    points = [q**j if m > 1 else 1 for j in range(length)]
    betas = [q**i if m > 1 else 1 for i in range(m)]
    # a degree-1 "extension" is K itself, whose own coefficients are over the prime field
    coords = L.coefficients if m > 1 else (lambda a: [a])
    basis = []
    for i in range(kappa):
        for beta in betas:
            cols = [coords(L.mul(beta, L.pow(g, q**i))) for g in points]
            basis.append(FieldMatrix._wrap(K, np.array(cols, dtype=np.int64).T.reshape(m, length)))
    return MrdCode(K, m, length, tuple(basis), length - kappa + 1, "gabidulin",
                   {"q": q, "m": m, "length": length, "kappa": kappa})


# ---------------------------------------------------------------------------
# flag codes
# ---------------------------------------------------------------------------


class FlagCode:
    """Codewords ``Delta_T g`` for a list of generator matrices ``g``."""

    def __init__(self, field: Field, ftype: FlagType, generators: Sequence[FieldMatrix],
                 construction: str, dim: int, params: dict | None = None):
        self.field = field
        self.n = ftype.n
        self.type = ftype
        self.generators = list(generators)
        self.construction = construction
        self.dim = dim
        self.params = dict(params or {})
        for g in self.generators:
            if g.shape != (self.n, self.n) or g.field != field:
                raise ShapeMismatch("generator of wrong shape or field")

    def __len__(self) -> int:
        return len(self.generators)

    def __repr__(self) -> str:
        return (f"FlagCode({self.construction}, q={self.field.order}, n={self.n}, "
                f"T={self.type.label()}, size={len(self)})")

    @cached_property
    def codebook(self) -> list[Flag]:
        return [flag_from_matrix(g, self.type) for g in self.generators]

    @cached_property
    def bases(self) -> np.ndarray:
        """(N, d_m, n): adapted bases, member ``i`` spanned by the first ``d_i`` rows."""
        dm = self.type.dims[-1] if self.type.dims else 0
        if not self.generators:
            return np.zeros((0, dm, self.n), dtype=np.int64)
        return np.ascontiguousarray(np.stack([g.a[:dm] for g in self.generators]))

    def index_of(self, flag: Flag) -> int:
        return self.codebook.index(flag)

    # -- file format -----------------------------------------------------
    def to_text(self) -> str:
        head = (f"flagcode v1 q={self.field.order} n={self.n} T={self.type.label()} "
                f"construction={self.construction} dim={self.dim}")
        return head + "\n" + "\n".join(g.to_text() for g in self.generators)

    @classmethod
    def from_text(cls, text: str) -> "FlagCode":
        lines = text.splitlines()
        if not lines:
            raise ParseError("empty code file")
        head = lines[0].split()
        if head[:2] != ["flagcode", "v1"]:
            raise ParseError("missing 'flagcode v1' header")
        try:
            kv = dict(tok.split("=", 1) for tok in head[2:])
            q, n, dim = int(kv["q"]), int(kv["n"]), int(kv["dim"])
            dims = tuple(int(t) for t in kv["T"].split(",")) if kv["T"] else ()
            construction = kv["construction"]
        except (KeyError, ValueError):
            raise ParseError(f"bad code header {lines[0]!r}") from None
        field = gf(q)
        ftype = FlagType(n, dims)
        body = [ln for ln in lines[1:] if ln.strip()]
        gens, pos = [], 0
        while pos < len(body):
            M, pos = FieldMatrix._from_lines(body, field, pos)
            if M.shape != (n, n):
                raise ParseError(f"generator of shape {M.shape}, expected ({n}, {n})")
            gens.append(M)
        return cls(field, ftype, gens, construction, dim)


def write_code(code: FlagCode, path) -> None:
    with open(path, "w") as fh:
        fh.write(code.to_text())


def read_code(path) -> FlagCode:
    with open(path) as fh:
        return FlagCode.from_text(fh.read())


def _unitriangular(field: Field, n: int, blocks: Sequence[tuple[int, int, np.ndarray]]) -> FieldMatrix:
    a = np.eye(n, dtype=np.int64)
    for r, c, blk in blocks:
        a[r:r + blk.shape[0], c:c + blk.shape[1]] = blk
    return FieldMatrix._wrap(field, a)


def code_lifted(C: MrdCode, n: int) -> FlagCode:
    """Subspaces with basis ``(I_k | c)``, ``c`` in ``C``; type ``{k}``."""
    k = C.rows
    if C.cols != n - k or not 0 < k < n:
        raise ShapeMismatch(f"a {C.rows}x{C.cols} code does not fit (I_k | c) in dimension {n}")
    gens = [_unitriangular(C.field, n, [(0, k, c)]) for c in C.codeword_array]
    return FlagCode(C.field, FlagType(n, (k,)), gens, "lifted", C.dim, {"mrd": C.kind, **C.params})


def _check_square_mrd(C: MrdCode, side: int, name: str) -> None:
    if C.shape != (side, side) or C.dim != side or C.distance != side:
        raise ParameterMismatch(f"{name} must be {side}x{side} with dimension = distance = {side}")


def sandwich_generator(field: Field, m: int, x: np.ndarray, y: np.ndarray) -> FieldMatrix:
    """``[[u(x), y], [0, u(x)]]`` with ``u(x) = [[I, x], [0, I]]``; size 4m."""
    return _unitriangular(field, 4 * m, [(0, m, x), (2 * m, 3 * m, x), (0, 2 * m, y)])


def code_sandwich(m: int, C_m: MrdCode, C_2m: MrdCode) -> FlagCode:
    """Type ``{m, 2m, 3m}`` in dimension ``4m``; dimension ``3m``, distance ``2m``."""
    _check_square_mrd(C_m, m, "C_m")
    _check_square_mrd(C_2m, 2 * m, "C_2m")
    if C_m.field != C_2m.field:
        raise ParameterMismatch("MRD codes over different fields")
    F = C_m.field
    if F.order ** (3 * m) > MAX_CODEWORDS:
        raise TooLarge("sandwich code too large to materialise")
    gens = [sandwich_generator(F, m, x, y) for x in C_m.codeword_array for y in C_2m.codeword_array]
    return FlagCode(F, FlagType(4 * m, (m, 2 * m, 3 * m)), gens, "sandwich", 3 * m, {"m": m})


def checkerboard_generator(field: Field, xs: Sequence[np.ndarray]) -> FieldMatrix:
    """``u(x_0) = [[1, x_0], [0, 1]]``, ``u(x_0..x_t) = [[u(..x_{t-1}), x_t], [0, u(..x_{t-1})]]``."""
    a = np.array([[1, 0], [0, 1]], dtype=np.int64)
    a[0, 1] = np.asarray(xs[0]).reshape(())
    for x in xs[1:]:
        s = a.shape[0]
        nxt = np.zeros((2 * s, 2 * s), dtype=np.int64)
        nxt[:s, :s] = a
        nxt[s:, s:] = a
        nxt[:s, s:] = x
        a = nxt
    return FieldMatrix._wrap(field, a)


def code_checkerboard(codes: Sequence[MrdCode]) -> FlagCode:
    """Full flags in dimension ``2^(t+1)`` from square MRD codes of sides ``1, 2, ..., 2^t``."""
    if not codes:
        raise ParameterMismatch("need at least one MRD code")
    for i, C in enumerate(codes):
        _check_square_mrd(C, 2**i, f"C_{i}")
    F = codes[0].field
    if any(C.field != F for C in codes):
        raise ParameterMismatch("MRD codes over different fields")
    t = len(codes) - 1
    dim = 2 ** (t + 1) - 1
    if F.order**dim > MAX_CODEWORDS:
        raise TooLarge(f"checkerboard code with t={t} over GF({F.order}) is too large")
    gens = [checkerboard_generator(F, xs) for xs in product(*(C.codeword_array for C in codes))]
    return FlagCode(F, FlagType.full(2 ** (t + 1)), gens, "checkerboard", dim, {"t": t})


def derived_positions(n: int, k: int) -> list[tuple[int, int]]:
    """Free entries of D^(k): upper unitriangular with ``k`` zero superdiagonals."""
    return [(i, j) for i in range(n) for j in range(i + k + 1, n)]


def code_derived(n: int, k: int, q: int) -> FlagCode:
    """Full flags ``Delta_0 g`` for ``g`` in D^(k); distance ``k+1``, dimension ``(n-k)(n-k-1)/2``."""
    if not 0 <= k <= n - 1:
        raise ParameterOutOfRange(f"need 0 <= k <= n-1, got k={k}, n={n}")
    F = gf(q)
    free = derived_positions(n, k)
    if q ** len(free) > MAX_CODEWORDS:
        raise TooLarge(f"{q}^{len(free)} codewords exceed the limit {MAX_CODEWORDS}")
    gens = []
    for vals in product(range(q), repeat=len(free)):
        a = np.eye(n, dtype=np.int64)
        for (i, j), v in zip(free, vals):
            a[i, j] = v
        gens.append(FieldMatrix._wrap(F, a))
    return FlagCode(F, FlagType.full(n), gens, "derived", len(free), {"n": n, "k": k})


def build_code(construction: str, q: int, **params) -> FlagCode:
    """Construct by tag with the default MRD ingredients (used by the CLI)."""
    if construction == "derived":
        return code_derived(params["n"], params["k"], q)
    if construction == "sandwich":
        m = params["m"]
        return code_sandwich(m, mrd_field_rep(q, m), mrd_field_rep(q, 2 * m))
    if construction == "checkerboard":
        return code_checkerboard([mrd_field_rep(q, 2**i) for i in range(params["t"] + 1)])
    if construction == "lifted":
        n, k, kappa = params["n"], params["k"], params.get("kappa", 1)
        if not 0 < k < n:
            raise ParameterOutOfRange("need 0 < k < n")
        if n - k <= k:
            C = mrd_gabidulin(q, k, n - k, kappa)
        else:
            C = mrd_gabidulin(q, n - k, k, kappa).transpose()
        return code_lifted(C, n)
    raise ParameterOutOfRange(f"unknown construction {construction!r}")


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


def _check_block_unitriangular(a: np.ndarray, T: FlagType) -> None:
    n = T.n
    if a.shape != (n, n):
        raise ShapeMismatch(f"need an {n}x{n} matrix")
    edges = (0,) + T.dims + (n,)
    for bi, (r0, r1) in enumerate(zip(edges, edges[1:])):
        if not np.array_equal(a[r0:r1, r0:r1], np.eye(r1 - r0, dtype=np.int64)):
            raise ShapeMismatch("diagonal blocks must be identity matrices")
        if a[r1:, r0:r1].any():
            raise ShapeMismatch("matrix is not block upper triangular for this type")


def ebar(g: FieldMatrix, T: FlagType) -> int:
    """sum_i rank of the upper-right ``d_i x (n - d_i)`` block of ``g``."""
    _check_block_unitriangular(g.a, T)
    F = g.field
    total = 0
    for d in T.dims:
        blk = np.ascontiguousarray(g.a[:d, d:])
        total += int(kernels.rank(blk, *F.tables)) if blk.size else 0
    if DEBUG_CHECKS:
        ref = grassmann_distance(standard_flag(T, F), flag_from_matrix(g, T))
        assert total == ref, (total, ref)
    return total


def _ebar_batch(field: Field, mats: np.ndarray, T: FlagType) -> np.ndarray:
    total = np.zeros(len(mats), dtype=np.int64)
    for d in T.dims:
        blocks = np.ascontiguousarray(mats[:, :d, d:])
        total += kernels.batch_rank(blocks, *field.tables)
    return total


def is_group(gens: Sequence[FieldMatrix]) -> bool:
    """Whether the finite set is closed under ``g h^-1`` (hence a subgroup)."""
    if len(gens) > MAX_CLOSURE_CHECK:
        raise TooLarge(f"closure check limited to {MAX_CLOSURE_CHECK} elements")
    members = set(gens)
    invs = [h.inverse() for h in gens]
    return all(g @ hi in members for g in gens for hi in invs)


def _difference_matrices(code: FlagCode) -> np.ndarray:
    gens = code.generators
    invs = [g.inverse() for g in gens]
    out = [(gens[a] @ invs[b]).a for a in range(len(gens)) for b in range(a + 1, len(gens))]
    return np.stack(out)


def code_min_distance(code: FlagCode, mode: str = "pairwise", strict: bool = False) -> int:
    """Minimum Grassmann distance between distinct codewords.

    ``pairwise`` intersects every pair of codewords.  ``group`` evaluates
    ``ebar`` on the generators: over the non-identity elements when the
    generator set is a group, otherwise over all ``g h^-1`` (which gives the
    same minimum for any set).  With ``strict=True`` a non-closed set raises
    :class:`NotAGroup` instead.
    """
    if len(code) < 2:
        raise EmptyDistance("minimum distance needs at least two codewords")
    if mode == "pairwise":
        d, _, _ = kernels.pairwise_min_distance(code.bases, np.array(code.type.dims, dtype=np.int64),
                                                *code.field.tables)
        return int(d)
    if mode != "group":
        raise ValueError(f"unknown mode {mode!r}")
    for g in code.generators:
        _check_block_unitriangular(g.a, code.type)
    closed = len(code) <= MAX_CLOSURE_CHECK and is_group(code.generators)
    if closed:
        ident = FieldMatrix.identity(code.field, code.n)
        others = np.stack([g.a for g in code.generators if g != ident])
        vals = _ebar_batch(code.field, others, code.type)
        if vals.min() == 0:
            raise NotAGroup("generator group meets the stabiliser of the standard flag")
        return int(vals.min())
    if strict:
        raise NotAGroup("generator set is not closed under g h^-1")
    return int(_ebar_batch(code.field, _difference_matrices(code), code.type).min())
