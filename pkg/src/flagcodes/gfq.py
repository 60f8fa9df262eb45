"""Exact arithmetic over finite fields GF(p^e) and dense matrices over them.

Elements are integers in ``[0, q)``: the little-endian base-``Q`` digits of
an element are its coefficients in the polynomial basis ``1, x, x^2, ...``
over the base field of order ``Q``.  For ``field_make(p, e)`` the base is the
prime field, so the digits are the usual base-``p`` digits.  Towers built with
:func:`extension` use the same rule relative to their (non-prime) base.

All arithmetic goes through precomputed ``add``/``neg``/``mul``/``inv``
tables, which the kernels in :mod:`flagcodes.kernels` consume directly.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import (
    DegreeMismatch,
    DependentBasis,
    NonPrimeCharacteristic,
    ParseError,
    ReducibleModulus,
    ShapeMismatch,
    SingularMatrix,
    TooLarge,
)

# largest field order we tabulate (tables are q x q int64)
MAX_ORDER = 1024


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Split ``q = p**e``; raise :class:`NonPrimeCharacteristic` otherwise."""
    if q < 2:
        raise NonPrimeCharacteristic(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    e, r = 0, q
    while r % p == 0:
        r //= p
        e += 1
    if r != 1:
        raise NonPrimeCharacteristic(f"{q} is not a prime power")
    return p, e


# --- polynomials over a base field, little-endian coefficient lists --------


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], m: Sequence[int], F: "Field") -> list[int]:
    """Remainder of ``a`` modulo the monic polynomial ``m``."""
    a = _trim(list(a))
    dm = len(m) - 1
    while len(a) - 1 >= dm:
        lead = a[-1]
        shift = len(a) - 1 - dm
        nl = F.neg(lead)
        for i, c in enumerate(m):
            a[shift + i] = F.add(a[shift + i], F.mul(nl, c))
        _trim(a)
    return a


def _poly_mulmod(a: Sequence[int], b: Sequence[int], m: Sequence[int], F: "Field") -> list[int]:
    prod = [0] * max(len(a) + len(b) - 1, 0)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y:
                prod[i + j] = F.add(prod[i + j], F.mul(x, y))
    return _poly_mod(prod, m, F)


def _monic_polys(F: "Field", degree: int) -> Iterable[list[int]]:
    """Monic polynomials of one degree, ordered by integer encoding."""
    for low in product(range(F.order), repeat=degree):
        yield list(reversed(low)) + [1]


def is_irreducible(modulus: Sequence[int], F: "Field") -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    deg = len(modulus) - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    for d in range(1, deg // 2 + 1):
        for cand in _monic_polys(F, d):
            if not _poly_mod(modulus, cand, F):
                return False
    return True


def smallest_irreducible(F: "Field", degree: int) -> tuple[int, ...]:
    """The monic irreducible of ``degree`` whose integer encoding is smallest."""
    for cand in _monic_polys(F, degree):
        if is_irreducible(cand, F):
            return tuple(cand)
    raise AssertionError("irreducible polynomials exist in every degree")


class Field:
    """A finite field with tabulated arithmetic on integer encodings.

    Do not construct directly; use :func:`field_make`, :func:`gf` or
    :func:`extension`.
    """

    def __init__(self, p: int, base: "Field | None", modulus: tuple[int, ...] | None):
        self.p = p
        self.base = base
        self.modulus = modulus
        if base is None:
            self.degree = 1
            self.order = p
        else:
            self.degree = len(modulus) - 1
            self.order = base.order ** self.degree
        # extension degree over the prime field
        self.e = 1 if base is None else base.e * self.degree
        if self.order > MAX_ORDER:
            raise TooLarge(f"field order {self.order} exceeds the tabulation limit {MAX_ORDER}")
        self._build_tables()

    # -- construction ----------------------------------------------------
    def _build_tables(self) -> None:
        q = self.order
        x = np.arange(q, dtype=np.int64)
        if self.base is None:
            p = self.p
            self.add_t = (x[:, None] + x[None, :]) % p
            self.neg_t = (-x) % p
            self.mul_t = (x[:, None] * x[None, :]) % p
            self.inv_t = np.array([0] + [pow(int(a), p - 2, p) for a in range(1, p)], dtype=np.int64)
        else:
            B, k = self.base, self.degree
            Q = B.order
            digits = np.stack([(x // Q**i) % Q for i in range(k)], axis=1)
            weights = Q ** np.arange(k, dtype=np.int64)
            self.add_t = (B.add_t[digits[:, None, :], digits[None, :, :]] * weights).sum(axis=2)
            self.neg_t = (B.neg_t[digits] * weights).sum(axis=1)
            exp, log = self._power_tables()
            la = log[1:]
            mul = np.zeros((q, q), dtype=np.int64)
            mul[1:, 1:] = exp[(la[:, None] + la[None, :]) % (q - 1)]
            self.mul_t = mul
            self.inv_t = np.zeros(q, dtype=np.int64)
            self.inv_t[1:] = exp[(-la) % (q - 1)]
        for t in (self.add_t, self.neg_t, self.mul_t, self.inv_t):
            t.setflags(write=False)
        self.tables = (self.add_t, self.neg_t, self.mul_t, self.inv_t)

    def _power_tables(self) -> tuple[np.ndarray, np.ndarray]:
        q, B, m = self.order, self.base, self.modulus
        for g in range(2, q):
            gc = self._digits(g)
            cur = [1]
            seq = [1]
            for _ in range(q - 2):
                cur = _poly_mulmod(cur, gc, m, B)
                seq.append(self._encode(cur))
                if seq[-1] == 1:
                    break
            if len(seq) == q - 1 and len(set(seq)) == q - 1:
                exp = np.array(seq, dtype=np.int64)
                log = np.zeros(q, dtype=np.int64)
                log[exp] = np.arange(q - 1)
                return exp, log
        # q == 2 over a base of order 2 is impossible here (degree >= 2)
        raise AssertionError("no primitive element found")

    def _digits(self, x: int) -> list[int]:
        Q = self.base.order
        return [(x // Q**i) % Q for i in range(self.degree)]

    def _encode(self, coeffs: Sequence[int]) -> int:
        Q = self.base.order
        return sum(int(c) * Q**i for i, c in enumerate(coeffs))

    # -- identity --------------------------------------------------------
    @property
    def key(self) -> tuple:
        return (self.p, None if self.base is None else self.base.key, self.modulus)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Field) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        if self.base is None:
            return f"GF({self.p})"
        return f"GF({self.order})[over {self.base!r}, modulus={list(self.modulus)}]"

    # -- scalar arithmetic on encodings ----------------------------------
    def add(self, a: int, b: int) -> int:
        return int(self.add_t[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.add_t[a, self.neg_t[b]])

    def neg(self, a: int) -> int:
        return int(self.neg_t[a])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_t[a, b])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return int(self.inv_t[a])

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        r = 1
        while k:
            if k & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            k >>= 1
        return r

    # -- elements --------------------------------------------------------
    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(self, value)

    def elements(self) -> list["FieldElement"]:
        return [FieldElement(self, v) for v in range(self.order)]

    def coefficients(self, a: int) -> tuple[int, ...]:
        """Coordinates of ``a`` over the base field in the polynomial basis."""
        if self.base is None:
            return (a,)
        return tuple(self._digits(a))

    def from_coefficients(self, coeffs: Sequence[int]) -> int:
        if self.base is None:
            (c,) = coeffs
            return int(c) % self.p
        if len(coeffs) != self.degree:
            raise DegreeMismatch(f"expected {self.degree} coefficients, got {len(coeffs)}")
        return self._encode(coeffs)


class FieldElement:
    """A field element; thin wrapper around its integer encoding."""

    __slots__ = ("field", "value")

    def __init__(self, field: Field, value: int):
        value = int(value)
        if not 0 <= value < field.order:
            raise ValueError(f"{value} is not an element of {field!r}")
        self.field = field
        self.value = value

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise TypeError("elements of different fields")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else FieldElement(self.field, self.field.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else FieldElement(self.field, self.field.sub(self.value, o))

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else FieldElement(self.field, self.field.mul(self.value, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.field, self.field.mul(self.value, self.field.inv(o)))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __pow__(self, k: int):
        return FieldElement(self.field, self.field.pow(self.value, k))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field, self.value))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.field!r}({self.value})"


@lru_cache(maxsize=None)
def _prime_field(p: int) -> Field:
    return Field(p, None, None)


@lru_cache(maxsize=None)
def _extension_cached(base: Field, modulus: tuple[int, ...]) -> Field:
    return Field(base.p, base, modulus)


def field_make(p: int, e: int = 1, modulus: Sequence[int] | None = None) -> Field:
    """GF(p^e).

    ``modulus`` is the little-endian coefficient list of a monic degree-``e``
    polynomial over GF(p).  Without one, the irreducible polynomial with the
    smallest integer encoding (``sum c_i p^i``) is used.
    """
    if not is_prime(p):
        raise NonPrimeCharacteristic(f"characteristic {p} is not prime")
    if e < 1:
        raise DegreeMismatch("extension degree must be >= 1")
    prime = _prime_field(p)
    if modulus is None:
        if e == 1:
            return prime
        modulus = smallest_irreducible(prime, e)
    modulus = tuple(int(c) % p for c in modulus)
    if len(modulus) - 1 != e or modulus[-1] != 1:
        raise DegreeMismatch(f"modulus must be monic of degree {e}")
    if not is_irreducible(modulus, prime):
        raise ReducibleModulus(f"{list(modulus)} is reducible over GF({p})")
    if e == 1:
        # any monic linear polynomial gives the prime field itself
        return prime
    return _extension_cached(prime, modulus)


def gf(q: int) -> Field:
    """The field of order ``q`` with its default modulus."""
    p, e = prime_power(q)
    return field_make(p, e)


def extension(base: Field, k: int, modulus: Sequence[int] | None = None) -> Field:
    """GF(Q^k) built as polynomials over ``base`` (order Q) modulo an irreducible."""
    if k < 1:
        raise DegreeMismatch("extension degree must be >= 1")
    if k == 1 and modulus is None:
        return base
    if modulus is None:
        modulus = smallest_irreducible(base, k)
    modulus = tuple(int(c) for c in modulus)
    if len(modulus) - 1 != k or modulus[-1] != 1:
        raise DegreeMismatch(f"modulus must be monic of degree {k}")
    if not is_irreducible(modulus, base):
        raise ReducibleModulus(f"{list(modulus)} is reducible over {base!r}")
    return _extension_cached(base, modulus)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


class FieldMatrix:
    """Immutable dense matrix over a :class:`Field`, stored as int64 encodings."""

    __slots__ = ("field", "a")

    def __init__(self, field: Field, data):
        a = np.array(data, dtype=np.int64)
        if a.ndim != 2:
            if a.size == 0:
                a = a.reshape(0, 0)
            else:
                raise ShapeMismatch("matrix data must be two-dimensional")
        if a.size and (a.min() < 0 or a.max() >= field.order):
            raise ValueError(f"entries out of range for {field!r}")
        a.setflags(write=False)
        self.field = field
        self.a = a

    # -- constructors ----------------------------------------------------
    @classmethod
    def _wrap(cls, field: Field, a: np.ndarray) -> "FieldMatrix":
        # trusted path: skips the range check
        obj = cls.__new__(cls)
        a = np.ascontiguousarray(a, dtype=np.int64)
        a.setflags(write=False)
        obj.field = field
        obj.a = a
        return obj

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "FieldMatrix":
        return cls._wrap(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, field: Field, n: int) -> "FieldMatrix":
        return cls._wrap(field, np.eye(n, dtype=np.int64))

    @classmethod
    def random(cls, field: Field, rows: int, cols: int, rng: np.random.Generator) -> "FieldMatrix":
        return cls._wrap(field, rng.integers(0, field.order, size=(rows, cols)))

    @classmethod
    def random_invertible(cls, field: Field, n: int, rng: np.random.Generator) -> "FieldMatrix":
        while True:
            M = cls.random(field, n, n, rng)
            if M.rank() == n:
                return M

    @classmethod
    def block(cls, field: Field, grid: Sequence[Sequence["FieldMatrix"]]) -> "FieldMatrix":
        """Assemble from a grid of blocks (rows of blocks must agree in height)."""
        try:
            a = np.block([[b.a for b in row] for row in grid])
        except ValueError as exc:
            raise ShapeMismatch(str(exc)) from None
        return cls._wrap(field, a)

    # -- shape and access ------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    def __getitem__(self, idx):
        return int(self.a[idx])

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "FieldMatrix":
        """Rows ``r0:r1`` and columns ``c0:c1`` (half-open, 0-based)."""
        if not (0 <= r0 <= r1 <= self.rows and 0 <= c0 <= c1 <= self.cols):
            raise ShapeMismatch(f"block [{r0}:{r1}, {c0}:{c1}] outside {self.shape}")
        return FieldMatrix._wrap(self.field, self.a[r0:r1, c0:c1])

    def hstack(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_field(other)
        if self.rows != other.rows:
            raise ShapeMismatch(f"cannot hstack {self.shape} and {other.shape}")
        return FieldMatrix._wrap(self.field, np.hstack([self.a, other.a]))

    def vstack(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_field(other)
        if self.cols != other.cols:
            raise ShapeMismatch(f"cannot vstack {self.shape} and {other.shape}")
        return FieldMatrix._wrap(self.field, np.vstack([self.a, other.a]))

    @property
    def T(self) -> "FieldMatrix":
        return FieldMatrix._wrap(self.field, self.a.T)

    def transpose(self) -> "FieldMatrix":
        return self.T

    def tolist(self) -> list[list[int]]:
        return self.a.tolist()

    # -- arithmetic ------------------------------------------------------
    def _check_field(self, other: "FieldMatrix") -> None:
        if self.field != other.field:
            raise TypeError("matrices over different fields")

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_field(other)
        if self.shape != other.shape:
            raise ShapeMismatch(f"cannot add {self.shape} and {other.shape}")
        return FieldMatrix._wrap(self.field, self.field.add_t[self.a, other.a])

    def __neg__(self) -> "FieldMatrix":
        return FieldMatrix._wrap(self.field, self.field.neg_t[self.a])

    def __sub__(self, other: "FieldMatrix") -> "FieldMatrix":
        return self + (-other)

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_field(other)
        if self.cols != other.rows:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        F = self.field
        return FieldMatrix._wrap(F, kernels.matmul(self.a, other.a, F.add_t, F.mul_t))

    def scale(self, s: int) -> "FieldMatrix":
        return FieldMatrix._wrap(self.field, self.field.mul_t[int(s), self.a])

    def inverse(self) -> "FieldMatrix":
        n = self.rows
        if n != self.cols:
            raise ShapeMismatch(f"cannot invert non-square {self.shape}")
        aug = np.hstack([self.a, np.eye(n, dtype=np.int64)])
        R, piv = kernels.rref(aug, *self.field.tables)
        if len(piv) < n or piv[n - 1] != n - 1:
            raise SingularMatrix("matrix is singular")
        return FieldMatrix._wrap(self.field, R[:, n:])

    def rref(self) -> tuple["FieldMatrix", int, tuple[int, ...]]:
        return mat_rref(self)

    def rank(self) -> int:
        if self.a.size == 0:
            return 0
        return int(kernels.rank(self.a, *self.field.tables))

    def is_zero(self) -> bool:
        return not self.a.any()

    # -- identity --------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and np.array_equal(self.a, other.a)

    def __hash__(self) -> int:
        return hash((self.field, self.shape, self.a.tobytes()))

    def __repr__(self) -> str:
        return f"FieldMatrix({self.field!r}, {self.a.tolist()})"

    # -- text format -----------------------------------------------------
    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols} {self.field.order}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self.a]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, field: Field | None = None) -> "FieldMatrix":
        lines = [ln for ln in text.strip("\n").splitlines()]
        return cls._from_lines(lines, field)[0]

    @classmethod
    def _from_lines(cls, lines: list[str], field: Field | None, start: int = 0) -> tuple["FieldMatrix", int]:
        """Parse one matrix starting at ``lines[start]``; return it and the next line index."""
        try:
            r, c, q = (int(t) for t in lines[start].split())
        except (ValueError, IndexError):
            raise ParseError(f"bad matrix header at line {start + 1}") from None
        if field is None:
            field = gf(q)
        elif field.order != q:
            raise ParseError(f"matrix over q={q} where GF({field.order}) was expected")
        body = lines[start + 1:start + 1 + r]
        if len(body) != r:
            raise ParseError("truncated matrix")
        try:
            data = [[int(t) for t in ln.split()] for ln in body]
        except ValueError:
            raise ParseError("non-integer matrix entry") from None
        if any(len(row) != c for row in data):
            raise ParseError(f"expected {c} entries per row")
        arr = np.array(data, dtype=np.int64).reshape(r, c)
        try:
            return cls(field, arr), start + 1 + r
        except ValueError as exc:
            raise ParseError(str(exc)) from None


def mat_rref(M: FieldMatrix) -> tuple[FieldMatrix, int, tuple[int, ...]]:
    """Reduced row echelon form, rank and 0-based pivot columns."""
    if M.a.size == 0:
        return M, 0, ()
    R, piv = kernels.rref(M.a, *M.field.tables)
    return FieldMatrix._wrap(M.field, R), len(piv), tuple(int(c) for c in piv)


def regular_representation(alpha: FieldElement, basis: Sequence[FieldElement]) -> FieldMatrix:
    """Matrix of ``v -> v * alpha`` over the base field, in row convention.

    Row ``i`` holds the coordinates of ``basis[i] * alpha`` with respect to
    ``basis``.
    """
    L = alpha.field
    K = L.base
    if K is None:
        raise DegreeMismatch("alpha must live in an extension field")
    k = L.degree
    if len(basis) != k or any(b.field != L for b in basis):
        raise DependentBasis(f"need {k} elements of {L!r}")
    Bm = FieldMatrix._wrap(K, np.array([L.coefficients(b.value) for b in basis], dtype=np.int64))
    try:
        Binv = Bm.inverse()
    except SingularMatrix:
        raise DependentBasis("basis elements are linearly dependent") from None
    img = np.array([L.coefficients(L.mul(b.value, alpha.value)) for b in basis], dtype=np.int64)
    return FieldMatrix._wrap(K, img) @ Binv


def polynomial_basis(L: Field) -> list[FieldElement]:
    """``1, x, ..., x^(k-1)`` of an extension field over its base."""
    Q = L.base.order
    return [FieldElement(L, Q**i) for i in range(L.degree)]
