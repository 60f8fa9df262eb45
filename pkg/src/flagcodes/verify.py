"""Desk-scale exhaustive checks of the theorems the library relies on.

Each suite returns a :class:`SuiteResult`.  A deliberate bug can be injected
into the depth statistic (``mutation="depth"``) to confirm the suites notice.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from . import codes as codes_mod
from .flags import (
    FlagType,
    all_full_flags,
    all_types,
    apartment_flag,
    bruhat_decompose,
    circle_enumerate,
    flag_from_matrix,
    gallery_distance,
    grassmann_distance,
    relative_position,
    standard_flag,
)
from .gfq import FieldMatrix, gf
from .symgrp import (
    all_perms,
    depth_histogram,
    max_depth,
    perm_depth,
    perm_length,
    perm_sum_of_distances,
    perm_transposition_length,
)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail} ({self.seconds:.2f}s)"


@dataclass
class Context:
    depth: Callable = perm_depth
    seed: int = 2024

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def suite_lesym(ctx: Context, max_n: int = 7) -> tuple[bool, str]:
    """(l + l_tr)/2 <= depth <= l, depth symmetric under inversion, depth 1 iff l 1, extremes."""
    bad = []
    for n in range(1, max_n + 1):
        top = 0
        for pi in all_perms(n):
            d, l, lt = ctx.depth(pi), perm_length(pi), perm_transposition_length(pi)
            top = max(top, d)
            if not (l + lt <= 2 * d and d <= l):
                bad.append(f"bounds fail at {pi}")
            if d != ctx.depth(pi.inverse()) or perm_sum_of_distances(pi) != 2 * d:
                bad.append(f"symmetry fails at {pi}")
            if (d == 1) != (l == 1):
                bad.append(f"depth 1 / length 1 mismatch at {pi}")
            if len(bad) > 5:
                break
        if top != max_depth(n):
            bad.append(f"max depth {top} != {max_depth(n)} for n={n}")
        hist = depth_histogram(n)
        if n % 2 == 0 and hist[max_depth(n)] != math.factorial(n // 2) ** 2:
            bad.append(f"T({n},{max_depth(n)}) = {hist[max_depth(n)]}")
    return not bad, "; ".join(bad[:3]) or f"all permutations n <= {max_n}"


def suite_depth_distance(ctx: Context, qs=(2, 3), max_n: int = 4) -> tuple[bool, str]:
    """E(D0, D_pi) = depth(pi), gallery = length, relative position of apartments = sigma pi^-1."""
    bad = 0
    for q in qs:
        F = gf(q)
        for n in range(2, max_n + 1):
            perms = list(all_perms(n))
            flags = {pi: apartment_flag(pi, F) for pi in perms}
            D0 = standard_flag(FlagType.full(n), F)
            for pi in perms:
                bad += grassmann_distance(D0, flags[pi]) != ctx.depth(pi)
                bad += gallery_distance(D0, flags[pi]) != perm_length(pi)
            for pi in perms:
                for sigma in perms:
                    bad += relative_position(flags[pi], flags[sigma]) != sigma * pi.inverse()
    return bad == 0, f"{bad} mismatches over apartments, n <= {max_n}"


def suite_dE(ctx: Context, qs=(2,), max_n: int = 4, samples: int = 200) -> tuple[bool, str]:
    """2E > d_G >= E for distinct full flags (apartments exhaustively, plus random pairs)."""
    bad = 0
    for q in qs:
        F = gf(q)
        for n in range(2, max_n + 1):
            flags = [apartment_flag(pi, F) for pi in all_perms(n)]
            for A, B in combinations(flags, 2):
                E, dG = grassmann_distance(A, B), gallery_distance(A, B)
                bad += not (2 * E > dG >= E)
    rng = ctx.rng()
    for _ in range(samples):
        n = int(rng.integers(2, 6))
        F = gf(int(rng.choice([2, 3])))
        T = FlagType.full(n)
        A = flag_from_matrix(FieldMatrix.random_invertible(F, n, rng), T)
        B = flag_from_matrix(FieldMatrix.random_invertible(F, n, rng), T)
        if A == B:
            continue
        E, dG = grassmann_distance(A, B), gallery_distance(A, B)
        bad += not (2 * E > dG >= E)
        bad += E != ctx.depth(relative_position(A, B))
    return bad == 0, f"{bad} violations"


def suite_circles(ctx: Context, qs=(2, 3), n: int = 3) -> tuple[bool, str]:
    """|{D : d_W(D0, D) = pi}| = q^l(pi), both by construction and by classifying all flags."""
    bad = []
    for q in qs:
        F = gf(q)
        D0 = standard_flag(FlagType.full(n), F)
        counts: dict = {}
        for D in all_full_flags(F, n):
            p = relative_position(D0, D)
            counts[p] = counts.get(p, 0) + 1
        for pi in all_perms(n):
            want = q ** perm_length(pi)
            if counts.get(pi, 0) != want or len(circle_enumerate(pi, F)) != want:
                bad.append(f"q={q} pi={pi}")
    return not bad, ", ".join(bad) or f"n={n}, q in {tuple(qs)}"


def suite_bruhat(ctx: Context, samples: int = 300) -> tuple[bool, str]:
    rng = ctx.rng()
    bad = 0
    for _ in range(samples):
        F = gf(int(rng.choice([2, 3])))
        n = int(rng.integers(1, 6))
        A = FieldMatrix.random_invertible(F, n, rng)
        b, pi, u = bruhat_decompose(A)
        bad += b @ pi.matrix(F) @ u != A
        if n > 1:
            T = FlagType.full(n)
            bad += relative_position(standard_flag(T, F), flag_from_matrix(A, T)) != pi
    return bad == 0, f"{bad} mismatches in {samples} samples"


def suite_params(ctx: Context) -> tuple[bool, str]:
    """Sizes, dimensions and minimum distances of the constructions, both engines."""
    cases = [
        (codes_mod.code_lifted(codes_mod.mrd_field_rep(2, 2), 4), 2, 2),
        (codes_mod.build_code("sandwich", 2, m=1), 3, 2),
        (codes_mod.build_code("sandwich", 3, m=1), 3, 2),
        (codes_mod.build_code("checkerboard", 2, t=1), 3, 2),
        (codes_mod.build_code("checkerboard", 2, t=2), 7, 4),
        (codes_mod.code_derived(4, 1, 2), 3, 2),
        (codes_mod.code_derived(5, 1, 2), 6, 2),
        (codes_mod.code_derived(5, 2, 2), 3, 3),
        (codes_mod.code_derived(6, 2, 2), 6, 3),
    ]
    bad = []
    for code, dim, d in cases:
        q = code.field.order
        dp = codes_mod.code_min_distance(code, "pairwise")
        dg = codes_mod.code_min_distance(code, "group")
        if len(code) != q**dim or code.dim != dim or dp != d or dg != d:
            bad.append(f"{code}: size={len(code)} dim={code.dim} pairwise={dp} group={dg}")
    return not bad, "; ".join(bad) or f"{len(cases)} constructions"


def suite_mrd(ctx: Context) -> tuple[bool, str]:
    bad = []
    for q, k in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (4, 1), (4, 2)]:
        if codes_mod.mrd_field_rep(q, k).min_rank() != k:
            bad.append(f"field rep q={q} k={k}")
    for q, m, ln, kappa in [(2, 2, 2, 1), (2, 3, 3, 1), (2, 3, 3, 2), (2, 3, 2, 1), (2, 4, 4, 2), (3, 2, 2, 1), (2, 4, 3, 3)]:
        C = codes_mod.mrd_gabidulin(q, m, ln, kappa)
        if C.min_rank() != ln - kappa + 1:
            bad.append(f"gabidulin q={q} m={m} n'={ln} kappa={kappa}")
    return not bad, ", ".join(bad) or "all MRD oracles"


def random_block_unitriangular(F, T: FlagType, rng: np.random.Generator) -> FieldMatrix:
    n = T.n
    a = np.eye(n, dtype=np.int64)
    edges = (0,) + T.dims + (n,)
    for r0, r1 in zip(edges, edges[1:]):
        a[r0:r1, r1:] = rng.integers(0, F.order, size=(r1 - r0, n - r1))
    return FieldMatrix._wrap(F, a)


def suite_ebar(ctx: Context, samples: int = 300) -> tuple[bool, str]:
    rng = ctx.rng()
    bad = 0
    for _ in range(samples):
        F = gf(int(rng.choice([2, 3])))
        n = int(rng.integers(2, 7))
        types = all_types(n)
        T = types[int(rng.integers(0, len(types)))]
        g = random_block_unitriangular(F, T, rng)
        bad += codes_mod.ebar(g, T) != grassmann_distance(standard_flag(T, F), flag_from_matrix(g, T))
    return bad == 0, f"{bad} mismatches in {samples} samples"


SUITES: dict[str, Callable[[Context], tuple[bool, str]]] = {
    "lesym": suite_lesym,
    "dE": suite_dE,
    "Edepth": suite_depth_distance,
    "circles": suite_circles,
    "bruhat": suite_bruhat,
    "params": suite_params,
    "mrd": suite_mrd,
    "ebar": suite_ebar,
}


def mutated_context(mutation: str | None) -> Context:
    if mutation is None:
        return Context()
    if mutation == "depth":
        return Context(depth=lambda pi: perm_depth(pi) + 1)
    raise ValueError(f"unknown mutation {mutation!r}")


def run_suites(only=None, mutation: str | None = None) -> list[SuiteResult]:
    names = list(SUITES) if not only else list(only)
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    ctx = mutated_context(mutation)
    out = []
    for name in names:
        t0 = time.perf_counter()
        try:
            ok, detail = SUITES[name](ctx)
        except AssertionError as exc:
            ok, detail = False, f"assertion failed: {exc}"
        out.append(SuiteResult(name, ok, detail, time.perf_counter() - t0))
    return out
