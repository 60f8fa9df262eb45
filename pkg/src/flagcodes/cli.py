"""Command-line front end: ``flagcodes {perm,code,sim,verify,decode}``.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .channel import (
    NetworkTopology,
    TransmissionConfig,
    butterfly,
    decode_derived_erasure,
    decode_min_distance,
    monte_carlo,
)
from .codes import FlagCode, build_code, code_min_distance, read_code, write_code
from .errors import FlagCodesError, ParseError
from .flags import stuttering_from_text
from .gfq import gf
from .symgrp import depth_histogram, parse_perm, perm_depth, perm_length, perm_sum_of_distances, perm_transposition_length
from .verify import SUITES, run_suites

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(FlagCodesError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# perm
# ---------------------------------------------------------------------------


def cmd_perm(args) -> int:
    if args.perm_cmd == "stats":
        pi = parse_perm(" ".join(args.images))
        print(f"ℓ={perm_length(pi)} depth={perm_depth(pi)} "
              f"ℓ_tr={perm_transposition_length(pi)} s={perm_sum_of_distances(pi)}")
    else:
        print("depth,count")
        for k, c in depth_histogram(args.n).items():
            print(f"{k},{c}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# code
# ---------------------------------------------------------------------------


def _code_params(construction: str, ns) -> dict:
    need = {"derived": ("n", "k"), "sandwich": ("m",), "checkerboard": ("t",), "lifted": ("n", "k")}[construction]
    params = {}
    for key in need:
        val = getattr(ns, key)
        if val is None:
            raise UsageError(f"--{key} is required for the {construction} construction")
        params[key] = val
    if construction == "lifted":
        params["kappa"] = ns.kappa
    return params


def cmd_code(args) -> int:
    if args.code_cmd == "gen":
        code = build_code(args.construction, args.q, **_code_params(args.construction, args))
        if args.output:
            write_code(code, args.output)
            print(f"wrote {len(code)} codewords to {args.output}")
        else:
            sys.stdout.write(code.to_text())
        return EXIT_OK
    code = read_code(args.file)
    d = code_min_distance(code, args.mode)
    print(f"d={d} dim={code.dim} size={len(code)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sim
# ---------------------------------------------------------------------------

_SPEC_INT = {"q", "n", "k", "m", "t", "kappa", "errors_per_step", "target_total", "retry_limit", "trials"}
_SPEC_STR = {"construction", "code", "topology", "mode", "buffering", "receiver", "output"}
_SPEC_OTHER = {"loss_prob", "targeted", "require_rank_condition"}


@dataclass
class ExperimentSpec:
    """Flat ``key=value`` description of a Monte Carlo run."""

    values: dict = field(default_factory=dict)
    base: Path = Path(".")

    @classmethod
    def read(cls, path) -> "ExperimentSpec":
        path = Path(path)
        values = {}
        for lineno, line in enumerate(path.read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in _SPEC_INT | _SPEC_STR | _SPEC_OTHER:
                raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
            if key in _SPEC_INT:
                try:
                    val = int(val)
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: {key} must be an integer") from None
            values[key] = val
        return cls(values, path.parent)

    def _path(self, key: str) -> Path:
        p = Path(self.values[key])
        return p if p.is_absolute() else self.base / p

    def code(self) -> FlagCode:
        if "code" in self.values:
            return read_code(self._path("code"))
        if "construction" not in self.values or "q" not in self.values:
            raise UsageError("spec needs either code=<file> or construction= and q=")
        ns = argparse.Namespace(**{k: self.values.get(k) for k in ("n", "k", "m", "t")},
                                kappa=self.values.get("kappa", 1))
        c = self.values["construction"]
        if c not in ("derived", "sandwich", "checkerboard", "lifted"):
            raise UsageError(f"unknown construction {c!r}")
        return build_code(c, self.values["q"], **_code_params(c, ns))

    def network(self) -> NetworkTopology | None:
        topo = self.values.get("topology", "butterfly")
        if topo == "none":
            return None
        if topo == "butterfly":
            return butterfly()
        return NetworkTopology.read(self._path("topology"))

    def config(self, seed: int) -> TransmissionConfig:
        v = self.values
        targeted = None
        if "targeted" in v:
            try:
                targeted = tuple(tuple(int(x) for x in step.split(":")) for step in v["targeted"].split(","))
            except ValueError:
                raise ParseError("targeted must look like rho:f,rho:f,...") from None
        rank_cond = str(v.get("require_rank_condition", "false")).lower() in ("1", "true", "yes")
        try:
            loss = float(v.get("loss_prob", 0.0))
        except ValueError:
            raise ParseError("loss_prob must be a number") from None
        return TransmissionConfig(
            seed=seed, mode=v.get("mode", "random"), loss_prob=loss,
            errors_per_step=v.get("errors_per_step", 0), targeted=targeted,
            target_total=v.get("target_total"), retry_limit=v.get("retry_limit", 1000),
            buffering=v.get("buffering", "cumulative"), require_rank_condition=rank_cond,
            receiver=v.get("receiver"),
        )


def cmd_sim(args) -> int:
    spec = ExperimentSpec.read(args.spec)
    code = spec.code()
    net = spec.network()
    cfg = spec.config(args.seed)
    trials = args.trials or spec.values.get("trials", 100)
    res = monte_carlo(code, net, cfg, trials)
    out = args.output or (spec._path("output") if "output" in spec.values else None)
    if out:
        res.write_csv(out)
    print(f"trials={res.trials} d={res.min_distance} successes={res.successes} "
          f"rate={res.success_rate:.4f} below_bound={len(res.below_bound)} "
          f"below_bound_failures={res.below_bound_failures} failures={res.trials - res.successes}")
    return EXIT_OK if res.below_bound_failures == 0 else EXIT_VERIFY


# ---------------------------------------------------------------------------
# verify / decode
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    results = run_suites(args.only, args.inject_mutation)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_decode(args) -> int:
    text = Path(args.received).read_text()
    if args.method == "min-distance":
        code = read_code(args.code)
        G = stuttering_from_text(text, code.field)
        res = decode_min_distance(code, G)
        print(f"index={res.index} error_count={res.error_count} unique={str(res.unique).lower()}")
        return EXIT_OK
    G = stuttering_from_text(text, gf(args.q))
    g = decode_derived_erasure(args.n, args.k, args.q, G)
    sys.stdout.write(g.to_text())
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flagcodes", description="Flag codes over finite fields: construction, analysis, simulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    perm = sub.add_parser("perm", help="permutation statistics")
    psub = perm.add_subparsers(dest="perm_cmd", required=True, parser_class=_Parser)
    st = psub.add_parser("stats", help="length, depth, transposition length, sum of distances")
    st.add_argument("images", nargs="+", help="one-line notation, e.g. 4 3 2 1")
    hi = psub.add_parser("hist", help="number of permutations of each depth")
    hi.add_argument("n", type=int)
    perm.set_defaults(func=cmd_perm)

    code = sub.add_parser("code", help="build and analyse flag codes")
    csub = code.add_subparsers(dest="code_cmd", required=True, parser_class=_Parser)
    gen = csub.add_parser("gen", help="write a code file")
    gen.add_argument("--construction", required=True, choices=["lifted", "sandwich", "checkerboard", "derived"])
    gen.add_argument("--q", type=int, required=True)
    for name in ("n", "k", "m", "t"):
        gen.add_argument(f"--{name}", type=int)
    gen.add_argument("--kappa", type=int, default=1, help="message dimension of the Gabidulin code (lifted)")
    gen.add_argument("-o", "--output")
    md = csub.add_parser("mindist", help="minimum distance and dimension of a code file")
    md.add_argument("file")
    md.add_argument("--mode", choices=["pairwise", "group"], default="pairwise")
    code.set_defaults(func=cmd_code)

    sim = sub.add_parser("sim", help="Monte Carlo transmission experiment from a key=value spec")
    sim.add_argument("spec")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--trials", type=int)
    sim.add_argument("-o", "--output")
    sim.set_defaults(func=cmd_sim)

    ver = sub.add_parser("verify", help="run the exhaustive theorem suites")
    ver.add_argument("--only", action="append", choices=list(SUITES))
    ver.add_argument("--inject-mutation", choices=["depth"])
    ver.set_defaults(func=cmd_verify)

    dec = sub.add_parser("decode", help="decode a received stuttering flag")
    dec.add_argument("method", choices=["min-distance", "erasure"])
    dec.add_argument("received", help="stuttering flag file")
    dec.add_argument("--code", help="code file (min-distance)")
    dec.add_argument("--n", type=int)
    dec.add_argument("--k", type=int)
    dec.add_argument("--q", type=int)
    dec.set_defaults(func=cmd_decode)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "decode":
            need = ["code"] if args.method == "min-distance" else ["n", "k", "q"]
            missing = [k for k in need if getattr(args, k) is None]
            if missing:
                raise UsageError(f"decode {args.method} needs --{', --'.join(missing)}")
        return args.func(args)
    except FlagCodesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
