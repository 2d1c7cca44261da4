"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 for usage, I/O and parse errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

from . import __version__
from .clifford import CliffordAlgebra, graded_piece_count, rank_stabilization_table, GradedCliffordAlgebra
from .exactalg import Field, FieldError, FieldTooSmall, Matrix
from .linsys import GeneralPositionError, LinearSystem, base_locus_sample, clifford_complex_exact_at, discriminant, double_cover_report, strata_scan
from .quadforms import (
    NotSplit,
    NotSupported,
    QuadraticSpace,
    SystemFormatError,
    isotropic_completions,
    random_isotropic,
    random_system,
    same_family,
)
from .spinor import (
    MatrixFactorizationPair,
    build_ideal,
    lemma_iso_maps,
    lemma_scalar,
    mf_check,
    module_hom_dim,
    ses_check,
)

SUITES = ("mf", "lemma", "ses", "hom", "ranks", "ideal-dims", "complex")
DEFAULT_TRIALS = {"mf": 20, "lemma": 10, "ses": 5, "hom": 5, "ranks": 1, "ideal-dims": 1, "complex": 5}
EXIT_OK, EXIT_MATH, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


def default_field() -> str:
    return os.environ.get("QF_DEFAULT_FIELD", "fp:10007")


def dumps(obj, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def load_system(path: str) -> tuple[LinearSystem, str]:
    """Read and validate a system file; returns it with the sha256 of the bytes."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return LinearSystem.from_json(raw), hashlib.sha256(raw).hexdigest()


def meta(command: str, seed, field: str, n: int, m: int, input_hash: str | None) -> dict:
    return {
        "command": command,
        "seed": seed,
        "field": field,
        "n": n,
        "m": m,
        "input_hash": input_hash,
        "version": __version__,
    }


def write_out(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror}") from None


def write_manifest(path: str | None, info: dict, started: float):
    if path is None:
        return
    write_out(dumps({**info, "wall_time": round(time.time() - started, 6)}, pretty=True), path)


# ---------------------------------------------------------------------------
# verification suites; each case is a pure function of (system, seed, index)


def _rng(suite: str, seed: int, index: int) -> random.Random:
    return random.Random(f"{suite}:{seed}:{index}")


def _fmt(field: Field, x) -> str:
    return field.to_str(x)


def _split_member(L: LinearSystem, rng: random.Random, tries: int = 50) -> tuple[list, QuadraticSpace]:
    """A random nondegenerate member with a maximal isotropic subspace."""
    f = L.field
    for _ in range(tries):
        lam = [f.random(rng) for _ in range(L.m)]
        if all(x == 0 for x in lam):
            continue
        Q = L.member(lam)
        if Q.corank():
            continue
        try:
            fr = Q.hyperbolic_frame()
        except NotSupported:
            continue
        if fr.witt_index == Q.n:
            return lam, Q
    raise NotSupported("no nondegenerate member with a computable maximal isotropic subspace (over Q only explicitly hyperbolic spaces are supported)")


def _rows(field: Field, M: Matrix) -> list[list[str]]:
    return [[_fmt(field, x) for x in row] for row in M.a]


def case_mf(L: LinearSystem, rng: random.Random, point=None) -> dict:
    f = L.field
    lam, Q = _split_member(L, rng)
    W = random_isotropic(Q, rng)
    F = MatrixFactorizationPair.of(build_ideal(W))
    v = [f.random(rng) for _ in range(Q.dim)]
    try:
        qv = mf_check(F, v)
        got, ok = {"phi_psi": "q(v) Id", "psi_phi": "q(v) Id", "q": _fmt(f, qv)}, True
    except AssertionError as e:
        got, ok = {"error": str(e)}, False
    inputs = {"lambda": [_fmt(f, x) for x in lam], "W": _rows(f, W.basis), "v": [_fmt(f, x) for x in v]}
    return {"inputs": inputs, "expected": {"phi_psi": "q(v) Id", "psi_phi": "q(v) Id"}, "got": got, "passed": ok}


def case_lemma(L: LinearSystem, rng: random.Random, point=None) -> dict:
    f = L.field
    lam, Q = _split_member(L, rng)
    W, W2 = random_isotropic(Q, rng), random_isotropic(Q, rng)
    R = lemma_iso_maps(W, W2)
    r = W.dim - R.meet_dim
    want = lemma_scalar(r, R.pairing_det, f)
    ok = R.scalar == want and R.scalar != 0
    return {
        "inputs": {"lambda": [_fmt(f, x) for x in lam], "W": _rows(f, W.basis), "W2": _rows(f, W2.basis)},
        "expected": {"scalar": _fmt(f, want), "nonzero": True},
        "got": {"scalar": _fmt(f, R.scalar), "nonzero": R.scalar != 0, "meet_dim": R.meet_dim},
        "passed": bool(ok),
    }


def case_ses(L: LinearSystem, rng: random.Random, point=None) -> dict:
    f = L.field
    lam, Q = _split_member(L, rng)
    W = random_isotropic(Q, rng, dim=Q.n - 1)
    W1, W2 = isotropic_completions(W)
    rep = ses_check(W, W1, W2, seed=rng.randrange(1 << 30))
    got = {"contained": rep.contained, "halving": rep.halving, "quotient_iso": rep.quotient_iso}
    return {
        "inputs": {"lambda": [_fmt(f, x) for x in lam], "W": _rows(f, W.basis)},
        "expected": {"contained": True, "halving": True, "quotient_iso": True},
        "got": got,
        "passed": rep.passed,
    }


def case_hom(L: LinearSystem, rng: random.Random, point=None) -> dict:
    f = L.field
    lam, Q = _split_member(L, rng)
    A = CliffordAlgebra(Q)
    W = random_isotropic(Q, rng, family_hint=0)
    Wo = random_isotropic(Q, rng, family_hint=1)
    I, Io = build_ideal(W, A), build_ideal(Wo, A)
    same = module_hom_dim(I, I)
    opp = module_hom_dim(I, Io)
    ok = same == 1 and opp == 0 and not same_family(W, Wo)
    return {
        "inputs": {"lambda": [_fmt(f, x) for x in lam], "W": _rows(f, W.basis), "W_opposite": _rows(f, Wo.basis)},
        "expected": {"hom_same": 1, "hom_opposite": 0},
        "got": {"hom_same": same, "hom_opposite": opp},
        "passed": bool(ok),
    }


def case_ranks(L: LinearSystem, rng: random.Random, point=None) -> dict:
    k_max = L.dim + 4
    single = rank_stabilization_table([L.forms[0]], k_max).ranks
    system = rank_stabilization_table(GradedCliffordAlgebra(L.forms), k_max).ranks
    want_single = [graded_piece_count(L.dim, 1, k) for k in range(k_max + 1)]
    want_system = [graded_piece_count(L.dim, L.m, k) for k in range(k_max + 1)]
    stable = 1 << (L.dim - 1)
    ok = single == want_single and system == want_system and all(r == stable for r in single[L.dim - 1 :])
    return {
        "inputs": {"k_max": k_max, "m": L.m},
        "expected": {"single": want_single, "system": want_system, "stable_value": stable, "stable_from": L.dim - 1},
        "got": {"single": single, "system": system},
        "passed": bool(ok),
    }


def case_ideal_dims(L: LinearSystem, rng: random.Random, point=None) -> dict:
    f = L.field
    lam, Q = _split_member(L, rng)
    A = CliffordAlgebra(Q)
    want, got = {}, {}
    for m in range(1, Q.n + 1):
        I = build_ideal(random_isotropic(Q, rng, dim=m), A)
        want[str(m)] = [1 << (Q.dim - m - 1)] * 2
        got[str(m)] = [I.dim_even, I.dim_odd]
    return {"inputs": {"lambda": [_fmt(f, x) for x in lam]}, "expected": want, "got": got, "passed": want == got}


def case_complex(L: LinearSystem, rng: random.Random, point=None) -> dict:
    f = L.field
    if point is None:
        pts = base_locus_sample(L, 1, seed=rng.randrange(1 << 30))
        if not pts:
            return {"inputs": {}, "expected": {"smooth": True, "exact": True}, "got": {"error": "no base-locus point found"}, "passed": False}
        v = list(pts[0].v)
    else:
        v = list(point)
    rep = clifford_complex_exact_at(L, v)
    exact = rep.first_failure is None and rep.injective_d0 and rep.d_squared_zero
    return {
        "inputs": {"v": [_fmt(f, x) for x in v], "k_max": len(rep.ranks) - 1},
        "expected": {"smooth": True, "exact": True},
        "got": {"smooth": rep.smooth, "exact": exact, "ranks": rep.ranks, "dims": rep.dims},
        "passed": bool(rep.passed),
    }


CASES: dict[str, Callable] = {
    "mf": case_mf,
    "lemma": case_lemma,
    "ses": case_ses,
    "hom": case_hom,
    "ranks": case_ranks,
    "ideal-dims": case_ideal_dims,
    "complex": case_complex,
}


def run_case(suite: str, system: dict, seed: int, index: int, point=None) -> dict:
    L = LinearSystem.from_json(system)
    out = CASES[suite](L, _rng(suite, seed, index), point)
    return {"index": index, **out}


REPORT_SCHEMA = {
    "type": "object",
    "required": ["suite", "system_hash", "seed", "trials", "passed", "cases", "_meta"],
    "properties": {
        "suite": {"enum": list(SUITES)},
        "system_hash": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "seed": {"type": "integer"},
        "trials": {"type": "integer", "minimum": 1},
        "passed": {"type": "boolean"},
        "cases": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["index", "inputs", "expected", "got", "passed"],
                "properties": {
                    "index": {"type": "integer", "minimum": 0},
                    "inputs": {"type": "object"},
                    "expected": {"type": "object"},
                    "got": {"type": "object"},
                    "passed": {"type": "boolean"},
                },
            },
        },
        "_meta": {"type": "object", "required": ["command", "seed", "field", "n", "m", "input_hash", "version"]},
    },
}


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    started = time.time()
    try:
        field = Field.parse(args.field or default_field())
    except FieldError as e:
        raise UsageError(str(e)) from None
    if args.n not in (2, 3, 4):
        raise UsageError("--n must be 2, 3 or 4")
    if args.m not in (2, 3, 4):
        raise UsageError("--m must be 2, 3 or 4")
    forms = random_system(args.n, args.m, field, args.seed)
    info = meta("gen", args.seed, str(field), args.n, args.m, None)
    text = dumps(LinearSystem(tuple(forms)).to_json(info), args.pretty)
    write_out(text, args.out)
    write_manifest(args.manifest, info, started)
    return EXIT_OK


def _parse_point(text: str, field: Field) -> list:
    try:
        return [field(x) for x in text.split(",")]
    except (FieldError, ValueError) as e:
        raise UsageError(f"bad --point: {e}") from None


def cmd_verify(args) -> int:
    started = time.time()
    L, digest = load_system(args.system)
    point = _parse_point(args.point, L.field) if args.point else None
    if point is not None and args.suite != "complex":
        raise UsageError("--point applies to the complex suite only")
    if point is not None and len(point) != L.dim:
        raise UsageError(f"--point needs {L.dim} coordinates")
    trials = 1 if point is not None else (args.trials or DEFAULT_TRIALS[args.suite])
    if trials < 1:
        raise UsageError("--trials must be positive")
    system = L.to_json()
    jobs = max(1, args.jobs)
    calls = [(args.suite, system, args.seed, i, point) for i in range(trials)]
    if jobs == 1:
        cases = [run_case(*c) for c in calls]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cases = list(pool.map(run_case, *zip(*calls)))
    cases.sort(key=lambda c: c["index"])
    passed = all(c["passed"] for c in cases)
    info = meta(f"verify --suite {args.suite}", args.seed, str(L.field), L.n, L.m, digest)
    report = {
        "suite": args.suite,
        "system_hash": L.digest(),
        "seed": args.seed,
        "trials": trials,
        "passed": passed,
        "cases": cases,
        "_meta": info,
    }
    if args.pretty:
        lines = [f"suite {args.suite}: {'PASS' if passed else 'FAIL'} ({sum(c['passed'] for c in cases)}/{trials})"]
        lines += [f"  case {c['index']}: {'pass' if c['passed'] else 'FAIL'}  got={json.dumps(c['got'], sort_keys=True)}" for c in cases]
        write_out("\n".join(lines) + "\n", args.out)
    else:
        write_out(dumps(report), args.out)
    write_manifest(args.manifest, info, started)
    return EXIT_OK if passed else EXIT_MATH


def cmd_strata(args) -> int:
    L, _ = load_system(args.system)
    rep = strata_scan(L, args.p)
    if rep.total != rep.expected_total():
        return EXIT_MATH
    if args.pretty:
        lines = [f"P^{rep.m - 1}(F_{rep.p}): {rep.total} points"]
        lines += [f"  corank {c}: {k}" for c, k in sorted(rep.counts.items())]
        write_out("\n".join(lines) + "\n", args.out)
    else:
        write_out(rep.to_csv(), args.out)
    return EXIT_OK


def cmd_disc(args) -> int:
    L, _ = load_system(args.system)
    d = discriminant(L)
    write_out(dumps(d.to_json(), args.pretty), args.out)
    return EXIT_OK if d.degree == L.dim else EXIT_MATH


def cmd_cover(args) -> int:
    L, _ = load_system(args.system)
    rep = double_cover_report(L, args.p)
    write_out(dumps(rep.to_json(), args.pretty), args.out)
    return EXIT_OK if rep.methods_agree else EXIT_MATH


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_IO)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quadspin", description="Exact Clifford and spinor computations for quadrics and their linear systems.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a random system")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--field", help="fp:<p> or q (default: $QF_DEFAULT_FIELD or fp:10007)")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out")
    g.add_argument("--manifest", help="write a sidecar manifest with wall time")
    g.add_argument("--pretty", action="store_true")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("system")
    v.add_argument("--suite", choices=SUITES, required=True)
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--trials", type=int)
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--point", help="comma-separated base-locus point (complex suite)")
    v.add_argument("--out")
    v.add_argument("--manifest")
    v.add_argument("--pretty", action="store_true")
    v.set_defaults(func=cmd_verify)

    for name, func, helptext in (
        ("strata", cmd_strata, "corank counts over a small prime (CSV)"),
        ("disc", cmd_disc, "discriminant of the system (JSON)"),
        ("cover", cmd_cover, "double cover report (JSON)"),
    ):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("system")
        if name != "disc":
            c.add_argument("--p", type=int, default=None, help="scan prime")
        c.add_argument("--out")
        c.add_argument("--pretty", action="store_true")
        c.set_defaults(func=func)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SystemFormatError, GeneralPositionError, FieldError, FieldTooSmall, NotSupported, NotSplit) as e:
        sys.stderr.write(f"quadspin: error: {e}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
