"""Command-line interface: counters, exact oracles, limits, verdicts, sampling.

Permutation literals: ``I``, ``T``, ``G(b,d)``, ``LG(b,d)``, ``D(file)`` (a
point permutation of [M], one 1-based image per line) and ``P(file)`` (M^2
lines ``i j i' j'``).  Inside ``G``/``LG``, ``b`` and ``d`` may be integers
or ``M``/``M/k`` resolved against --M.

Family literals for ``verdict`` use the grid expressions ``const:j`` (or a
bare integer), ``N``, ``N^2``, ``2^k`` (k = 1-based grid position), ``M/j``
and ``inf``; the last two are resolved against the grid's M, which must be
pinned by at least one fully concrete family.

Exit codes: 0 success, 1 failed selftest, 2 parse/validation error,
3 enumeration budget refusal (the message carries the computed cost).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import asymptotics as ay
from . import montecarlo as mc
from . import selftest as st
from . import wick as wk
from . import perms as pm
from .perms import MatrixShape, PartialTranspose, ResourceLimitError, Side


# ---------------------------------------------------------------------------
# literals
# ---------------------------------------------------------------------------

def _parse_block_int(tok: str, M: int) -> int:
    tok = tok.strip()
    if tok == "M":
        return M
    m = re.fullmatch(r"M/(\d+)", tok)
    if m:
        k = int(m.group(1))
        if k < 1 or M % k:
            raise ValueError(f"M/{k} does not divide M = {M}")
        return M // k
    if re.fullmatch(r"\d+", tok):
        return int(tok)
    raise ValueError(f"bad block parameter {tok!r}")


def parse_perm_literal(text: str, M: int) -> pm.EntryPermutation:
    text = text.strip()
    if text == "I":
        return pm.Identity(M)
    if text == "T":
        return pm.Transpose(M)
    m = re.fullmatch(r"(L?G)\(([^,]+),([^)]+)\)", text)
    if m:
        side = Side.LEFT if m.group(1) == "LG" else Side.RIGHT
        b = _parse_block_int(m.group(2), M)
        d = _parse_block_int(m.group(3), M)
        if b * d != M:
            raise ValueError(f"{text}: b*d = {b * d} != M = {M}")
        return PartialTranspose(b, d, side)
    m = re.fullmatch(r"D\((.+)\)", text)
    if m:
        with open(m.group(1)) as fh:
            theta = [int(line.strip()) for line in fh if line.strip()]
        if len(theta) != M:
            raise ValueError(f"D-file holds {len(theta)} images, expected M = {M}")
        return pm.InducedDiagonal(theta)
    m = re.fullmatch(r"P\((.+)\)", text)
    if m:
        R = np.zeros((M, M), dtype=np.int64)
        C = np.zeros((M, M), dtype=np.int64)
        count = 0
        with open(m.group(1)) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                i, j, u, v = (int(x) for x in line.split())
                R[i - 1, j - 1], C[i - 1, j - 1] = u, v
                count += 1
        if count != M * M:
            raise ValueError(f"P-file holds {count} rows, expected M^2 = {M * M}")
        return pm.TablePermutation(R, C)
    raise ValueError(f"unrecognized permutation literal {text!r}")


def parse_word(text: str, M: int) -> tuple[pm.EntryPermutation, ...]:
    # split on commas not inside parentheses (file names may contain them)
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return tuple(parse_perm_literal(p, M) for p in parts if p.strip())


# family grid expressions -----------------------------------------------------

def _parse_grid(text: str) -> list[int]:
    m = re.fullmatch(r"\s*N\s*=\s*([\d,\s]+)", text)
    if not m:
        raise ValueError(f"bad grid {text!r}; expected e.g. \"N=2,4,8,16\"")
    vals = [int(x) for x in m.group(1).split(",") if x.strip()]
    if len(vals) < 1 or any(v < 1 for v in vals) or vals != sorted(vals):
        raise ValueError("grid values must be ascending positive integers")
    return vals


class _Expr:
    """A tiny grid expression: const:j / int / N / N^2 / 2^k / M/j / inf."""

    def __init__(self, tok: str):
        tok = tok.strip()
        self.tok = tok
        if tok == "inf":
            self.kind = "inf"
        elif tok == "N":
            self.kind = "N"
        elif tok == "N^2":
            self.kind = "N2"
        elif tok == "2^k":
            self.kind = "pow2"
        elif re.fullmatch(r"M/(\d+)", tok):
            self.kind = "Mdiv"
            self.j = int(tok.split("/")[1])
        elif re.fullmatch(r"const:(\d+)", tok):
            self.kind = "const"
            self.j = int(tok.split(":")[1])
        elif re.fullmatch(r"\d+", tok):
            self.kind = "const"
            self.j = int(tok)
        else:
            raise ValueError(f"bad grid expression {tok!r}")

    @property
    def limit(self):
        return self.j if self.kind == "const" else ay.INF

    def concrete(self, N: int, k: int) -> int | None:
        if self.kind == "const":
            return self.j
        if self.kind == "N":
            return N
        if self.kind == "N2":
            return N * N
        if self.kind == "pow2":
            return 2 ** k
        return None  # M/j and inf need the grid's M

    def resolve(self, M: int) -> int:
        if self.kind == "Mdiv":
            if M % self.j:
                raise ValueError(f"M/{self.j}: {self.j} does not divide M = {M}")
            return M // self.j
        raise ValueError(f"{self.tok!r} cannot be resolved directly")


def parse_families(text: str, grid: list[int]) -> list[ay.ShapeFamily]:
    """Parse `;`-separated family literals against an N grid.

    The grid's M_N is pinned by the families whose components are concrete;
    ``M/j`` and ``inf`` components are resolved against that M afterwards.
    """
    raw = []
    for part in text.split(";"):
        part = part.strip()
        m = re.fullmatch(r"(L?G)\(([^,]+),([^)]+)\)", part)
        if not m:
            raise ValueError(f"bad family literal {part!r}")
        side = Side.LEFT if m.group(1) == "LG" else Side.RIGHT
        raw.append((part, side, _Expr(m.group(2)), _Expr(m.group(3))))

    Ms: list[int] | None = None
    for label, _, be, de in raw:
        bs = [be.concrete(N, k + 1) for k, N in enumerate(grid)]
        ds = [de.concrete(N, k + 1) for k, N in enumerate(grid)]
        if None in bs or None in ds:
            continue
        cand = [b * d for b, d in zip(bs, ds)]
        if Ms is None:
            Ms = cand
        elif Ms != cand:
            raise ValueError(f"family {label} induces M grid {cand}, others {Ms}")
    if Ms is None:
        raise ValueError("no family pins the M grid (all use inf or M/j components)")

    families = []
    for label, side, be, de in raw:
        samples = []
        for k, N in enumerate(grid):
            M = Ms[k]
            b = be.concrete(N, k + 1)
            d = de.concrete(N, k + 1)
            if b is None and d is None:
                raise ValueError(f"family {label}: both components unresolved")
            if b is None:
                b = be.resolve(M) if be.kind == "Mdiv" else (M // d if M % d == 0 else None)
            if d is None:
                d = de.resolve(M) if de.kind == "Mdiv" else (M // b if M % b == 0 else None)
            if b is None or d is None or b * d != M:
                raise ValueError(f"family {label}: cannot satisfy b*d = M = {M} at N = {N}")
            samples.append((b, d, M))
        families.append(ay.ShapeFamily(side, be.limit, de.limit, tuple(samples), label))
    return families


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return x
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, ay.Verdict):
        return _jsonable({"free": x.free, "rule": x.rule, "witness": x.witness,
                          "warning": x.warning})
    return x


def _emit(payload: dict, args) -> None:
    fmt = getattr(args, "format", "json")
    out_path = getattr(args, "out", None)
    if fmt == "json":
        text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    else:
        rows = payload.get("rows")
        if rows is None:
            rows = [payload]
        buf = io.StringIO()
        fields = list(rows[0].keys())
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(v) for k, v in row.items()})
        text = buf.getvalue()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_cell(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(_jsonable(v), sort_keys=True)
    return v


def _maybe_emit_config(args, params: dict) -> None:
    path = getattr(args, "emit_config", None)
    if path:
        with open(path, "w") as fh:
            json.dump(_jsonable(params), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_count(args) -> int:
    M = args.M
    a = parse_perm_literal(args.a, M)
    b = parse_perm_literal(args.b, M)
    payload: dict = {
        "M": M, "a": args.a, "b": args.b,
        "c": pm.count_agreements(a, b),
        "j": pm.count_joint(a, b),
    }
    if isinstance(a, PartialTranspose) and isinstance(b, PartialTranspose) \
            and a.side is Side.RIGHT and b.side is Side.RIGHT:
        lcm = pm.gamma_lcm_data(a.d, b.d)
        payload["lcm"] = {"Q": lcm.Q, "L": lcm.L, "l": lcm.ell}
        payload["bounds"] = {"lower": M * M // lcm.L**2, "upper": M * M // lcm.L}
    if args.all:
        payload["c1"] = payload["j"]
        payload["c2"] = pm.count_projection_agreement(a, b, "second", "first", "share_middle")
        payload["c3"] = pm.count_projection_agreement(a, b, "first", "second", "share_middle")
        # the shared-second-slot variants of the same conditions;
        # both are reported rather than picking one as canonical
        payload["c2_sharesecond"] = pm.count_projection_agreement(
            a, b, "second", "second", "share_second_slot")
        payload["c3_sharesecond"] = pm.count_projection_agreement(
            a, b, "first", "first", "share_second_slot")
    _emit(payload, args)
    return 0


def _word_payload(args) -> tuple[wk.WickWord, dict]:
    shape = MatrixShape(args.M, args.P)
    perms = parse_word(args.word, args.M)
    word = wk.WickWord(shape, perms)
    base = {"M": args.M, "P": args.P, "word": args.word}
    return word, base


def _cmd_moment(args) -> int:
    word, payload = _word_payload(args)
    budget = None if args.force else wk.DEFAULT_BUDGET
    if args.mc:
        cfg = mc.SamplerConfig(word.shape, args.samples, args.seed, args.streams)
        rep = mc.mc_mixed_moment(word, cfg)
        payload.update({"samples": rep.samples, "seed": rep.seed,
                        "mean": rep.mean, "std_error": rep.std_error})
    else:
        report = wk.exact_mixed_moment(word, budget=budget)
        payload["exact"] = report.total
        if args.breakdown:
            payload["breakdown"] = [
                {"pairing": repr(p), "count": report.tuple_counts[p],
                 "value": report.per_pairing[p]}
                for p in wk.enumerate_bipartite_pairings(word.m)
            ]
    _maybe_emit_config(args, {"command": "moment", **payload})
    _emit(payload, args)
    return 0


def _cmd_cumulant(args) -> int:
    word, payload = _word_payload(args)
    budget = None if args.force else wk.DEFAULT_BUDGET
    if args.mc:
        cfg = mc.SamplerConfig(word.shape, args.samples, args.seed, args.streams)
        rep = mc.mc_mixed_cumulant(word, cfg)
        payload.update({"samples": rep.samples, "seed": rep.seed,
                        "mean": rep.mean, "std_error": rep.std_error})
    else:
        payload["exact"] = wk.exact_mixed_cumulant(word, budget=budget)
    _emit(payload, args)
    return 0


def _cmd_covariance(args) -> int:
    shape = MatrixShape(args.M, args.P)
    w1 = wk.WickWord(shape, parse_word(args.word1, args.M))
    w2 = wk.WickWord(shape, parse_word(args.word2, args.M))
    payload = {"M": args.M, "P": args.P, "word1": args.word1, "word2": args.word2}
    if args.mc:
        cfg = mc.SamplerConfig(shape, args.samples, args.seed, args.streams)
        rep = mc.mc_covariance(w1, w2, cfg)
        payload.update({"samples": rep.samples, "seed": rep.seed,
                        "mean": rep.mean, "std_error": rep.std_error})
    else:
        budget = None if args.force else wk.DEFAULT_BUDGET
        payload["exact"] = wk.exact_trace_covariance(w1, w2, budget=budget)
    _emit(payload, args)
    return 0


def _parse_limit_value(tok: str):
    if tok == "inf":
        return ay.INF
    return int(tok)


def _cmd_limit(args) -> int:
    b = _parse_limit_value(args.b)
    d = _parse_limit_value(args.d)
    c = Fraction(args.c)
    cumulants = [ay.limit_cumulant_gamma(m, b, d, c) for m in range(1, args.orders + 1)]
    moments = ay.limit_moments_gamma(args.orders, b, d, c)
    payload = {"b": args.b, "d": args.d, "c": str(c), "orders": args.orders,
               "cumulants": cumulants, "moments": moments}
    _emit(payload, args)
    return 0


def _cmd_verdict(args) -> int:
    grid = _parse_grid(args.grid)
    families = parse_families(args.family, grid)
    if len(families) == 1:
        raise ValueError("verdict needs at least two families (separate with ';')")
    matrix, overall = ay.verdict_family(families)
    pairs = []
    for (i, j), v in sorted(matrix.items()):
        entry = {"pair": [i, j], "labels": [families[i].label, families[j].label],
                 "free": v.free, "rule": v.rule, "witness": v.witness}
        if v.warning:
            entry["warning"] = v.warning
        if args.probe:
            probe = ay.empirical_density_probe(families[i], families[j])
            entry["density_probe"] = {
                "densities": [str(x) for x in probe["densities"]],
                "nonincreasing": probe["nonincreasing"],
            }
        pairs.append(entry)
    payload = {"grid": grid, "families": [f.label for f in families],
               "pairs": pairs, "overall_free": overall}
    _emit(payload, args)
    return 0


def _cmd_simulate(args) -> int:
    word, payload = _word_payload(args)
    cfg = mc.SamplerConfig(word.shape, args.samples, args.seed, args.streams)
    rep = mc.mc_mixed_moment(word, cfg)
    row = {"word": args.word, "M": args.M, "P": args.P, "samples": rep.samples,
           "seed": rep.seed, "mean": rep.mean, "std_error": rep.std_error}
    _maybe_emit_config(args, {"command": "simulate", "M": args.M, "P": args.P,
                              "word": args.word, "samples": args.samples,
                              "seed": args.seed, "streams": args.streams})
    _emit({"rows": [row]} if args.format == "csv" else row, args)
    return 0


def _sweep_point(job: dict) -> dict:
    cmd = job["command"]
    M, P = int(job["M"]), int(job.get("P", job["M"]))
    shape = MatrixShape(M, P)
    if cmd == "count":
        a = parse_perm_literal(job["a"], M)
        b = parse_perm_literal(job["b"], M)
        return {"command": cmd, "M": M, "P": P, "a": job["a"], "b": job["b"],
                "c": pm.count_agreements(a, b), "j": pm.count_joint(a, b),
                "mean": "", "std_error": ""}
    if cmd == "covariance":
        w1 = wk.WickWord(shape, parse_word(job["word1"], M))
        w2 = wk.WickWord(shape, parse_word(job["word2"], M))
        if "samples" in job:
            cfg = mc.SamplerConfig(shape, int(job["samples"]), int(job["seed"]),
                                   int(job.get("streams", 1)))
            rep = mc.mc_covariance(w1, w2, cfg)
            return {"command": cmd, "M": M, "P": P, "word1": job["word1"],
                    "word2": job["word2"], "samples": rep.samples, "seed": rep.seed,
                    "mean": format(rep.mean, ".17g"),
                    "std_error": format(rep.std_error, ".17g")}
        val = wk.exact_trace_covariance(w1, w2)
        return {"command": cmd, "M": M, "P": P, "word1": job["word1"],
                "word2": job["word2"], "exact": str(val), "mean": "", "std_error": ""}
    word = wk.WickWord(shape, parse_word(job["word"], M))
    if cmd == "moment":
        val = wk.exact_mixed_moment(word).total
        return {"command": cmd, "M": M, "P": P, "word": job["word"],
                "exact": str(val), "mean": "", "std_error": ""}
    if cmd == "simulate":
        cfg = mc.SamplerConfig(shape, int(job["samples"]), int(job["seed"]),
                               int(job.get("streams", 1)))
        rep = mc.mc_mixed_moment(word, cfg)
        return {"command": cmd, "M": M, "P": P, "word": job["word"],
                "samples": rep.samples, "seed": rep.seed,
                "mean": format(rep.mean, ".17g"),
                "std_error": format(rep.std_error, ".17g")}
    raise ValueError(f"sweep does not support command {cmd!r}")


def _cmd_sweep(args) -> int:
    with open(args.config) as fh:
        config = json.load(fh)
    cmd = config.get("command")
    grid = config.get("grid")
    if not cmd or not isinstance(grid, list) or not grid:
        raise ValueError("sweep config needs `command` and a nonempty `grid` list")
    jobs = []
    for point in grid:
        job = {k: v for k, v in config.items() if k != "grid"}
        job.update(point)
        jobs.append(job)
    workers = int(os.environ.get("PTLAB_THREADS", "0")) or min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(_sweep_point, jobs))
    fields = sorted({k for row in rows for k in row}, key=lambda k: (k != "command", k))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, restval="", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_selftest(args) -> int:
    if args.criteria:
        wanted = tuple(int(x) for x in args.criteria.split(","))
        bad = [x for x in wanted if x not in st.ALL_CRITERIA]
        if bad:
            raise ValueError(f"unknown criteria {bad}; valid: {st.ALL_CRITERIA}")
    elif args.all:
        wanted = st.ALL_CRITERIA
    else:
        wanted = st.DETERMINISTIC_CRITERIA
    results = st.run(wanted, out=print)
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="write output to this path instead of stdout")


def _add_mc_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mc", action="store_true", help="Monte Carlo instead of exact")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, help="required for any Monte Carlo run")
    p.add_argument("--streams", type=int, default=1, help="parallel sample streams")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ptlab", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="agreement statistics of two entry permutations")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--all", action="store_true",
                   help="include the projection-agreement condition counters")
    _add_output_args(p)
    p.set_defaults(fn=_cmd_count)

    for name, fn in (("moment", _cmd_moment), ("cumulant", _cmd_cumulant)):
        p = sub.add_parser(name, help=f"exact or Monte Carlo mixed {name}")
        p.add_argument("--M", type=int, required=True)
        p.add_argument("--P", type=int)
        p.add_argument("--word", required=True)
        p.add_argument("--exact", action="store_true", help="exact rational (default)")
        p.add_argument("--breakdown", action="store_true",
                       help="per-pairing decomposition (moment only)")
        p.add_argument("--force", action="store_true", help="override the enumeration budget")
        p.add_argument("--emit-config", help="write the resolved parameters as JSON")
        _add_mc_args(p)
        _add_output_args(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("covariance", help="covariance of two unnormalized trace statistics")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--P", type=int)
    p.add_argument("--word1", required=True)
    p.add_argument("--word2", required=True)
    p.add_argument("--force", action="store_true")
    _add_mc_args(p)
    _add_output_args(p)
    p.set_defaults(fn=_cmd_covariance)

    p = sub.add_parser("limit", help="limit cumulants and moments of a (b, d) family")
    p.add_argument("--b", required=True, help="positive integer or inf")
    p.add_argument("--d", required=True, help="positive integer or inf")
    p.add_argument("--c", default="1", help="limit of P/M as a rational, e.g. 2/3")
    p.add_argument("--orders", type=int, default=6)
    _add_output_args(p)
    p.set_defaults(fn=_cmd_limit)

    p = sub.add_parser("verdict", help="pairwise asymptotic freeness verdicts")
    p.add_argument("--family", required=True,
                   help="`;`-separated family literals, e.g. \"G(N,N);LG(N,N);G(N^2,1)\"")
    p.add_argument("--grid", required=True, help="e.g. \"N=2,4,8,16\"")
    p.add_argument("--probe", action="store_true",
                   help="attach the exact agreement-density corroboration")
    _add_output_args(p)
    p.set_defaults(fn=_cmd_verdict)

    p = sub.add_parser("simulate", help="Monte Carlo moment estimate (CSV-friendly)")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--P", type=int)
    p.add_argument("--word", required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--streams", type=int, default=1)
    p.add_argument("--emit-config", help="write the resolved parameters as JSON")
    _add_output_args(p)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("sweep", help="run a JSON-configured grid of jobs to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("selftest", help="run the deterministic acceptance criteria")
    p.add_argument("--all", action="store_true",
                   help="include the Monte Carlo criteria (5 and 8)")
    p.add_argument("--criteria", help="comma-separated subset, e.g. 1,4,9")
    p.set_defaults(fn=_cmd_selftest)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    if getattr(args, "P", None) is None and hasattr(args, "P"):
        args.P = args.M
    if getattr(args, "mc", False) and args.seed is None:
        print("error: --seed is required for Monte Carlo runs (no wall-clock default)",
              file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except ResourceLimitError as exc:
        print(f"resource refusal: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
