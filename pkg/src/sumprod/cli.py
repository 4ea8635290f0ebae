"""Command-line driver.

Exit codes: 0 success (or covered), 1 usage error, 2 a construction or
verification failed, or a resource cap was hit.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from . import constructions as C
from .config import worker_count
from .diagnostics import Table, coverage_report, emit_csv
from .errors import ConstructionError, ExprError, FormatError, ResourceLimitError
from .intset import load, save
from .randmodel import FAMILIES, RandomSetModel, lambda_upto, sample_set
from .repstats import DEFAULT_DELTA_CAP, STATS_COLUMNS, rep_stats
from .selftest import SUITES, run_selftest

MANIFEST_SCHEMA = "manifest_v1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *a, **kw):
        kw.setdefault("allow_abbrev", False)
        super().__init__(*a, **kw)

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def read_config(path):
    """key=value lines; '#' starts a comment; keys may use - or _."""
    cfg = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e.strerror}") from None
    with fh:
        for i, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{i}: expected key=value")
            k, v = line.split("=", 1)
            cfg[k.strip().replace("-", "_")] = v.strip()
    return cfg


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):
        return v.item()
    return v


class Run:
    """Collects what a manifest_v1 file records about one invocation."""

    def __init__(self, argv, args):
        self.argv = list(argv)
        self.config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
        self.started = time.time()
        self.artifacts = []
        self.seeds = []
        self.extra = {}

    def add(self, path):
        self.artifacts.append(path)

    def write(self, path):
        doc = {
            "schema": MANIFEST_SCHEMA,
            "tool": "sumprod",
            "version": __version__,
            "command": self.argv,
            "config": _jsonable(self.config),
            "seeds": self.seeds,
            "started": self.started,
            "finished": time.time(),
            "artifacts": [{"path": p, "sha256": sha256_file(p)} for p in self.artifacts],
        }
        doc.update(_jsonable(self.extra))
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _manifest_path(out):
    return out + ".manifest.json"


def _profile_csv(rows, path):
    emit_csv(Table(("t", "missing_count", "missing_fraction"), [tuple(r) for r in rows]), path)


# construct -------------------------------------------------------------------


def cmd_construct(args, run):
    kind, limit = args.kind, args.limit
    report = {}
    profile = None
    if kind == "dyadic":
        A = C.dyadic_T(limit, include_zero=not args.exclude_zero)
    elif kind == "prime-interval":
        A = C.prime_interval_set(args.alpha, limit, args.l0)
    elif kind == "lorentz":
        if not args.set:
            raise UsageError("construct lorentz needs --set PATH")
        res = C.lorentz_complement(load(args.set), limit, args.start or 0)
        A = res.B.with_meta({"manifest": {"kind": "lorentz", "params": {"N": limit, "start": args.start or 0},
                                          "notes": {"lorentz_constant": res.fitted_constant}}})
    elif kind == "thm-ub":
        A = C.build_thm_ub(args.k, limit, args.l0, args.start)
        notes = A.meta["manifest"]["notes"]
        cov = coverage_report(f"A^{args.k}+A", {"A": A}, notes["n0"], limit)
        report["coverage"] = {"n0": notes["n0"], "missing_count": cov.missing_count}
        profile = cov.profile
    elif kind == "alphabeta":
        A = C.build_alphabeta(args.alpha, args.beta, args.x1, limit)
    else:  # thm53-level
        run.seeds.append(args.seed)
        P, B, rep = C.build_thm53_level(args.eps, limit, args.seed, strict=not args.lenient,
                                        max_retries=args.retries, relax=True)
        A = C.glue_level(P, B, limit)
        A = A.with_meta({"manifest": {"kind": kind, "params": {"eps": args.eps, "N": limit,
                                                                 "seed": args.seed},
                                      "hypothesis_report": rep["hypothesis"]}})
        report = {k: v for k, v in rep.items() if k not in ("intervals",)}
        profile = rep["defect_profile"]
    save(A, args.out)
    run.add(args.out)
    if profile is not None:
        p = args.out + ".defect.csv"
        _profile_csv(profile, p)
        run.add(p)
    run.extra["construction"] = A.meta.get("manifest", {})
    run.extra["report"] = report
    print(f"{kind}: {len(A)} elements <= {A.capacity} -> {args.out}")
    if "coverage" in report:
        print(f"n0 = {report['coverage']['n0']}")
    return 0


# sample ----------------------------------------------------------------------


def cmd_sample(args, run):
    try:
        model = RandomSetModel(args.family, args.c, args.clamp)
    except ValueError as e:
        raise UsageError(str(e)) from None
    run.seeds.append(args.seed)
    A = sample_set(model, args.limit, args.seed)
    lam = lambda_upto(model, args.limit)
    run.extra["lambda"] = lam
    if args.out:
        save(A, args.out)
        run.add(args.out)
    print(f"A({args.limit}) = {len(A)}  lambda = {lam:.6f}  ratio = {len(A) / lam:.6f}")
    return 0


# verify ----------------------------------------------------------------------


def _parse_sets(spec):
    out = {}
    for item in spec or []:
        for part in item.split(","):
            if "=" not in part:
                raise UsageError(f"--sets expects NAME=PATH, got {part!r}")
            name, path = part.split("=", 1)
            try:
                out[name.strip()] = load(path.strip())
            except OSError as e:
                raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return out


def cmd_verify(args, run):
    sets = _parse_sets(args.sets)
    rep = coverage_report(args.expr, sets, args.start, args.limit)
    if args.report:
        emit_csv(rep.profile_table(), args.report)
        run.add(args.report)
    run.extra["coverage"] = {"expr": args.expr, "start": args.start, "limit": args.limit,
                             "missing_count": rep.missing_count, "first_gap": rep.first_gap}
    if rep.covered:
        print("COVERED")
        return 0
    print(f"GAPS {rep.missing_count} (first gap {rep.first_gap})")
    return 2


# stats -----------------------------------------------------------------------


def _parse_model(text):
    kw = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"--model expects key=value pairs, got {part!r}")
        k, v = (s.strip() for s in part.split("=", 1))
        if k == "family":
            kw[k] = v
        elif k in ("c", "clamp"):
            kw[k] = float(v)
        else:
            raise UsageError(f"unknown model key {k!r}")
    try:
        return RandomSetModel(**kw)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_stats(args, run):
    if not args.set and not args.model:
        raise UsageError("stats needs --set PATH or --model c=...")
    A = load(args.set) if args.set else None
    model = _parse_model(args.model) if args.model else None
    ns = list(range(args.n_from, args.n_to + 1))
    if args.delta and model is not None and ns and ns[-1] > args.delta_cap and not args.force:
        raise ResourceLimitError(f"n up to {ns[-1]} above delta cap {args.delta_cap}; use --force")

    def one(n):
        return rep_stats(n, model, A, with_delta=args.delta and model is not None,
                         delta_cap=args.delta_cap, force=args.force).row()

    workers = worker_count()
    if workers > 1 and len(ns) > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(one, ns))
    else:
        rows = [one(n) for n in ns]
    rows = [tuple("" if v is None else v for v in r) for r in rows]
    table = Table(STATS_COLUMNS, rows)
    if args.out:
        emit_csv(table, args.out)
        run.add(args.out)
    else:
        print(",".join(STATS_COLUMNS))
        for r in rows:
            print(",".join(repr(v) if isinstance(v, float) else str(v) for v in r))
    return 0


# selftest / replay -------------------------------------------------------------


def cmd_selftest(args, run):
    results = run_selftest(inject=args.inject_fault, seed=args.seed)
    ok = True
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.checks} checks, {r.detail} "
              f"({r.seconds:.2f}s)")
        ok &= r.passed
    run.extra["selftest"] = [vars(r) for r in results]
    return 0 if ok else 2


def cmd_replay(args, run):
    """Re-run a manifest's command and compare artifact hashes."""
    with open(args.manifest, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema") != MANIFEST_SCHEMA:
        raise UsageError(f"{args.manifest}: not a {MANIFEST_SCHEMA} manifest")
    want = {a["path"]: a["sha256"] for a in doc["artifacts"]}
    code = main(doc["command"], write_manifest=False)
    bad = [p for p, h in want.items() if not os.path.exists(p) or sha256_file(p) != h]
    for p in bad:
        print(f"MISMATCH {p}")
    print("REPRODUCED" if not bad and code in (0, 2) else "DIFFERS")
    return 0 if not bad else 2


# parser ------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="sumprod", description="Thin sum-product bases: constructions and checks.",
                allow_abbrev=False)
    p.add_argument("--version", action="version", version=f"sumprod {__version__}")
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--threads", type=int, help="worker threads (sets SUMPROD_THREADS)")
    p.add_argument("--manifest", help="where to write the run manifest")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="build a set and write it as SPB1")
    c.add_argument("kind", choices=C.KINDS)
    c.add_argument("--limit", type=int, default=10**6)
    c.add_argument("--out", required=True)
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--alpha", type=float, default=0.25)
    c.add_argument("--beta", type=float, default=2 / 3)
    c.add_argument("--x1", type=int, default=64)
    c.add_argument("--eps", type=float, default=0.25)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--retries", type=int, default=4)
    c.add_argument("--l0", type=int, default=1)
    c.add_argument("--start", type=int, default=None)
    c.add_argument("--set", help="input set for lorentz")
    c.add_argument("--exclude-zero", action="store_true", help="dyadic: leave 0 out of T")
    c.add_argument("--lenient", action="store_true",
                   help="thm53-level: take every available prime when a quota cannot be met")
    c.set_defaults(func=cmd_construct)

    s = sub.add_parser("sample", help="draw a random set from the S2S2 or NEOLEM model")
    s.add_argument("--family", choices=FAMILIES, default="S2S2")
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--clamp", type=float, default=1.0)
    s.add_argument("--limit", type=int, default=10**6)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    v = sub.add_parser("verify", help="check that an expression covers [start, limit]")
    v.add_argument("--expr", required=True)
    v.add_argument("--sets", action="append", help="NAME=PATH[,NAME=PATH...]")
    v.add_argument("--start", type=int, default=0)
    v.add_argument("--limit", type=int, required=True)
    v.add_argument("--report", help="CSV for the dyadic missing-fraction profile")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("stats", help="representation statistics per n")
    t.add_argument("--set")
    t.add_argument("--model", help="e.g. c=0.5,clamp=1")
    t.add_argument("--n-from", type=int, required=True)
    t.add_argument("--n-to", type=int, required=True)
    t.add_argument("--delta", action="store_true", help="also compute Delta_n and Janson")
    t.add_argument("--delta-cap", type=int, default=DEFAULT_DELTA_CAP)
    t.add_argument("--force", action="store_true")
    t.add_argument("--out")
    t.set_defaults(func=cmd_stats)

    st = sub.add_parser("selftest", help="run the embedded oracle suites")
    st.add_argument("--inject-fault", choices=SUITES)
    st.add_argument("--seed", type=int, default=0)
    st.set_defaults(func=cmd_selftest)

    r = sub.add_parser("replay", help="re-run a manifest and compare hashes")
    r.add_argument("manifest")
    r.set_defaults(func=cmd_replay)
    return p


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    used = set()
    for sp in subs.choices.values():
        dests = {a.dest for a in sp._actions}
        mine = {k: v for k, v in cfg.items() if k in dests}
        for a in sp._actions:
            if a.dest in mine:
                a.required = False
                if isinstance(a, (argparse._StoreTrueAction,)):
                    mine[a.dest] = mine[a.dest].lower() in ("1", "true", "yes", "on")
        sp.set_defaults(**mine)
        used |= set(mine)
    top = {a.dest for a in parser._actions}
    unknown = set(cfg) - used - top
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    if "threads" in cfg:
        parser.set_defaults(threads=int(cfg["threads"]))


def main(argv=None, write_manifest=True):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.threads:
            os.environ["SUMPROD_THREADS"] = str(args.threads)
        run = Run(argv, args)
        code = args.func(args, run)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except (ExprError, FormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ConstructionError as e:
        print(f"construction failed: {e}", file=sys.stderr)
        if e.report:
            print(json.dumps(_jsonable(e.report), indent=2, sort_keys=True)[:4000], file=sys.stderr)
        return 2
    except ResourceLimitError as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    target = args.manifest or (_manifest_path(run.artifacts[0]) if run.artifacts else None)
    if write_manifest and target and args.command != "replay":
        run.write(target)
    return code


if __name__ == "__main__":
    sys.exit(main())
