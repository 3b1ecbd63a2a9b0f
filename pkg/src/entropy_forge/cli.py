"""Command-line front end.

Every subcommand loads its inputs, calls the library, and writes a report.
Exit status: 0 when every verdict passes, 1 on any failed verdict, 2 on a
usage error or malformed input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__, shipped
from .adversary import break_cg, break_general
from .bitdist import TOL, Dist, FunctionTable, push_forward
from .blocks import BlockDist, verify_block_source
from .compose import ChainConfig, bucket_schedule, compose_chain
from .entropy import check_characterization, smooth_min_entropy
from .existential import (BoundInputs, mc_failure_rate, part1_bound, part2_bound, phi_checks,
                          phi_margins, psi)
from .nonmal import nm_verify, toy_pipeline
from .primitives import (CondenserParams, SeededPrimitive, search_family_condenser,
                         search_primitive, verify_seeded_condenser, verify_seeded_extractor)
from .rng import stream

MC_COLUMNS = ["n", "k", "ell", "g", "m", "eps", "trials", "failures", "rate",
              "part1", "part2", "pvalue", "seed"]
_NOT_PARAMS = {"command", "seed", "out", "format", "cache", "jobs", "figures", "append"}


class UsageError(Exception):
    pass


# -- serialization ----------------------------------------------------------

def plain(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def canonical(obj) -> str:
    return json.dumps(plain(obj), sort_keys=True, separators=(",", ":"))


def digest(obj) -> str:
    return hashlib.sha256(canonical(obj).encode()).hexdigest()


def make_report(command: str, params: dict, seed: int, results: dict, started: float) -> dict:
    body = {"command": command, "params": plain(params), "rng_seed": seed,
            "results": plain(results), "tool_version": __version__}
    rep = dict(body)
    rep["canonical_hash"] = digest(body)
    rep["started"] = datetime.fromtimestamp(started, timezone.utc).isoformat()
    rep["elapsed"] = round(time.time() - started, 6)
    return rep


def _flatten(obj, prefix="") -> dict:
    out = {}
    if isinstance(obj, dict):
        for k in sorted(obj):
            out.update(_flatten(obj[k], "%s%s." % (prefix, k)))
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            out.update(_flatten(v, "%s%d." % (prefix, i)))
    else:
        out[prefix[:-1]] = json.dumps(obj) if isinstance(obj, list) else obj
    return out


def to_csv(rep: dict) -> str:
    res = rep["results"]
    rows = res.get("rows") if isinstance(res.get("rows"), list) else None
    if rows is None:
        rows = [{k: v for k, v in res.items()}]
    flat = [_flatten(r) for r in rows]
    if rep["command"] == "mc-existential":
        cols = MC_COLUMNS
    else:
        cols = sorted(set().union(*flat))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in flat:
        w.writerow(r)
    return buf.getvalue()


# -- input helpers ----------------------------------------------------------

def read_json(path: str, what: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError("cannot read %s file %s: %s" % (what, path, exc.strerror)) from None
    except json.JSONDecodeError as exc:
        raise UsageError("%s file %s is not valid JSON (%s)" % (what, path, exc)) from None


def file_hash(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def cache_dir(args) -> str | None:
    return os.environ.get("ENTROPY_FORGE_CACHE") or args.cache


def cached(args, key_obj: dict, compute):
    root = cache_dir(args)
    if root is None:
        return compute()
    path = os.path.join(root, digest(key_obj) + ".json")
    if os.path.exists(path):
        with open(path) as fh:
            return json.load(fh)
    res = plain(compute())
    os.makedirs(root, exist_ok=True)
    tmp = path + ".tmp%d" % os.getpid()
    with open(tmp, "w") as fh:
        json.dump(res, fh)
    os.replace(tmp, path)
    return res


def pool_map(args, fn, items):
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


# -- subcommands ------------------------------------------------------------

def cmd_entropy(args) -> tuple[dict, dict]:
    x = Dist.from_json(read_json(args.dist, "dist"))
    res = smooth_min_entropy(x, args.eps)
    out = {"value": res.value, "capped": res.capped, "heavy_set_size": res.heavy_set_size,
           "passed": True}
    if args.k is not None:
        v = check_characterization(x, args.k, args.eps)
        out["characterization"] = dict(v.__dict__)
        out["passed"] = bool(v.agrees)
    return {"dist_sha256": file_hash(args.dist)}, out


def _primitive(args) -> SeededPrimitive:
    return SeededPrimitive.from_json(read_json(args.primitive, "primitive"))


def cmd_verify_ext(args):
    p = _primitive(args)
    k = p.params.k if args.k is None else args.k
    eps = verify_seeded_extractor(p, k, exhaustive_sets=not args.sampled)
    claim = p.params.eps if args.claim is None else args.claim
    return ({"primitive_sha256": file_hash(args.primitive)},
            {"k": k, "eps": eps, "claim": claim, "exact": not args.sampled,
             "passed": eps <= claim + TOL})


def cmd_verify_cond(args):
    p = _primitive(args)
    k = p.params.k if args.k is None else args.k
    kprime = p.params.kprime if args.kprime is None else args.kprime
    eps = verify_seeded_condenser(p, k, kprime, exhaustive_sets=not args.sampled)
    claim = p.params.eps if args.claim is None else args.claim
    return ({"primitive_sha256": file_hash(args.primitive)},
            {"k": k, "kprime": kprime, "eps": eps, "claim": claim, "exact": not args.sampled,
             "passed": eps <= claim + TOL})


def cmd_search(args):
    params = {k: getattr(args, k) for k in ("n", "d", "m", "k", "kprime", "eps", "trials",
                                             "mode", "budget")}
    if args.family:
        obj = read_json(args.family, "family")
        if not isinstance(obj, list) or not obj:
            raise UsageError("family file must hold a non-empty list of Dist objects")
        params["family_sha256"] = file_hash(args.family)
        if args.d:
            raise UsageError("family search builds seedless tables; --d must be 0")
    cp = CondenserParams(n=args.n, m=args.m, k=args.k, kprime=args.kprime, eps=args.eps, d=args.d)

    def compute():
        if args.family:
            fam = [Dist.from_json(o) for o in obj]
            tab = search_family_condenser(fam, cp, mode=args.mode, budget=args.budget,
                                          rng_seed=args.seed)
            return {"found": tab is not None, "table": tab.to_json() if tab else None,
                    "params": cp.to_json(), "passed": tab is not None}
        prim = search_primitive(cp, args.trials, args.seed)
        return {"found": prim is not None, "primitive": prim.to_json() if prim else None,
                "passed": prim is not None}

    res = cached(args, {"command": "search", "params": params, "seed": args.seed}, compute)
    return params, res


def _chain(obj) -> ChainConfig:
    for key in ("stages", "final_block"):
        if key not in obj:
            raise UsageError("chain file is missing field '%s'" % key)
    fb = obj["final_block"]
    if not isinstance(fb, list) or len(fb) != 2:
        raise UsageError("chain field 'final_block' must be [n, k]")
    return ChainConfig(tuple(SeededPrimitive.from_json(s) for s in obj["stages"]),
                       (int(fb[0]), float(fb[1])))


def cmd_compose(args):
    if args.bucket is not None:
        b = bucket_schedule(args.bucket)
        return {"bucket": args.bucket}, {"schedule": list(b), "length": len(b), "passed": True}
    if not args.chain:
        raise UsageError("compose needs --chain FILE or --bucket T")
    cfg = _chain(read_json(args.chain, "chain"))
    table, params = compose_chain(cfg)
    out = {"composed": params.to_json(), "gaps": cfg.gaps(), "errors": cfg.errors(),
           "passed": True}
    p = {"chain_sha256": file_hash(args.chain)}
    if args.source:
        src = BlockDist.from_json(read_json(args.source, "source"))
        if src.spec.lengths != cfg.lengths:
            raise UsageError("source blocks %s do not match chain blocks %s"
                             % (src.spec.lengths, cfg.lengths))
        ok, margins = verify_block_source(src.with_floors(cfg.floors))
        measured = smooth_min_entropy(push_forward(table, src.joint), params.eps).value
        out.update({"source_meets_floors": ok, "floor_margins": margins, "measured": measured,
                    "guaranteed": params.kprime,
                    "passed": (not ok) or measured >= params.kprime - TOL})
        p["source_sha256"] = file_hash(args.source)
    return p, out


def cmd_nm_verify(args):
    if args.suite:
        suite = read_json(args.suite, "nm suite")
        p = {"suite_sha256": file_hash(args.suite)}
    else:
        suite = shipped.load("nm_suite.json")
        p = {"suite": "shipped"}
    for key in ("condenser", "instances"):
        if key not in suite:
            raise UsageError("nm suite is missing field '%s'" % key)
    c, instances = shipped.nm_instances(suite)
    verdicts = pool_map(args, lambda inst: nm_verify(c, inst), instances)
    rows = [{"index": i, "good": inst.good, **v.to_json(), "counted": v.counted}
            for i, (inst, v) in enumerate(zip(instances, verdicts))]
    counted = [v for v in verdicts if v.counted]
    viol = sum(not v.holds for v in counted)
    return p, {"rows": rows, "instances": len(rows), "counted": len(counted),
               "vacuous": sum(v.vacuous for v in verdicts),
               "informative": sum(v.informative for v in verdicts),
               "violations": viol, "passed": viol == 0}


def cmd_purify(args):
    if args.config:
        obj = read_json(args.config, "pipeline")
        p = {"config_sha256": file_hash(args.config)}
    else:
        obj = shipped.load("micro_pipeline.json")
        p = {"config": "shipped"}
    cfg, src = shipped.pipeline(obj)
    _, report = toy_pipeline(src, cfg)
    report["passed"] = report["holds"]
    if args.figures:
        from .plotting import stage_entropies
        stage_entropies(report["stages"], args.figures)
    return p, report


def cmd_mc(args):
    point = read_json(args.point, "parameter point") if args.point else {}
    if not isinstance(point, dict):
        raise UsageError("parameter point must be a JSON object")
    given = {"n": args.n, "k": args.k, "ell": args.l, "g": args.g, "eps": args.eps,
             "trials": args.trials, "source_seed": args.source_seed}
    point.update({k: v for k, v in given.items() if v is not None})
    point.setdefault("source_seed", args.seed)
    trials = point.get("trials")
    if trials is None:
        raise UsageError("--trials is required")
    for key in ("n", "k", "ell", "g", "eps"):
        if point.get(key) is None:
            raise UsageError("missing parameter '%s'" % key)
    params = shipped.mc_params(point)
    x = shipped.mc_source(point)
    r = mc_failure_rate(x, params, int(trials), args.seed, jobs=args.jobs)
    row = {"n": params.n, "k": params.k, "ell": point["ell"], "g": params.g, "m": params.m,
           "eps": params.eps, "trials": r.trials, "failures": r.failures, "rate": r.rate,
           "part1": r.part1, "part2": r.part2, "pvalue": r.binom_pvalue, "seed": args.seed}
    if args.append:
        fresh = not os.path.exists(args.append)
        with open(args.append, "a", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=MC_COLUMNS, lineterminator="\n")
            if fresh:
                w.writeheader()
            w.writerow(plain(row))
    if args.figures:
        from .plotting import mc_summary
        mc_summary(r.rate, r.part1, r.part2, r.trials, args.figures)
    p = {k: v for k, v in point.items() if k != "trials"}
    p["trials"] = int(trials)
    return p, {"rows": [row], "bound": r.bound, "passed": r.binom_pvalue >= args.alpha}


def cmd_bounds(args):
    if args.phi_grid:
        from .existential import default_phi_grid
        g, a = default_phi_grid(args.grid_points)
        res = phi_checks(g, a)
        if args.figures:
            from .plotting import phi_margin_plot
            gg, fam = phi_margins(g, a)
            phi_margin_plot(g, {k: v.min(axis=1) for k, v in fam.items()}, args.figures)
        return {}, {**res, "passed": res["violations"] == 0}
    for key in ("eps", "k", "l", "g"):
        if getattr(args, key) is None:
            raise UsageError("bounds needs --%s (or --phi-grid)" % key)
    b = BoundInputs(eps=args.eps, k=args.k, ell=args.l, g=args.g, C=args.C)
    out = {"part1": part1_bound(b), "part2": part2_bound(b)}
    out["vacuous"] = min(out["part1"], out["part2"]) >= 1
    if args.C is not None:
        out["psi"], out["psi_branch"] = psi(b)
    out["passed"] = True
    return {"eps": args.eps, "k": args.k, "l": args.l, "g": args.g, "C": args.C}, out


def cmd_impossible(args):
    t, n, m = args.t, args.n, args.m
    if args.function:
        fns = [FunctionTable.from_json(read_json(args.function, "function"))]
        p = {"function_sha256": file_hash(args.function)}
    else:
        fns = [FunctionTable(t * n, m, stream(args.seed, i).integers(0, 1 << m, 1 << (t * n)))
               for i in range(args.trials)]
        p = {"trials": args.trials, "m": m}
    p.update({"t": t, "n": n, "g": args.g, "eps": args.eps})

    def one(f):
        if t == 1:
            r = break_general(f, args.g, args.eps)
            return {"measured": r.measured, "bound": r.bound, "slack": r.slack,
                    "source_ok": True}
        r = break_cg(f, t, n, args.g, args.eps)
        return {"measured": r.measured, "bound": r.bound, "slack": r.slack,
                "source_ok": verify_block_source(r.source)[0]}

    rows = pool_map(args, one, fns)
    for i, r in enumerate(rows):
        r["index"] = i
    viol = sum((r["slack"] < -1e-9) or not r["source_ok"] for r in rows)
    if args.figures:
        from .plotting import slack_histogram
        slack_histogram([r["slack"] for r in rows], args.figures)
    return p, {"rows": rows, "violations": viol, "passed": viol == 0}


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--cache", help="cache directory (ENTROPY_FORGE_CACHE overrides)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads; never changes results")
    common.add_argument("--figures", help="write PNG figures into this directory")

    ap = argparse.ArgumentParser(prog="entropy-forge", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("entropy", parents=[common], help="smooth min-entropy of a Dist file")
    s.add_argument("--dist", required=True)
    s.add_argument("--eps", type=float, default=0.0)
    s.add_argument("--k", type=float)
    s.set_defaults(fn=cmd_entropy)

    for name, fn in (("verify-ext", cmd_verify_ext), ("verify-cond", cmd_verify_cond)):
        s = sub.add_parser(name, parents=[common], help="exact worst-case error of a primitive")
        s.add_argument("--primitive", required=True)
        s.add_argument("--k", type=float)
        if name == "verify-cond":
            s.add_argument("--kprime", type=float)
        s.add_argument("--claim", type=float, help="error to test against (default: params.eps)")
        s.add_argument("--sampled", action="store_true",
                       help="per-symbol lower bound instead of exhaustive sets")
        s.set_defaults(fn=fn)

    s = sub.add_parser("search", parents=[common], help="random search for a primitive")
    for key in ("n", "m"):
        s.add_argument("--" + key, type=int, required=True)
    s.add_argument("--d", type=int, default=0)
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--kprime", type=float, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--family", help="JSON list of Dists; searches a seedless table")
    s.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    s.add_argument("--budget", type=int, default=1 << 20)
    s.set_defaults(fn=cmd_search)

    s = sub.add_parser("compose", parents=[common], help="chain composition or bucket schedule")
    s.add_argument("--chain")
    s.add_argument("--source", help="BlockDist to evaluate the chain on")
    s.add_argument("--bucket", type=int, help="print the bucket schedule for t")
    s.set_defaults(fn=cmd_compose)

    s = sub.add_parser("nm-verify", parents=[common], help="check the non-malleable condenser bound")
    s.add_argument("--suite", help="suite JSON (default: shipped)")
    s.set_defaults(fn=cmd_nm_verify)

    s = sub.add_parser("purify", parents=[common], help="run the toy purification pipeline")
    s.add_argument("--config", help="pipeline JSON (default: shipped)")
    s.set_defaults(fn=cmd_purify)

    s = sub.add_parser("mc-existential", parents=[common], help="Monte Carlo of random condensers")
    s.add_argument("--point", help="parameter point JSON (keys n, k, ell, g, eps, trials)")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=float)
    s.add_argument("--l", type=float)
    s.add_argument("--g", type=float)
    s.add_argument("--eps", type=float)
    s.add_argument("--trials", type=int)
    s.add_argument("--source-seed", type=int)
    s.add_argument("--alpha", type=float, default=1e-3)
    s.add_argument("--append", help="append the result row to this CSV")
    s.set_defaults(fn=cmd_mc)

    s = sub.add_parser("bounds", parents=[common], help="explicit bounds and inequality grids")
    s.add_argument("--phi-grid", action="store_true")
    s.add_argument("--grid-points", type=int, default=100)
    for key in ("eps", "k", "l", "g", "C"):
        s.add_argument("--" + key, type=float)
    s.set_defaults(fn=cmd_bounds)

    s = sub.add_parser("impossible", parents=[common], help="adversarial sources against f")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, default=4)
    s.add_argument("--g", type=int, required=True)
    s.add_argument("--eps", type=float, default=0.0)
    s.add_argument("--t", type=int, default=1)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--function", help="FunctionTable JSON (default: random tables)")
    s.set_defaults(fn=cmd_impossible)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.time()
    try:
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        extra, results = args.fn(args)
    except (UsageError, ValueError, KeyError, TypeError) as exc:
        msg = exc.args[0] if exc.args else repr(exc)
        if isinstance(exc, KeyError):
            msg = "missing field '%s'" % msg
        print("entropy-forge %s: error: %s" % (args.command, msg), file=sys.stderr)
        return 2
    params = {k: v for k, v in vars(args).items()
              if k not in _NOT_PARAMS and k != "fn" and v is not None}
    params.update(extra)
    rep = make_report(args.command, params, args.seed, results, started)
    text = to_csv(rep) if args.format == "csv" else json.dumps(rep, indent=1, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if results.get("passed", True) else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
