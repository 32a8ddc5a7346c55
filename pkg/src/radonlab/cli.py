"""Command-line front end.

Every subcommand reads flags, optionally merged over a JSON ``--config``
(flags win), validates the whole configuration, runs, and writes one CSV table
or one JSON document. Exit status: 0 all checks passed, 1 a checked inequality
or identity failed (witness written to stderr), 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import normlab, reduce, regions, sparse, weyl
from .averages import MomentCurveAverage, PolynomialAverage
from .errors import RadonlabError
from .poly import IntPolynomial
from .signal import Signal

SEED_LIMIT = 2**64
MAX_N = 2**12


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# value parsing shared by flags and config files

def _int(v, name, lo=None):
    try:
        out = int(v)
    except (TypeError, ValueError):
        raise UsageError(f"{name}: expected an integer, got {v!r}")
    if isinstance(v, float) and v != out:
        raise UsageError(f"{name}: expected an integer, got {v!r}")
    if lo is not None and out < lo:
        raise UsageError(f"{name}: must be >= {lo}")
    return out


def _grid(v, name="n"):
    items = v if isinstance(v, list) else str(v).split(",")
    ns = [_int(x, name, 1) for x in items if str(x).strip() != ""]
    if not ns:
        raise UsageError(f"{name}: empty grid")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise UsageError(f"{name}: grid must be strictly increasing")
    if ns[-1] > MAX_N:
        raise UsageError(f"{name}: N is capped at {MAX_N}")
    return ns


def _rational(v, name):
    if isinstance(v, float):
        v = repr(v)
    try:
        return regions.parse_rational(str(v) if not isinstance(v, (int, Fraction)) else v)
    except RadonlabError as e:
        raise UsageError(f"{name}: {e}")


def _exponent(v, name):
    r = _rational(v, name)
    if r != regions.INF and r < 1:
        raise UsageError(f"{name}: exponent must be >= 1")
    return r


def _fraction_text(r) -> str:
    return "inf" if r == regions.INF else str(r)


def _poly(v):
    try:
        return IntPolynomial.parse(v if isinstance(v, str) else ",".join(map(str, v)))
    except (RadonlabError, ValueError, ZeroDivisionError) as e:
        raise UsageError(f"poly: {e}")


def _seed(cfg, needed: bool):
    s = cfg.get("seed")
    if s is None:
        if needed:
            raise UsageError("--seed is required for randomized runs")
        return None
    s = _int(s, "seed", 0)
    if s >= SEED_LIMIT:
        raise UsageError("seed must fit in 64 bits")
    return s


def _rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 stream keyed by the seed and a row/trial path."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *stream])))


def _num(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


# ---------------------------------------------------------------------------
# output

class Report:
    def __init__(self, command: str, config: dict, columns: list[str]):
        self.command = command
        self.config = config
        self.columns = columns
        self.rows: list[dict] = []
        self.summary: dict = {}
        self.witnesses: list[dict] = []
        self.document: dict | None = None   # replaces the generic JSON layout when set

    def add(self, **row):
        self.rows.append({k: _num(row.get(k, "")) for k in self.columns})

    def fail(self, what: str, **detail):
        self.witnesses.append({"check": what, **{k: _num(v) for k, v in detail.items()}})

    @property
    def exit_code(self) -> int:
        return 1 if self.witnesses else 0

    def render(self, fmt: str) -> str:
        if fmt == "json" and self.document is not None:
            return json.dumps(self.document, indent=2) + "\n"
        if fmt == "json":
            doc = {"command": self.command, "config": self.config, "rows": self.rows,
                   "summary": {k: _num(v) for k, v in self.summary.items()},
                   "witnesses": self.witnesses}
            return json.dumps(doc, indent=2, sort_keys=False) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(r[c]) for c in self.columns])
        return buf.getvalue()


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


# ---------------------------------------------------------------------------
# commands

def cmd_region(cfg) -> Report:
    which = cfg.get("which")
    try:
        which = regions.Which(which)
    except ValueError:
        raise UsageError(f"--which must be one of {[w.value for w in regions.Which]}")
    d = _int(cfg.get("d", 2), "d", 1)
    if cfg.get("p") is None or cfg.get("q") is None:
        raise UsageError("--p and --q are required")
    p, q = _exponent(cfg["p"], "p"), _exponent(cfg["q"], "q")
    lam = cfg.get("lam")
    if which == regions.Which.CONJ_I:
        if lam is None:
            raise UsageError("--lambda is required for conj-i")
        lam = _rational(lam, "lambda")
        if lam == regions.INF or not 0 < lam < 1:
            raise UsageError("lambda must lie in (0, 1)")
    e = regions.ExponentPair.of(p, q)
    v = regions.evaluate(which, e, d, lam)
    rep = Report("region", _echo(cfg), ["constraint", "strict", "value", "holds"])
    for row in v.evaluated:
        rep.add(**row)
    rep.summary = {"member": v.member}
    rep.document = {"which": which.value, "d": d, "p": _fraction_text(p), "q": _fraction_text(q),
                         "lambda": None if lam is None else str(lam), **v.to_dict()}
    return rep


def cmd_mean_value(cfg) -> Report:
    d = _int(cfg.get("d", 2), "d", 1)
    m = _int(cfg.get("m", 2), "m", 1)
    ns = _grid(cfg.get("n", "8"))
    budget = _int(cfg.get("budget", weyl.DEFAULT_TUPLE_BUDGET), "budget", 1)
    workers = cfg.get("workers")
    workers = None if workers is None else _int(workers, "workers", 1)
    brute = bool(cfg.get("brute_check", False))
    for N in ns:
        if N**m > budget:
            raise UsageError(f"N={N}: {N}^{m} m-tuples exceeds budget {budget}")
    rep = Report("mean-value", _echo(cfg), ["d", "m", "N", "J", "norm", "wall_ms"])
    recs = []
    for N in ns:
        r = weyl.mean_value_exact(N, d, m, workers=workers, budget=budget)
        recs.append(r)
        rep.add(d=d, m=m, N=N, J=r.J, norm=r.norm, wall_ms=round(r.wall_ms, 3))
        if brute:
            b = weyl.mean_value_brute(N, d, m)
            if b != r.J:
                rep.fail("mitm-vs-brute", d=d, m=m, N=N, mitm=r.J, brute=b)
    if len(recs) >= 2:
        fit = weyl.exponent_fit(recs)
        rep.summary = {"slope": fit.slope, "predicted": 2 * m - d * (d + 1) / 2}
    return rep


def _operator(cfg, N):
    if cfg.get("poly") is not None:
        return PolynomialAverage(_poly(cfg["poly"]), N)
    return MomentCurveAverage(_int(cfg.get("dim", 2), "dim", 1), N)


def _pq(cfg):
    if cfg.get("p") is None:
        raise UsageError("--p is required")
    p = _exponent(cfg["p"], "p")
    if cfg.get("dual"):
        if cfg.get("q") is not None:
            raise UsageError("give either --q or --dual")
        q = regions.dual(p)
    elif cfg.get("q") is not None:
        q = _exponent(cfg["q"], "q")
    else:
        raise UsageError("--q or --dual is required")
    return p, q


def cmd_improving(cfg) -> Report:
    p, q = _pq(cfg)
    ns = _grid(cfg.get("n", "8,16,32"))
    trials = _int(cfg.get("trials", 0), "trials", 0)
    seed = _seed(cfg, trials > 0) or 0
    ops = [_operator(cfg, N) for N in ns]
    rep = Report("improving", _echo(cfg), ["N", "p", "q", "best_ratio", "family", "slope_so_far"])
    best = []
    for i, op in enumerate(ops):
        res = normlab.search_near_extremal(op, _float(p), _float(q), trials, seed + i if trials else 0)
        best.append(res.best)
        # q >= p: ||A f||_q <= ||A f||_p <= ||f||_p bounds every ratio by 1
        if _float(q) >= _float(p) and res.best.ratio > 1 + 1e-12:
            rep.fail("ratio-above-trivial-bound", N=op.N, ratio=res.best.ratio, tag=res.best.tag,
                     signal=json.loads(_dense(res.witness).to_json()))
        slope = normlab.improvement_fit(best).slope if len(best) >= 2 else ""
        rep.add(N=op.N, p=_fraction_text(p), q=_fraction_text(q), best_ratio=res.best.ratio,
                family=res.best.tag, slope_so_far=slope)
    if len(best) >= 2:
        rep.summary = {"slope": normlab.improvement_fit(best).slope,
                       "improvement_exponent": normlab.improvement_exponent(ops[0], _float(p), _float(q))}
    return rep


def _float(r) -> float:
    return math.inf if r == regions.INF else float(r)


def cmd_sharpness(cfg) -> Report:
    p, q = _pq(cfg)
    ns = _grid(cfg.get("n", "4,8,16"))
    tol = float(cfg.get("tol", 1e-9))
    rep = Report("sharpness", _echo(cfg), ["family", "N", "witness", "predicted", "error", "ok"])
    for N in ns:
        op = _operator(cfg, N)
        for fam in normlab.families_for(op):
            m = normlab.measure_family(fam, op, _float(p), _float(q))
            ok = m.ok(tol)
            rep.add(family=fam.value, N=N, witness=m.witness, predicted=m.predicted, error=m.error, ok=ok)
            if not ok:
                rep.fail("family", family=fam.value, N=N, witness=m.witness, predicted=m.predicted)
    return rep


def _random_nonneg(rng, lo, hi, N, trial):
    kind = normlab.RANDOM_KINDS[trial % len(normlab.RANDOM_KINDS)]
    return Signal(normlab.random_signal(rng, kind, (hi - lo + 1,), N), lo)


def cmd_transfer(cfg) -> Report:
    if cfg.get("quad") is None:
        raise UsageError("--quad a,b,c is required")
    try:
        t = reduce.QuadraticTriple.parse(str(cfg["quad"]))
    except (ValueError, RadonlabError) as e:
        raise UsageError(f"quad: {e} (negative b or c is not supported)")
    p = _exponent(cfg.get("p", "8/5"), "p")
    ns = _grid(cfg.get("n", "4,8,16,32,64"))
    trials = _int(cfg.get("trials", 0), "trials", 0)
    seed = _seed(cfg, trials > 0)
    pf = _float(p)
    pd = _float(regions.dual(p))
    rep = Report("transfer", _echo(cfg),
                 ["N", "trials", "min_slack", "best_ratio", "normalized", "family"])
    norms = []
    for i, N in enumerate(ns):
        op = PolynomialAverage(t.polynomial, N)
        corpus = [(f"family:{fam.value}", _dense(normlab.extremizer(fam, op).signal))
                  for fam in normlab.families_for(op)]
        for k in range(trials):
            corpus.append((f"random:{k}", _random_nonneg(_rng(seed, i, k), -4 * N, 4 * N, N, k)))
        worst, best = math.inf, None
        for tag, f in corpus:
            r = reduce.quadratic_transfer_check(t, N, f)
            worst = min(worst, r.min_slack)
            if not r.ok():
                rep.fail("quadratic-transfer", N=N, item=tag, x=r.argmin, slack=r.min_slack,
                         signal=json.loads(f.to_json()))
            if f.sum() > 0:
                s = normlab.ratio(op, f, pf, pd, tag)
                if best is None or s.ratio > best.ratio:
                    best = s
        nr = best.ratio / reduce.abc_normalization(t, N, pf)
        norms.append(nr)
        rep.add(N=N, trials=len(corpus), min_slack=worst, best_ratio=best.ratio, normalized=nr, family=best.tag)
    rep.summary = {"normalized_max_over_min": max(norms) / min(norms)}
    return rep


def _dense(f):
    return f.to_dense() if hasattr(f, "to_dense") else f


def cmd_lift(cfg) -> Report:
    if cfg.get("poly") is None:
        raise UsageError("--poly is required")
    P = _poly(cfg["poly"])
    if P.degree < 2:
        raise UsageError("lift needs degree >= 2")
    ns = _grid(cfg.get("n", "2,3,4"))
    trials = _int(cfg.get("trials", 10), "trials", 1)
    seed = _seed(cfg, True)
    r = _int(cfg.get("r", 0), "r", 0)
    q = _exponent(cfg.get("q", 2), "q")
    tol = float(cfg.get("tol", 1e-12))
    rep = Report("lift", _echo(cfg), ["N", "trial", "max_abs_diff", "cells", "norm_constant", "c_min_normalized"])
    for i, N in enumerate(ns):
        for k in range(trials):
            rng = _rng(seed, i, k)
            width = int(rng.integers(1, 4 * N + 1))
            g = Signal(rng.random(width), int(rng.integers(-2 * N, 2 * N + 1)))
            L = reduce.projection_lift(g, P, N, r)
            ident = reduce.lift_identity_check(L)
            sub = reduce.sublattice_lower_bound(L, _float(q))
            rep.add(N=N, trial=k, max_abs_diff=ident.max_abs_diff, cells=ident.cells,
                    norm_constant=L.norm_constant(_float(q)), c_min_normalized=sub.normalized_c)
            if not ident.ok(tol):
                rep.fail("lift-identity", N=N, trial=k, diff=ident.max_abs_diff, g=json.loads(g.to_json()))
            if not sub.ok():
                rep.fail("sublattice-bound", N=N, trial=k, lhs=sub.lhs, full=sub.full, g=json.loads(g.to_json()))
    return rep


def cmd_fractional(cfg) -> Report:
    P = _poly(cfg.get("poly", "0,0,1"))
    if cfg.get("lam") is None:
        raise UsageError("--lambda is required")
    lam = _rational(cfg["lam"], "lambda")
    if lam == regions.INF or not 0 < lam < 1:
        raise UsageError("lambda must lie in (0, 1)")
    ns = _grid(cfg.get("n", "4,16,64"))
    q = _exponent(cfg.get("q", 2), "q")
    K = _int(cfg.get("K", ns[-1]), "K", 1)
    trials = _int(cfg.get("trials", 10), "trials", 1)
    seed = _seed(cfg, True)
    rep = Report("fractional", _echo(cfg),
                 ["trial", "lambda", "K", "J", "pointwise_min_slack", "dyadic_min_slack", "norm_ratio", "ok"])
    for k in range(trials):
        rng = _rng(seed, k)
        f = _random_nonneg(rng, 0, int(rng.integers(1, 129)), ns[-1], k)
        if k == 0:
            f = Signal.delta(0)
        b = reduce.dyadic_bridge(P, float(lam), f, _float(q), ns, K)
        ok = b.ok()
        rep.add(trial=k, **{"lambda": str(lam)}, K=b.K, J=b.J,
                pointwise_min_slack=min(b.pointwise_min_slack.values()),
                dyadic_min_slack=b.dyadic_min_slack, norm_ratio=b.norm_ratio, ok=ok)
        if not ok:
            rep.fail("dyadic-bridge", trial=k, signal=json.loads(f.to_json()))
    return rep


def cmd_sparse(cfg) -> Report:
    P = _poly(cfg.get("poly", "0,0,1"))
    p = _exponent(cfg.get("p", "8/5"), "p")
    if cfg.get("q") is None:
        raise UsageError("--q is required")
    q = _exponent(cfg["q"], "q")
    nmax = _int(cfg.get("nmax", 16), "nmax", 1)
    corpus = _int(cfg.get("corpus", 10), "corpus", 1)
    seed = _seed(cfg, True)
    width = _int(cfg.get("width", 64), "width", 1)
    qd = regions.dual(q)
    rep = Report("sparse", _echo(cfg), ["trial", "pairing", "lambda_form", "ratio"])
    ratios = []
    for k in range(corpus):
        rng = _rng(seed, k)
        f = _random_nonneg(rng, 0, width - 1, nmax, k)
        span = int(P(nmax)) if P.degree >= 1 else 0
        g = _random_nonneg(rng, -abs(span), width - 1, nmax, k + 1)
        if f.sum() == 0 or g.sum() == 0:
            f, g = Signal.delta(0), Signal.delta(-int(P(1)))
        tr = sparse.sparse_trial(P, nmax, f, g, _float(p), _float(qd), k)
        ratios.append(tr.ratio)
        rep.add(trial=k, pairing=tr.pairing, lambda_form=tr.form, ratio=tr.ratio)
    rep.summary = {"max_ratio": max(ratios)}
    return rep


COMMANDS = {
    "region": cmd_region,
    "mean-value": cmd_mean_value,
    "improving": cmd_improving,
    "sharpness": cmd_sharpness,
    "transfer": cmd_transfer,
    "lift": cmd_lift,
    "fractional": cmd_fractional,
    "sparse": cmd_sparse,
}


def _echo(cfg) -> dict:
    return {k: _num(v) for k, v in sorted(cfg.items()) if k not in ("config", "out", "command") and v is not None}


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="radonlab", description="Experiments on discrete polynomial averages.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file of option values; flags win on conflict")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=["csv", "json"], default=None)
        return sp

    sp = common(sub.add_parser("region", help="exact membership in an exponent region"))
    sp.add_argument("--which", choices=[w.value for w in regions.Which])
    sp.add_argument("--d", type=int)
    sp.add_argument("--p")
    sp.add_argument("--q")
    sp.add_argument("--lambda", dest="lam")

    sp = common(sub.add_parser("mean-value", help="exact even moments of the Weyl sum"))
    sp.add_argument("--d", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--n", help="comma-separated, strictly increasing")
    sp.add_argument("--budget", type=int, help="max m-tuples enumerated per N")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--brute-check", action="store_true", default=None)

    for name, hlp in (("improving", "best l^p -> l^q ratio per N"),
                      ("sharpness", "closed-form extremizer families")):
        sp = common(sub.add_parser(name, help=hlp))
        sp.add_argument("--poly", help="coefficients c0,c1,... (fractions allowed)")
        sp.add_argument("--dim", type=int, help="moment-curve dimension when --poly is absent")
        sp.add_argument("--p")
        sp.add_argument("--q")
        sp.add_argument("--dual", action="store_true", default=None, help="use q = p'")
        sp.add_argument("--n")
        if name == "improving":
            sp.add_argument("--trials", type=int)
            sp.add_argument("--seed", type=int)
        else:
            sp.add_argument("--tol", type=float)

    sp = common(sub.add_parser("transfer", help="quadratic completing-the-square transfer"))
    sp.add_argument("--quad", help="a,b,c with a >= 1 and b, c >= 0")
    sp.add_argument("--p")
    sp.add_argument("--n")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)

    sp = common(sub.add_parser("lift", help="projection lift identity and lower bound"))
    sp.add_argument("--poly")
    sp.add_argument("--n")
    sp.add_argument("--r", type=int)
    sp.add_argument("--q")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--tol", type=float)

    sp = common(sub.add_parser("fractional", help="averages versus fractional integrals"))
    sp.add_argument("--poly")
    sp.add_argument("--lambda", dest="lam")
    sp.add_argument("--n")
    sp.add_argument("--q")
    sp.add_argument("--K", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)

    sp = common(sub.add_parser("sparse", help="maximal pairing against greedy sparse forms"))
    sp.add_argument("--poly")
    sp.add_argument("--p")
    sp.add_argument("--q")
    sp.add_argument("--nmax", type=int)
    sp.add_argument("--corpus", type=int)
    sp.add_argument("--width", type=int)
    sp.add_argument("--seed", type=int)
    return ap


def merged_config(args: argparse.Namespace) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"config: {e}")
        if not isinstance(loaded, dict):
            raise UsageError("config must be a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
        if cfg.get("lambda") is not None:
            cfg["lam"] = cfg.pop("lambda")
        if cfg.get("command", args.command) != args.command:
            raise UsageError(f"config is for {cfg['command']!r}, not {args.command!r}")
    cfg.update({k: v for k, v in vars(args).items() if v is not None})
    return cfg


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = merged_config(args)
        fmt = cfg.get("format") or ("json" if args.command == "region" else "csv")
        if fmt not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        rep = COMMANDS[args.command](cfg)
    except UsageError as e:
        print(f"radonlab {args.command}: {e}", file=sys.stderr)
        return 2
    except RadonlabError as e:
        print(f"radonlab {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    text = rep.render(fmt)
    if cfg.get("out"):
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for w in rep.witnesses:
        print(json.dumps(w), file=sys.stderr)
    return rep.exit_code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
