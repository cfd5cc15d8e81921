"""Command-line entry point.

    gaussregret regret      --spec A.json [--method auto|exact|cells|quadrature|mc]
    gaussregret redundancy  --spec A.json
    gaussregret intrinsic   --spec K.json
    gaussregret complexity  --spec A.json [--format csv|json]
    gaussregret predict     --spec A.json --predictor nml|ridge|net --input y.csv
    gaussregret verify      --suite NAME|all [--trials T]

Values are in nats unless ``--bits`` is given, which divides log-scale
outputs by log 2 when they are printed and nowhere else.  The seed defaults
to $GAUSS_REGRET_SEED (or 0); every random stream is derived from it, so a
repeated invocation prints the same bytes.

Exit status: 0 on success, 1 when a verification suite fails, 2 for usage
and parse errors, 3 when an estimator fails to converge or a spec/method
combination is unsupported.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import sets as S
from ._numerics import ConvergenceError
from .estimate import MCConfig

SEED_ENV = "GAUSS_REGRET_SEED"
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ESTIMATOR = 0, 1, 2, 3
LN2 = math.log(2.0)


class UsageError(Exception):
    """Inconsistent flags or unreadable input."""


class UnsupportedRequest(Exception):
    """A spec/method combination the estimators do not cover."""


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    spec: str | None = None
    method: str = "auto"
    samples: int = 200_000
    batches: int = 16
    seed: int = 0
    tol: float | None = None
    sigma: float = 1.0
    repeat_n: int = 1
    fmt: str = "json"
    bits: bool = False

    def mc(self) -> MCConfig:
        return MCConfig(samples=self.samples, batches=self.batches, seed=self.seed)

    def unit(self, x: float) -> float:
        return x / LN2 if self.bits else x


# ------------------------------------------------------------------ output

def _num(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for v in row])
    return buf.getvalue()


# ------------------------------------------------------------ subcommands

def _load(cfg: RunConfig) -> S.SetSpec:
    if cfg.spec is None:
        raise UsageError("--spec is required")
    try:
        return S.load_spec(cfg.spec)
    except OSError as exc:
        raise UsageError(f"cannot read spec {cfg.spec}: {exc.strerror}") from exc


def cmd_regret(cfg: RunConfig, args) -> tuple[str, int]:
    from .regret import regret

    spec = _load(cfg)
    t = math.sqrt(cfg.repeat_n) / cfg.sigma
    if t != 1.0:
        spec = S.Scale(t, spec)
    kw = {"method": cfg.method, "cfg": cfg.mc()}
    if cfg.tol is not None:
        kw["tol"] = cfg.tol
    est = regret(spec, **kw)
    doc = {"value": cfg.unit(est.value), "half_width": cfg.unit(est.half_width),
           "method": est.method, "samples": int(est.samples),
           "seed": None if est.seed is None else int(est.seed),
           "units": "bits" if cfg.bits else "nats"}
    if est.flags:
        doc["flags"] = list(est.flags)
    return _dump(doc), EXIT_OK


def cmd_redundancy(cfg: RunConfig, args) -> tuple[str, int]:
    from .coding import redundancy_bounds

    rb = redundancy_bounds(_load(cfg), MCConfig(samples=min(cfg.samples, 64_000),
                                                batches=cfg.batches, seed=cfg.seed))
    doc = {"lower": cfg.unit(rb.lower), "upper": cfg.unit(rb.upper),
           "lower_route": rb.lower_route, "upper_route": rb.upper_route,
           "flags": list(rb.flags), "seed": cfg.seed, "units": "bits" if cfg.bits else "nats",
           "routes": [{"side": sd, "route": nm, "value": cfg.unit(v)} for sd, nm, v in rb.routes]}
    if rb.near_exact is not None:
        doc["near_exact"] = {"value": cfg.unit(rb.near_exact.value),
                             "half_width": cfg.unit(rb.near_exact.half_width),
                             "method": rb.near_exact.method}
    return _dump(doc), EXIT_OK


def cmd_intrinsic(cfg: RunConfig, args) -> tuple[str, int]:
    from .intrinsic import exact_volumes, mc_volumes

    spec = _load(cfg)
    seq = None
    if cfg.method in ("auto", "exact"):
        try:
            seq = exact_volumes(spec)
        except (NotImplementedError, S.SetSpecError, TypeError):
            if cfg.method == "exact":
                raise UnsupportedRequest(f"no closed-form intrinsic volumes for {spec.kind}")
    if seq is None:
        if cfg.method not in ("auto", "mc"):
            raise UnsupportedRequest(f"intrinsic does not support method {cfg.method!r}")
        seq = mc_volumes(spec, samples=min(cfg.samples, 20_000), seed=cfg.seed, batches=cfg.batches)
    se = seq.std_errors if seq.std_errors is not None else np.zeros(seq.values.size)
    rows = [(j, float(v), float(s)) for j, (v, s) in enumerate(zip(seq.values, se))]
    return _csv(("j", "V_j", "SE"), rows), EXIT_OK


def cmd_complexity(cfg: RunConfig, args) -> tuple[str, int]:
    from .complexity import complexity_profile

    prof = complexity_profile(_load(cfg), MCConfig(samples=min(cfg.samples, 4000),
                                                   batches=cfg.batches, seed=cfg.seed))
    table = _csv(("r", "w_A(r)", "SE", "logN_lo", "logN_hi"),
                 [(r, w, s, cfg.unit(lo), cfg.unit(hi)) for r, w, s, lo, hi in prof.rows()])
    if args.profile:
        with open(args.profile, "w", encoding="utf-8", newline="") as fh:
            fh.write(table)
    if cfg.fmt == "csv":
        return table, EXIT_OK
    summary = prof.summary()
    summary["units"] = "nats"
    return _dump(summary), EXIT_OK


def _read_sequences(path: str, dim: int) -> list[np.ndarray]:
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise UsageError(f"cannot read input {path}: {exc.strerror}") from exc
    out = []
    with fh:
        for line, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                y = np.array([float(v) for v in row])
            except ValueError as exc:
                raise UsageError(f"{path}: line {line}: {exc}") from exc
            if y.size != dim:
                raise UsageError(f"{path}: line {line}: expected {dim} values, got {y.size}")
            if not np.all(np.isfinite(y)):
                raise UsageError(f"{path}: line {line}: non-finite value")
            out.append(y)
    if not out:
        raise UsageError(f"{path}: no sequences")
    return out


def _predictor(spec: S.SetSpec, cfg: RunConfig, args):
    from . import coding as C

    if args.predictor == "nml":
        return C.NML.over(spec, method=cfg.method, cfg=cfg.mc())
    if args.predictor == "ridge":
        base = spec
        if not (isinstance(base, S.Ellipsoid) and np.allclose(base.symmetry_center, 0)):
            raise UnsupportedRequest("the ridge predictor needs an origin-centred ellipsoid comparator")
        if args.auto_lambda:
            lam, _ = C.choose_lambda(base.axes)
        elif args.lam is not None:
            lam = args.lam
        else:
            raise UsageError("ridge needs --lambda or --auto-lambda")
        return C.ridge_predictor(base.axes, lam)
    P = S.as_points(spec)
    if P is None:
        from .complexity import dense_sample, gonzalez

        r = args.net_radius
        Q = dense_sample(spec, r / 2.0)
        order, radii = gonzalez(Q)
        k = int(np.searchsorted(-radii[1:], -r / 2.0, side="right")) + 1
        P = Q[np.sort(order[:k])]
    return C.NetMixture(S.FinitePoints(P))


def cmd_predict(cfg: RunConfig, args) -> tuple[str, int]:
    from .coding import regret_on_sequence

    if args.input is None:
        raise UsageError("--input is required")
    spec = _load(cfg)
    pred = _predictor(spec, cfg, args)
    rows = []
    for s, y in enumerate(_read_sequences(args.input, spec.dim)):
        rec = regret_on_sequence(pred, spec, y)
        steps = ["joint"] if "joint_only" in rec.flags else range(1, rec.per_step_loss.size + 1)
        cum = 0.0
        for i, (t, loss) in enumerate(zip(steps, rec.per_step_loss)):
            cum += float(loss)
            last = i == rec.per_step_loss.size - 1
            rows.append((s, t, cfg.unit(float(loss)), cfg.unit(cum),
                         cfg.unit(rec.comparator_loss) if last else None,
                         cfg.unit(rec.regret) if last else None))
    return _csv(("sequence", "step", "loss", "cumulative", "comparator_loss", "regret"), rows), EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> tuple[str, int]:
    from .verify import SUITES, report_json, run_suites, summary_table

    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    for name in names:
        if name not in SUITES:
            raise UsageError(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))} or all")
    checks = run_suites(names, args.trials, cfg.seed)
    report = report_json(checks, cfg.seed, args.trials, with_instances=args.instances)
    sys.stderr.write(summary_table(checks) + "\n")
    verdict = json.loads(report)["verdict"]
    return report + "\n", EXIT_FAIL if verdict == "fail" else EXIT_OK


COMMANDS = {
    "regret": cmd_regret, "redundancy": cmd_redundancy, "intrinsic": cmd_intrinsic,
    "complexity": cmd_complexity, "predict": cmd_predict, "verify": cmd_verify,
}


# ---------------------------------------------------------------- parsing

def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"master seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo sample budget")
    common.add_argument("--batches", type=int, default=16, help="batches for batch-means errors")
    common.add_argument("--bits", action="store_true", help="print log-scale values in bits")
    common.add_argument("-o", "--output", help="write to this file instead of stdout")

    p = argparse.ArgumentParser(prog="gaussregret", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="subcommand", required=True)

    r = sub.add_parser("regret", parents=[common], help="minimax regret R*(A)")
    r.add_argument("--spec", required=True)
    r.add_argument("--method", default="auto", choices=["auto", "exact", "cells", "quadrature", "mc"])
    r.add_argument("--tol", type=float, default=None, help="quadrature tolerance")
    r.add_argument("--sigma", type=float, default=1.0, help="noise level")
    r.add_argument("--repeat-n", type=int, default=1, help="number of i.i.d. observations")

    d = sub.add_parser("redundancy", parents=[common], help="bounds on the minimax redundancy")
    d.add_argument("--spec", required=True)

    i = sub.add_parser("intrinsic", parents=[common], help="intrinsic volumes as CSV")
    i.add_argument("--spec", required=True)
    i.add_argument("--method", default="auto", choices=["auto", "exact", "mc"])

    c = sub.add_parser("complexity", parents=[common], help="local widths, coverings, fixed points")
    c.add_argument("--spec", required=True)
    c.add_argument("--format", dest="fmt", default="csv", choices=["csv", "json"])
    c.add_argument("--profile", help="also write the CSV profile to this path")

    q = sub.add_parser("predict", parents=[common], help="run a predictor on sequences")
    q.add_argument("--spec", required=True, help="comparator set")
    q.add_argument("--predictor", required=True, choices=["nml", "ridge", "net"])
    q.add_argument("--lambda", dest="lam", type=float, default=None)
    q.add_argument("--auto-lambda", action="store_true")
    q.add_argument("--net-radius", type=float, default=1.0,
                   help="cover radius for net mixtures over continuous sets")
    q.add_argument("--method", default="auto", choices=["auto", "exact", "cells", "quadrature", "mc"],
                   help="how the NML normalizer is computed")
    q.add_argument("--input", required=True, help="CSV, one sequence y per row")

    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", required=True)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--instances", action="store_true", help="include per-instance records")
    return p


def config_from_args(args) -> RunConfig:
    seed = args.seed if args.seed is not None else _default_seed()
    method = getattr(args, "method", "auto")
    tol = getattr(args, "tol", None)
    if tol is not None and method not in ("auto", "quadrature"):
        raise UsageError("--tol applies only to quadrature (method auto or quadrature)")
    if tol is not None and not tol > 0:
        raise UsageError("--tol must be positive")
    samples = args.samples if args.samples is not None else 200_000
    if samples < args.batches or args.batches < 2:
        raise UsageError("need --samples >= --batches >= 2")
    sigma = getattr(args, "sigma", 1.0)
    repeat_n = getattr(args, "repeat_n", 1)
    if not sigma > 0:
        raise UsageError("--sigma must be positive")
    if repeat_n < 1:
        raise UsageError("--repeat-n must be >= 1")
    if getattr(args, "lam", None) is not None and getattr(args, "auto_lambda", False):
        raise UsageError("--lambda and --auto-lambda are mutually exclusive")
    if args.subcommand == "verify" and args.trials < 1:
        raise UsageError("--trials must be positive")
    return RunConfig(args.subcommand, getattr(args, "spec", None), method, samples, args.batches,
                     seed, tol, sigma, repeat_n, getattr(args, "fmt", "json"), args.bits)


def run(cfg: RunConfig, args) -> tuple[str, int]:
    return COMMANDS[cfg.subcommand](cfg, args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        text, status = run(cfg, args)
    except S.SpecParseError as exc:
        sys.stderr.write(f"gaussregret: spec error: {exc}\n")
        return EXIT_USAGE
    except UsageError as exc:
        sys.stderr.write(f"gaussregret: {exc}\n")
        return EXIT_USAGE
    except (UnsupportedRequest, S.UnsupportedComposition, NotImplementedError) as exc:
        sys.stderr.write(f"gaussregret: unsupported: {exc}\n")
        return EXIT_ESTIMATOR
    except (ConvergenceError, S.SetSpecError, ValueError, FloatingPointError) as exc:
        sys.stderr.write(f"gaussregret: estimator failure: {type(exc).__name__}: {exc}\n")
        return EXIT_ESTIMATOR
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


__all__ = ["RunConfig", "build_parser", "config_from_args", "run", "main", "SEED_ENV"]
