"""Command-line workbench: ``riskq {solve,eval-threshold,interval,sweep,simulate,verify}``.

Experiments are described by a JSON config; command-line flags override
config fields. Reports are JSON documents carrying the resolved config, so
``riskq <cmd> --config report.json`` reruns the same experiment.

Exit codes: 0 success, 2 config error, 3 property violation, 4 numeric failure.
"""

import argparse
import csv
import io
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version as pkg_version
from typing import List

import numpy as np

from . import analytics, oracle, rvi, simulate
from .errors import DomainError, NumericError, PropertyViolation
from .model import ModelParams, corrupted_kernel, differential, embed_continuous, q_factors, transition_kernel

SCHEMA_VERSION = 1
SWEEP_HEADER = ["C", "tau", "alpha", "rs_cost", "iterations"]

EXIT_OK, EXIT_CONFIG, EXIT_PROPERTY, EXIT_NUMERIC = 0, 2, 3, 4


class ConfigError(Exception):
    pass


def _version():
    try:
        return pkg_version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


# ---------------------------------------------------------------- config


def load_config(path):
    """Read a config document, or the ``config`` block of a previously written report."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON ({exc.msg})")
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    if "schema_version" in doc and isinstance(doc.get("config"), dict):
        doc = doc["config"]
    return doc


def _number(block, key, where, kind=float, required=True):
    value = block.get(key)
    if value is None:
        if required:
            raise ConfigError(f"field {where}.{key}: missing")
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field {where}.{key}: expected a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"field {where}.{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def merge_flags(cfg, args):
    """Overlay command-line flags on the config document (flags win)."""
    cfg = json.loads(json.dumps(cfg))
    model = cfg.setdefault("model", {})
    if not isinstance(model, dict):
        raise ConfigError("field model: expected an object")
    for flag, key in (("B", "B"), ("p", "p"), ("lam", "lambda"), ("mu", "mu"), ("C", "C"),
                      ("R", "R"), ("L", "L"), ("gamma", "gamma")):
        value = getattr(args, flag, None)
        if value is not None:
            model[key] = value
    if getattr(args, "p", None) is not None:
        model.pop("lambda", None)
        model.pop("mu", None)
    elif getattr(args, "lam", None) is not None or getattr(args, "mu", None) is not None:
        model.pop("p", None)

    if getattr(args, "C_grid", None) is not None:
        cfg.setdefault("sweep", {})["C_grid"] = args.C_grid
    for flag, key in (("horizon", "horizon"), ("replications", "replications"), ("initial_state", "initial_state")):
        if getattr(args, flag, None) is not None:
            cfg.setdefault("sim", {})[key] = getattr(args, flag)
    if getattr(args, "seed", None) is not None:
        cfg.setdefault("sim", {})["seed"] = args.seed
    if getattr(args, "policy", None) is not None:
        cfg.setdefault("sim", {})["policy"] = args.policy
    for flag, key in (("tau", "tau"), ("search_max_C", "search_max_C")):
        if getattr(args, flag, None) is not None:
            cfg.setdefault("interval", {})[key] = getattr(args, flag)
    for flag, key in (("tol", "tolerance"), ("max_iters", "max_iterations")):
        if getattr(args, flag, None) is not None:
            cfg.setdefault("rvi", {})[key] = getattr(args, flag)
    return cfg


def resolve_model(cfg, need_C=True):
    block = cfg.get("model")
    if not isinstance(block, dict) or not block:
        raise ConfigError("field model: missing")
    has_p = block.get("p") is not None
    has_rates = block.get("lambda") is not None or block.get("mu") is not None
    if has_p == has_rates:
        raise ConfigError("field model: give exactly one of {p} or {lambda, mu}")
    B = _number(block, "B", "model", int)
    if has_p:
        p = _number(block, "p", "model")
    else:
        lam, mu = _number(block, "lambda", "model"), _number(block, "mu", "model")
        try:
            p = embed_continuous(lam, mu)
        except DomainError as exc:
            raise ConfigError(f"field model.lambda/mu: {exc}")
    C = _number(block, "C", "model", required=need_C)
    values = dict(B=B, p=p, C=0.0 if C is None else C, R=_number(block, "R", "model"),
                  L=_number(block, "L", "model"), gamma=_number(block, "gamma", "model"))
    try:
        with warnings.catch_warnings():
            if C is None:
                warnings.simplefilter("ignore", UserWarning)
            return ModelParams(**values)
    except DomainError as exc:
        raise ConfigError(f"field model: {exc}")


def resolve_rvi(cfg):
    block = cfg.get("rvi") or {}
    kw = {}
    if block.get("tolerance") is not None:
        kw["tolerance"] = _number(block, "tolerance", "rvi")
    if block.get("max_iterations") is not None:
        kw["max_iterations"] = _number(block, "max_iterations", "rvi", int)
    try:
        return rvi.RviOptions(**kw)
    except DomainError as exc:
        raise ConfigError(f"field rvi: {exc}")


def parse_grid(text):
    """``"0.05,0.1,0.2"`` or ``"start:stop:count"`` (inclusive linspace)."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(n))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cost grid {text!r}")


def parse_policy(spec, model, opts):
    if spec in (None, "optimal"):
        return rvi.rvi_solve(model, opts).policy
    if isinstance(spec, str) and spec.startswith("threshold:"):
        try:
            tau = int(spec.split(":", 1)[1])
            return rvi.ThresholdPolicy(tau).actions(model.B)
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"field sim.policy: {exc}")
    actions = spec
    if isinstance(spec, str):
        try:
            actions = json.loads(spec)
        except json.JSONDecodeError:
            raise ConfigError(f"field sim.policy: expected threshold:<tau>, optimal or an action array, got {spec!r}")
    if not isinstance(actions, list) or len(actions) != model.n_states or any(a not in (0, 1) for a in actions):
        raise ConfigError(f"field sim.policy: action array must hold {model.n_states} entries of 0/1")
    return np.array(actions, dtype=int)


# ---------------------------------------------------------------- reports


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def make_report(command, cfg, model, results, started):
    params = model.as_dict() if model is not None else None
    return _jsonable({
        "schema_version": SCHEMA_VERSION,
        "tool": "riskq",
        "version": _version(),
        "command": command,
        "config": cfg,
        "params": params,
        "results": results,
        "wall_time_s": time.perf_counter() - started,
    })


def fmt(x):
    return repr(float(x))


# ---------------------------------------------------------------- commands


def cmd_solve(cfg):
    model = resolve_model(cfg)
    rep = rvi.rvi_solve(model, resolve_rvi(cfg))
    dJ = differential(model, rep.value)
    lines = [
        f"alpha            {fmt(rep.alpha)}",
        f"rs average cost  {fmt(rep.rs_average_cost)}",
        f"threshold        {rep.threshold if rep.threshold is not None else 'non-threshold'}",
        f"iterations       {rep.iterations}  residual {rep.residual:.3e}",
        f"V                {' '.join(fmt(v) for v in rep.value)}",
        f"dJ               {' '.join(fmt(v) for v in dJ)}",
        f"policy           {''.join(str(a) for a in rep.policy)}",
    ]
    results = dict(alpha=rep.alpha, rs_average_cost=rep.rs_average_cost, threshold=rep.threshold,
                   value=rep.value, differential=dJ, policy=rep.policy, iterations=rep.iterations,
                   residual=rep.residual, alpha_spread=rep.alpha_spread)
    return model, results, lines, EXIT_OK


def _interval_tau(cfg, model, allow_never=False):
    block = cfg.get("interval") or {}
    tau = _number(block, "tau", "interval", int)
    hi = model.B + 1 if allow_never else model.B
    if not 1 <= tau <= hi:
        raise ConfigError(f"field interval.tau: must lie in [1, {hi}], got {tau}")
    return tau


def cmd_eval_threshold(cfg):
    model = resolve_model(cfg)
    tau = _interval_tau(cfg, model, allow_never=True)
    ev = analytics.solve_alpha(model, tau)
    dJ = analytics.steady_differential(model, ev)
    brackets = []
    if tau <= model.B:
        brackets = analytics.scan_alpha_roots(model, tau, ev.alpha * 1e-3, ev.alpha * 1e3, n=400)
    roots = ev.roots
    lines = [
        f"tau              {tau}",
        f"alpha            {fmt(ev.alpha)}",
        f"rs average cost  {fmt(math.log(ev.alpha) / model.gamma)}",
        f"boundary resid.  {ev.residual:.3e}",
        f"V                {' '.join(fmt(v) for v in ev.value)}",
        f"dJ               {' '.join(fmt(v) for v in dJ)}",
    ]
    if roots is not None:
        lines.append(f"lambda1,lambda2  {roots.lambda1} {roots.lambda2}")
        lines.append(f"K1,K2            {ev.K1} {ev.K2}")
    if len(brackets) > 1:
        lines.append(f"note: boundary equation changes sign {len(brackets)} times in the scanned alpha range")
    results = dict(tau=tau, alpha=ev.alpha, rs_average_cost=math.log(ev.alpha) / model.gamma,
                   value=ev.value, differential=dJ, K1=ev.K1, K2=ev.K2,
                   lambda1=None if roots is None else roots.lambda1,
                   lambda2=None if roots is None else roots.lambda2,
                   discriminant=None if roots is None else roots.discriminant,
                   boundary_residual=ev.residual, alpha_root_brackets=brackets)
    return model, results, lines, EXIT_OK


def cmd_interval(cfg):
    model = resolve_model(cfg, need_C=False)
    tau = _interval_tau(cfg, model)
    search = (cfg.get("interval") or {}).get("search_max_C")
    ci = analytics.cost_interval(model, tau, search)
    lines = [
        f"tau              {tau}",
        f"C_l              {fmt(ci.c_lower)}  ({ci.lower_status})",
        f"C_u              {fmt(ci.c_upper)}  ({ci.upper_status})",
        f"search max C     {fmt(ci.search_max_C)}",
        f"boundary resid.  lower {ci.lower_residual:.3e}  upper {ci.upper_residual:.3e}",
    ]
    if not ci.magnitude_monotone:
        lines.append("note: boundary differentials are not monotone in C in magnitude (signs are)")
    results = dict(tau=tau, c_lower=ci.c_lower, c_upper=ci.c_upper, lower_status=ci.lower_status,
                   upper_status=ci.upper_status, search_max_C=ci.search_max_C,
                   lower_residual=ci.lower_residual, upper_residual=ci.upper_residual,
                   magnitude_monotone=ci.magnitude_monotone)
    return model, results, lines, EXIT_OK


def sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([fmt(r.C), "" if r.tau is None else r.tau, fmt(r.alpha), fmt(r.rs_average_cost), r.iterations])
    return buf.getvalue()


def cmd_sweep(cfg, csv_path=None):
    model = resolve_model(cfg, need_C=False)
    grid = (cfg.get("sweep") or {}).get("C_grid")
    if not isinstance(grid, list) or not grid or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in grid):
        raise ConfigError("field sweep.C_grid: expected a non-empty list of numbers")
    try:
        res = rvi.sweep_cost(model, grid, resolve_rvi(cfg))
    except DomainError as exc:
        raise ConfigError(f"field sweep.C_grid: {exc}")
    text = sweep_csv(res.rows)
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            fh.write(text)
    lines = text.rstrip("\n").split("\n")
    failed = [r.C for r in res.rows if r.error]
    if not res.monotone:
        lines.append(f"PROPERTY VIOLATION: threshold decreases at rows {res.violations}")
    if failed:
        lines.append(f"solve failures at C = {failed}")
    results = dict(rows=[dict(C=r.C, tau=r.tau, alpha=r.alpha, rs_cost=r.rs_average_cost,
                              iterations=r.iterations, error=r.error) for r in res.rows],
                   tau_monotone=res.monotone, violations=res.violations)
    code = EXIT_PROPERTY if not res.monotone else (EXIT_NUMERIC if failed else EXIT_OK)
    return model, results, lines, code


def cmd_simulate(cfg):
    model = resolve_model(cfg)
    block = cfg.get("sim") or {}
    horizon = _number(block, "horizon", "sim", int, required=False) or 20
    reps = _number(block, "replications", "sim", int, required=False) or 100_000
    init = _number(block, "initial_state", "sim", int, required=False) or 0
    seed = _number(block, "seed", "sim", int, required=False) or 0
    try:
        sim_cfg = simulate.SimConfig(horizon, reps, seed, init)
    except DomainError as exc:
        raise ConfigError(f"field sim: {exc}")
    if not 0 <= init <= model.B:
        raise ConfigError(f"field sim.initial_state: must lie in [0, {model.B}]")
    policy = parse_policy(block.get("policy"), model, resolve_rvi(cfg))
    est = simulate.estimate_risk_cost(model, policy, sim_cfg)
    log_exact = oracle.log_exp_moment_exact(model, policy, horizon, init)
    exact = math.exp(log_exact) if log_exact < 709 else math.inf
    z = (est.mean_exp_moment - exact) / est.std_error if est.std_error > 0 else math.nan
    lines = [
        f"policy           {''.join(str(a) for a in policy)}",
        f"horizon/reps     {horizon} / {reps}  seed {seed}  start {init}",
        f"MC E[exp(gS)]    {fmt(est.mean_exp_moment)} +- {fmt(est.std_error)}",
        f"exact            {fmt(exact)}",
        f"z-score          {z:.3f}",
        f"MC rs cost       {fmt(est.empirical_rs_cost)}",
        f"exact rs cost    {fmt(log_exact / (model.gamma * horizon))}",
    ]
    results = dict(policy=policy, horizon=horizon, replications=reps, seed=seed, initial_state=init,
                   mean_exp_moment=est.mean_exp_moment, std_error=est.std_error,
                   log_mean_exp_moment=est.log_mean_exp_moment, empirical_rs_cost=est.empirical_rs_cost,
                   exact_exp_moment=exact, exact_log_exp_moment=log_exact,
                   exact_rs_cost=log_exact / (model.gamma * horizon), z_score=z, degenerate=est.degenerate)
    return model, results, lines, EXIT_OK


# ---------------------------------------------------------------- verify


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""
    informational: bool = False


@dataclass
class ModelVerdict:
    model: ModelParams
    checks: List[Check] = field(default_factory=list)

    @property
    def ok(self):
        return all(c.ok for c in self.checks if not c.informational)


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def verify_model(model, opts=None, sweep_points=5, diag_iterations=5000):
    """Run every cross-check on one model.

    The per-iteration monotonicity of ``dJ`` in ``n`` is reported but is
    informational: it fails on ordinary parameter points, while the results
    it was meant to support (threshold greedy policies, threshold optimality)
    are checked directly.
    """
    opts = opts or rvi.RviOptions()
    v = ModelVerdict(model)
    add = v.checks.append
    B = model.B

    worst = max(abs(sum(e.probability for e in transition_kernel(model, i, u)) - 1.0)
                for i in range(B + 1) for u in (0, 1))
    add(Check("kernel rows sum to 1", worst <= 1e-15, f"max defect {worst:.2e}"))

    try:
        sol = rvi.rvi_solve(model, opts)
        verdict = oracle.enumerate_policies(model)
    except NumericError as exc:
        add(Check("solve", False, str(exc)))
        return v

    q = np.array([np.subtract(*q_factors(model, sol.value, i)) for i in range(B + 1)])
    dJ = differential(model, sol.value)
    gap = float(np.max(np.abs(q - dJ)) / np.max(np.abs(dJ)))
    add(Check("differential formula matches Q-factors", gap <= 1e-12, f"rel gap {gap:.2e}"))

    add(Check("enumerated optimum is threshold-type", verdict.is_threshold,
              f"best {verdict.best_policy.tolist()}"))
    ra = _rel(sol.alpha, verdict.best_alpha)
    add(Check("RVI alpha matches enumeration", ra <= 1e-8, f"rel {ra:.2e}"))
    add(Check("RVI policy matches enumeration", bool(np.array_equal(sol.policy, verdict.best_policy)),
              f"rvi {sol.policy.tolist()} enum {verdict.best_policy.tolist()}"))
    add(Check("Bellman residual", sol.residual <= 10 * opts.tolerance, f"{sol.residual:.2e}"))

    plain = rvi.RviOptions(max_iterations=diag_iterations, record_diagnostics=True, aperiodicity=0.0)
    try:
        diag = rvi.rvi_solve(model, plain).diagnostics
    except NumericError as exc:
        diag = exc.report.diagnostics
    thr_bad = [d.iteration for d in diag if d.threshold is None]
    sign_bad = [d.iteration for d in diag if not d.sign_pattern]
    mono_bad = [d.iteration for d in diag if not d.monotone]
    add(Check("greedy policy threshold-type at every RVI iteration", not thr_bad, f"bad iterations {thr_bad[:5]}"))
    add(Check("differential sign pattern at every RVI iteration", not sign_bad, f"bad iterations {sign_bad[:5]}"))
    add(Check("differential non-decreasing in n at every RVI iteration", not mono_bad,
              f"{len(mono_bad)}/{len(diag)} iterations fail" if mono_bad else "", informational=True))

    for tau in range(1, B + 1):
        try:
            ev = analytics.solve_alpha(model, tau)
        except NumericError as exc:
            add(Check(f"closed form tau={tau}", False, str(exc)))
            continue
        rho_t, _ = oracle.spectral_radius(oracle.policy_matrix(model, rvi.ThresholdPolicy(tau).actions(B)))
        r = _rel(ev.alpha, rho_t)
        bal = analytics.balance_residual(model, ev)
        add(Check(f"closed form tau={tau}", r <= 1e-10 and bal <= 1e-9, f"alpha rel {r:.2e}, balance {bal:.2e}"))

    if sweep_points:
        hi = analytics.default_search_max_C(model)
        grid = list(np.linspace(0.05, hi, sweep_points))
        res = rvi.sweep_cost(model, grid, opts)
        enum_taus = [oracle.enumerate_policies(model.with_cost(C)).threshold for C in grid]
        enum_ok = all(a is not None and b is not None and a <= b for a, b in zip(enum_taus, enum_taus[1:]))
        add(Check("threshold non-decreasing in C (RVI)", res.monotone, f"taus {[r.tau for r in res.rows]}"))
        add(Check("threshold non-decreasing in C (enumeration)", enum_ok, f"taus {enum_taus}"))
    return v


def cmd_verify(cfg, grid=0, grid_seed=0, sweep_points=5, corrupt=False):
    models = []
    if cfg.get("model"):
        models.append(resolve_model(cfg))
    models.extend(oracle.random_model_grid(grid, seed=grid_seed) if grid else [])
    if not models:
        raise ConfigError("verify needs a model (config or flags) or --grid N")
    opts = resolve_rvi(cfg)
    verdicts = []
    if corrupt:
        with corrupted_kernel():
            verdicts = [verify_model(m, opts, sweep_points) for m in models]
    else:
        verdicts = [verify_model(m, opts, sweep_points) for m in models]

    lines = []
    for name in dict.fromkeys(n for v in verdicts for n in (c.name for c in v.checks)):
        cs = [c for v in verdicts for c in v.checks if c.name == name]
        bad = [c for c in cs if not c.ok]
        tag = "INFO" if cs[0].informational else ("PASS" if not bad else "FAIL")
        lines.append(f"{tag:4}  {name}: {len(cs) - len(bad)}/{len(cs)}" + (f"  e.g. {bad[0].detail}" if bad else ""))
    failed = sum(not v.ok for v in verdicts)
    lines.append(f"{len(models) - failed}/{len(models)} models pass all properties")
    results = dict(
        n_models=len(models),
        n_failed=failed,
        models=[dict(params=v.model.as_dict(), ok=v.ok,
                     checks=[dict(name=c.name, ok=c.ok, detail=c.detail, informational=c.informational)
                             for c in v.checks]) for v in verdicts],
    )
    model = models[0] if cfg.get("model") else None
    return model, results, lines, EXIT_PROPERTY if failed else EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config (or a previous report)")
    common.add_argument("--out", help="write the JSON report here")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--tol", type=float, help="RVI tolerance")
    common.add_argument("--max-iters", dest="max_iters", type=int, help="RVI iteration cap")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    m = common.add_argument_group("model")
    m.add_argument("--B", type=int)
    m.add_argument("--p", type=float)
    m.add_argument("--lambda", dest="lam", type=float)
    m.add_argument("--mu", type=float)
    m.add_argument("--C", type=float)
    m.add_argument("--R", type=float)
    m.add_argument("--L", type=float)
    m.add_argument("--gamma", type=float)

    parser = argparse.ArgumentParser(prog="riskq", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="optimal policy by relative value iteration")
    p = sub.add_parser("eval-threshold", parents=[common], help="closed-form evaluation of a threshold policy")
    p.add_argument("--tau", type=int)
    p = sub.add_parser("interval", parents=[common], help="cost interval over which a threshold is optimal")
    p.add_argument("--tau", type=int)
    p.add_argument("--search-max-C", dest="search_max_C", type=float)
    p = sub.add_parser("sweep", parents=[common], help="solve over a grid of transmission costs")
    p.add_argument("--C-grid", dest="C_grid", type=parse_grid, help="a,b,c or start:stop:count")
    p.add_argument("--csv", help="write the sweep table here")
    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo vs exact exponential moment")
    p.add_argument("--policy", help="threshold:<tau>, optimal, or a JSON action array")
    p.add_argument("--horizon", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--initial-state", dest="initial_state", type=int)
    p = sub.add_parser("verify", parents=[common], help="cross-check every structural property")
    p.add_argument("--grid", type=int, default=0, help="also verify N random desk-scale models")
    p.add_argument("--grid-seed", type=int, default=0)
    p.add_argument("--sweep-points", type=int, default=5)
    p.add_argument("--inject-kernel-fault", dest="corrupt", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        cfg = load_config(args.config) if args.config else {}
        cfg = merge_flags(cfg, args)
        if args.command == "solve":
            out = cmd_solve(cfg)
        elif args.command == "eval-threshold":
            out = cmd_eval_threshold(cfg)
        elif args.command == "interval":
            out = cmd_interval(cfg)
        elif args.command == "sweep":
            out = cmd_sweep(cfg, args.csv)
        elif args.command == "simulate":
            out = cmd_simulate(cfg)
        else:
            out = cmd_verify(cfg, args.grid, args.grid_seed, args.sweep_points, args.corrupt)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PropertyViolation as exc:
        print(f"property violation: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    model, results, lines, code = out
    if not args.quiet:
        print("\n".join(lines))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(make_report(args.command, cfg, model, results, started), fh, indent=2)
            fh.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
