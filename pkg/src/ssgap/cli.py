"""Command-line front end: gap values, tabulation and verification suites.

Exit codes: 0 success, 1 verification failure, 2 usage or parameter error.
Settings merge as defaults < ``--config`` file < ``GAP_*`` environment
variables < command-line flags.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import backlund, classical, hamflow, kernels, series, sigma_ode
from .errors import GapError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
AGREEMENT_THRESHOLD = 1e-5
METHODS = ("fredholm", "hard-edge", "cross", "sigma1")
SUITES = ("theorem1", "lemma", "backlund", "tau-identity", "series", "classical")
CSV_HEADER = ("x", "a", "method", "E", "logE", "err_est")


class UsageError(Exception):
    pass


@dataclasses.dataclass(frozen=True)
class RunConfig:
    quad_order: int = kernels.DEFAULT_ORDER
    ode_rel_tol: float = sigma_ode.DEFAULT_TOL
    series_start: float = 1e-3
    eps_sign: int = 1
    output_format: str = "csv"
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.quad_order <= kernels.MAX_ORDER:
            raise UsageError(f"quad_order must lie in [1, {kernels.MAX_ORDER}]")
        if not 0 < self.ode_rel_tol < 1e-3:
            raise UsageError("ode_rel_tol must lie in (0, 1e-3)")
        if not self.series_start > 0:
            raise UsageError("series_start must be positive")
        if self.eps_sign not in (1, -1):
            raise UsageError("eps_sign must be +1 or -1")
        if self.output_format not in ("csv", "json"):
            raise UsageError("output_format must be csv or json")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_CASTS = {f.name: f.type for f in dataclasses.fields(RunConfig)}
_TYPES = {"int": int, "float": float, "str": str}


def _cast(key, value):
    if key not in _CASTS:
        raise UsageError(f"unknown config key {key!r}")
    try:
        return _TYPES[_CASTS[key]](value)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {value!r}") from exc


def read_config_file(path) -> dict:
    """Parse plain ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key] = _cast(key, value)
    return out


def resolve_config(file_path=None, env=None, flags=None) -> RunConfig:
    """Merge the config sources in increasing precedence."""
    merged = {}
    if file_path:
        merged.update(read_config_file(file_path))
    env = os.environ if env is None else env
    for key in _CASTS:
        name = "GAP_" + key.upper()
        if name in env:
            merged[key] = _cast(key, env[name])
    merged.update({k: v for k, v in (flags or {}).items() if v is not None})
    return RunConfig(**merged)


# --- gap ----------------------------------------------------------------------


def compute_gap(method: str, a: float, x: float, cfg: RunConfig) -> kernels.GapResult:
    tol, cap = cfg.ode_rel_tol, cfg.series_start
    if method == "fredholm":
        return kernels.gap_fredholm(a, x, cfg.quad_order)
    if method == "hard-edge":
        return sigma_ode.gap_ss_product(a, x, tol, start_cap=cap)
    if method == "cross":
        return sigma_ode.gap_ss_cross(a, x, cfg.eps_sign, tol, start_cap=cap)
    if method == "sigma1":
        return sigma_ode.gap_ss_sigma1(a, x, tol, start_cap=cap)
    raise UsageError(f"unknown method {method!r}")


def _methods(name):
    return METHODS if name == "all" else (name,)


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _csv_rows(results):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow([_fmt(r.x), _fmt(r.a), r.method.value, _fmt(r.E), _fmt(r.logE), _fmt(r.err_est)])
    return buf.getvalue()


def max_discrepancy(results) -> float:
    Es = [r.E for r in results]
    return (max(Es) - min(Es)) / max(Es) if len(Es) > 1 else 0.0


def cmd_gap(args, cfg: RunConfig, out) -> int:
    if not args.a > -0.5:
        raise UsageError("parameter out of range: a must exceed -1/2")
    if not args.x >= 0:
        raise UsageError("parameter out of range: x must be nonnegative")
    results = [compute_gap(m, args.a, args.x, cfg) for m in _methods(args.method)]
    disc = max_discrepancy(results)
    ok = disc <= AGREEMENT_THRESHOLD
    if args.json or cfg.output_format == "json":
        rep = {
            "a": args.a,
            "x": args.x,
            "results": [
                {"method": r.method.value, "E": r.E, "logE": r.logE, "err_est": r.err_est} for r in results
            ],
            "max_discrepancy": disc,
            "threshold": AGREEMENT_THRESHOLD,
            "pass": ok,
            "config": cfg.as_dict(),
        }
        out.write(json.dumps(rep, indent=2) + "\n")
    else:
        out.write(_csv_rows(results))
        if len(results) > 1:
            out.write(f"# max relative discrepancy {_fmt(disc)}\n")
    return EXIT_OK if ok else EXIT_FAIL


# --- tabulate -----------------------------------------------------------------


def tabulate(a, xs, methods, cfg: RunConfig, workers=None):
    """GapResults in (x ascending, method) order; grid points run concurrently."""
    jobs = [(x, m) for x in sorted(xs) for m in methods]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda j: compute_gap(j[1], a, j[0], cfg), jobs))


def cmd_tabulate(args, cfg: RunConfig, out) -> int:
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if not 0 <= args.x_min <= args.x_max:
        raise UsageError("need 0 <= x-min <= x-max")
    if not args.a > -0.5:
        raise UsageError("parameter out of range: a must exceed -1/2")
    xs = np.linspace(args.x_min, args.x_max, args.steps) if args.steps > 1 else np.array([args.x_min])
    results = tabulate(args.a, xs, _methods(args.method), cfg)
    text = _csv_rows(results)
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc}") from exc
    out.write(f"wrote {len(results)} rows to {args.out}\n")
    return EXIT_OK


# --- verify -------------------------------------------------------------------


def _check(name, residual, threshold):
    residual = float(residual)
    return {"name": name, "residual": residual, "threshold": threshold, "pass": bool(residual <= threshold)}


def suite_theorem1(trials, seed, cfg, trajs=None):
    trajs = trajs or hamflow.sample_piii_trajectories(seed, trials)[0]
    res = np.concatenate([hamflow.theorem1_residual(tr)[0] for tr in trajs])
    bad = np.mean(~(res <= 1e-6))
    proof = max(hamflow.proof_identity_residual(tr) for tr in trajs)
    scalar = max(hamflow.scalar_piii_residual(tr)[0] for tr in trajs)
    return [
        _check("theorem1_failing_node_fraction", bad, 0.05),
        _check("theorem1_proof_identity", proof, 1e-8),
        _check("scalar_piii_equation", scalar, 1e-8),
    ]


def suite_lemma(trials, seed, cfg, trajs=None):
    trajs = trajs or hamflow.sample_piii_trajectories(seed, trials)[0]
    return [_check("lemma_sum", max(hamflow.lemma_sum_check(tr) for tr in trajs), 1e-8)]


def suite_backlund(trials, seed, cfg):
    g = backlund.group_relation_check(seed, trials)
    checks = [_check(f"involution_{k}", v, 1e-9) for k, v in g["involution"].items()]
    checks.append(_check("composite_s_minus_s2_params", g["composite_params"], 1e-9))
    checks.append(_check("composite_s_minus_s2_shift", g["composite_shift"], 1e-9))
    winner, table = backlund.resolve_time_convention(seed)
    checks.append(_check("time_convention_unique", 0.0 if winner else 1.0, 0.0))
    conv = winner or backlund.TimeConvention.T_MEANS_S
    for row, r in table[conv.value].items():
        checks.append(_check(f"solution_map_{row}", r, 1e-6))
    for row, r in backlund.hamiltonian_column_check(seed, trials, conv).items():
        checks.append(_check(f"hamiltonian_column_{row}", r, 1e-9))
    symbol = {backlund.TimeConvention.T_MEANS_S: "s", backlund.TimeConvention.T_MEANS_SQRT_S: "sqrt(s)"}
    return checks, (symbol[winner] if winner else None)


IDENTITY_A_GRID = (0.3, 0.7, 1.2)


def suite_tau_identity(trials, seed, cfg):
    tol = cfg.ode_rel_tol
    s_grid = np.linspace(0.25, 5.0, 20)
    checks = []
    for a in IDENTITY_A_GRID:
        checks.append(_check(f"hamiltonian_identity_a={a}", sigma_ode.identity_hamiltonian_check(a, s_grid, 1, tol), 1e-6))
        checks.append(_check(f"tau_identity_a={a}", sigma_ode.tau_identity_check(a, s_grid, 1, tol), 1e-6))
    lead = max(
        abs(series.c_ss(a) * 2 ** (2 * a + 1) + 2 * series.c_he(a - 0.5)) / abs(series.c_ss(a) * 2 ** (2 * a + 1))
        for a in np.linspace(0.1, 3.0, 30)
    )
    checks.append(_check("leading_constant_identity", lead, 1e-13))
    x_grid = np.array([0.25, 0.5, 1.0, 1.5])
    for a in (0.0, 0.25, 0.5, 1.0, 2.5):
        checks.append(_check(f"sigma1_consistency_a={a}", sigma_ode.sigma1_consistency_check(a, x_grid, tol), 1e-6))
    return checks


OVERLAP_REGIMES = (
    sigma_ode.BoundaryRegime.hard_edge_plus(0.5),
    sigma_ode.BoundaryRegime.hard_edge_plus(1.0),
    sigma_ode.BoundaryRegime.hard_edge_plus(2.0),
    sigma_ode.BoundaryRegime.negative_side(-0.75),
    sigma_ode.BoundaryRegime.negative_side(0.25),
    sigma_ode.BoundaryRegime.spectrum_sing(0.25),
    sigma_ode.BoundaryRegime.spectrum_sing(1.0),
)


def suite_series(trials, seed, cfg):
    checks = []
    for reg in OVERLAP_REGIMES:
        o = sigma_ode.series_overlap_check(reg)
        checks.append(_check(f"overlap_slope_{reg.kind.value}_{reg.param}", o.slope_error, 0.3))
    return checks


def suite_classical(trials, seed, cfg):
    X_id = np.linspace(0.5, 20.0, 12)
    X_he = np.linspace(1.0, 20.0, 8)
    checks = [_check(f"classical_identity_n={n}", classical.classical_identity_check(n, X_id), 1e-12) for n in (1, 2, 3)]
    for n in (1, 2, 3):
        checks.append(_check(f"hard_edge_classical_n={n}", classical.he_classical_check(n, X_he, cfg.ode_rel_tol), 1e-8))
    fd = kernels.gap_fredholm_hard_edge(3, 10.0, cfg.quad_order).E
    ref = math.exp(-2.5) * classical.tau_diag(3, 2.5)
    checks.append(_check("hard_edge_fredholm_n=3", abs(fd - ref) / ref, 1e-6))
    return checks


def run_suite(suite: str, trials: int, seed: int, cfg: RunConfig) -> dict:
    """Run one suite or ``all``; returns the report dict."""
    names = SUITES if suite == "all" else (suite,)
    if any(n not in SUITES for n in names):
        raise UsageError(f"unknown suite {suite!r}")
    ham_trials = trials if trials is not None else 100
    bk_trials = trials if trials is not None else 200
    trajs = None
    if "theorem1" in names or "lemma" in names:
        trajs = hamflow.sample_piii_trajectories(seed, ham_trials)[0]
    funcs = {
        "theorem1": lambda: suite_theorem1(ham_trials, seed, cfg, trajs),
        "lemma": lambda: suite_lemma(ham_trials, seed, cfg, trajs),
        "backlund": lambda: suite_backlund(bk_trials, seed, cfg),
        "tau-identity": lambda: suite_tau_identity(None, seed, cfg),
        "series": lambda: suite_series(None, seed, cfg),
        "classical": lambda: suite_classical(None, seed, cfg),
    }
    with ThreadPoolExecutor() as pool:
        futures = [pool.submit(funcs[n]) for n in names]
        outputs = [f.result() for f in futures]
    checks, symbol = [], None
    for n, o in zip(names, outputs):
        if n == "backlund":
            o, symbol = o
        checks.extend(o)
    return {
        "suite": suite,
        "checks": checks,
        "config": cfg.as_dict(),
        "seed": seed,
        "resolved": {"table1_time_symbol": symbol},
    }


def cmd_verify(args, cfg: RunConfig, out) -> int:
    seed = args.seed if args.seed is not None else cfg.seed
    if args.trials is not None and args.trials < 1:
        raise UsageError("--trials must be >= 1")
    report = run_suite(args.suite, args.trials, seed, cfg)
    out.write(json.dumps(report, indent=2) + "\n")
    return EXIT_OK if all(c["pass"] for c in report["checks"]) else EXIT_FAIL


# --- entry point --------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ssgap", description="Gap probabilities for the spectrum-singularity kernel.")
    p.add_argument("--config", help="file of key=value settings")
    p.add_argument("--quad-order", type=int)
    p.add_argument("--ode-rel-tol", type=float)
    p.add_argument("--series-start", type=float)
    p.add_argument("--eps-sign", type=int, choices=(1, -1))
    p.add_argument("--format", dest="output_format", choices=("csv", "json"))
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gap", help="gap probability on (-x, x)")
    g.add_argument("--a", type=float, required=True)
    g.add_argument("--x", type=float, required=True)
    g.add_argument("--method", choices=("all",) + METHODS, default="all")
    g.add_argument("--json", action="store_true")

    t = sub.add_parser("tabulate", help="CSV table over an x grid")
    t.add_argument("--a", type=float, required=True)
    t.add_argument("--x-min", type=float, required=True)
    t.add_argument("--x-max", type=float, required=True)
    t.add_argument("--steps", type=int, required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--method", choices=("all",) + METHODS, default="fredholm")

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", choices=("all",) + SUITES, default="all")
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        flags = {
            "quad_order": args.quad_order,
            "ode_rel_tol": args.ode_rel_tol,
            "series_start": args.series_start,
            "eps_sign": args.eps_sign,
            "output_format": args.output_format,
        }
        if getattr(args, "seed", None) is not None:
            flags["seed"] = args.seed
        cfg = resolve_config(args.config, None, flags)
        cmd = {"gap": cmd_gap, "tabulate": cmd_tabulate, "verify": cmd_verify}[args.command]
        return cmd(args, cfg, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GapError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
