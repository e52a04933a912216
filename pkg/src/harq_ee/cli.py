"""Command-line front end: solve, sweep, simulate, verify and limits, all emitting CSV.

Exit codes: 0 success, 2 usage or configuration error, 3 infeasible problem,
violated solution invariant or insufficient simulation precision.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import itertools
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .baselines import MAX_ORACLE_ROUNDS, grid_oracle_solve, uniform_power_solve
from .channel_sim import estimate_outage
from .corefns import ChannelSpec, QosSpec, Scheme, as_sigma2
from .limits import ee_limit
from .optimizer import InfeasibleError, Solution, solve

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 2, 3
SWEEP_AXES = ("epsilon", "t0", "L", "rho")
MIN_VERIFY_TRIALS = 100_000
# above this target outage the high-SNR outage model is not expected to be accurate
LOW_OUTAGE_LIMIT = 1e-2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def fmt(x) -> str:
    """12 significant digits, '.' decimal; integers and strings pass through."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return f"{x:.12g}"
    return "" if x is None else str(x)


def write_csv(rows: list[list], header: list[str], out: str | None, stdout=None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows([[fmt(v) for v in row] for row in rows])
    text = buf.getvalue()
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        (stdout or sys.stdout).write(text)


# ----------------------------------------------------------------- parsing helpers

def _floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise CliError(f"{name + ': ' if name else ''}expected a number or comma list, got {text!r}") from None


def _ints(text: str, name: str) -> list[int]:
    vals = _floats(text, name)
    if any(v != int(v) for v in vals):
        raise CliError(f"{name + ': ' if name else ''}expected integers, got {text!r}")
    return [int(v) for v in vals]


def _schemes(text: str) -> list[Scheme]:
    try:
        return [Scheme.parse(s) for s in str(text).split(",") if s.strip()]
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _channel(L: int, rho: float, sigma2: list[float], truncate: bool = False) -> ChannelSpec:
    s2 = as_sigma2(sigma2, L)
    # an L sweep may list variances for its largest L and use a prefix for the rest
    if truncate and len(s2) > L:
        s2 = s2[:L]
    try:
        return ChannelSpec(L, rho, s2)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _qos(eps: float, t0: float) -> QosSpec:
    try:
        return QosSpec(eps, t0)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _checked(sol: Solution) -> Solution:
    if not sol.feasible:
        raise CliError("infeasible: rate bracket (t0, t0/(1-delta)] is empty at double precision",
                       EXIT_INFEASIBLE)
    bad = sol.violations()
    if bad:
        raise CliError("solution invariant violated: " + "; ".join(bad), EXIT_INFEASIBLE)
    return sol


def _solve(scheme, spec, qos, ir_rate="surrogate") -> Solution:
    try:
        return _checked(solve(scheme, spec, qos, ir_rate=ir_rate))
    except InfeasibleError as exc:
        raise CliError(f"infeasible: {exc}", EXIT_INFEASIBLE) from None


SOLUTION_COLS = ["scheme", "L", "rho", "epsilon", "t0", "rate", "alpha"]
TAIL_COLS = ["avg_power", "ee", "goodput", "se"]
MC_COLS = ["mc_trials", "mc_outage", "mc_halfwidth", "mc_unreliable", "mc_ee", "mc_se"]


def _solution_head(sol: Solution) -> list:
    return [sol.scheme.label, sol.spec.L, sol.spec.rho, sol.qos.epsilon, sol.qos.t0, sol.rate, sol.alpha]


def _solution_tail(sol: Solution) -> list:
    return [sol.avg_power, sol.ee, sol.goodput, sol.spectral_efficiency]


def _mc_cells(sol: Solution, seed: int, trials: int, workers: int) -> list:
    rep = estimate_outage(sol.scheme, sol.spec, sol.ladder, sol.rate, seed=seed, trials=trials, workers=workers)
    return [trials, rep.outage, rep.halfwidth, rep.unreliable[-1], rep.energy_efficiency, rep.spectral_efficiency]


# ----------------------------------------------------------------- subcommands

def cmd_solve(args, stdout=None) -> int:
    spec = _channel(args.L, args.rho, args.sigma2)
    sol = _solve(args.scheme, spec, _qos(args.eps, args.t0), args.ir_rate)
    header = SOLUTION_COLS + [f"P{l}" for l in range(1, spec.L + 1)] + TAIL_COLS
    write_csv([_solution_head(sol) + list(sol.ladder) + _solution_tail(sol)], header, args.out, stdout)
    return EXIT_OK


def cmd_simulate(args, stdout=None) -> int:
    if args.trials < 1:
        raise CliError("simulate needs --trials >= 1")
    spec = _channel(args.L, args.rho, args.sigma2)
    sol = _solve(args.scheme, spec, _qos(args.eps, args.t0), args.ir_rate)
    row = _solution_head(sol) + _solution_tail(sol) + _mc_cells(sol, args.seed, args.trials, args.workers)
    write_csv([row], SOLUTION_COLS + TAIL_COLS + MC_COLS, args.out, stdout)
    return EXIT_OK


VERIFY_COLS = SOLUTION_COLS + [
    "ee", "mc_trials", "mc_outage", "mc_halfwidth", "outage_rel_err", "mc_ee", "ee_rel_err",
    "oracle_ee", "oracle_gap", "flag",
]


def cmd_verify(args, stdout=None) -> int:
    """Closed form against Monte Carlo and, for small ``L``, the grid oracle."""
    simulate = args.trials >= MIN_VERIFY_TRIALS
    if 0 < args.trials < MIN_VERIFY_TRIALS:
        raise CliError(f"verify needs --trials >= {MIN_VERIFY_TRIALS} (or 0 to skip simulation)")
    rows, imprecise = [], []
    for scheme, rho, eps, t0 in itertools.product(args.scheme, args.rho, args.eps, args.t0):
        spec = _channel(args.L, rho, args.sigma2)
        sol = _solve(scheme, spec, _qos(eps, t0), args.ir_rate)
        mc = [None] * 6
        if simulate:
            rep = estimate_outage(scheme, spec, sol.ladder, sol.rate, seed=args.seed, trials=args.trials,
                                  workers=args.workers)
            mc = [args.trials, rep.outage, rep.halfwidth, abs(rep.outage - sol.alpha) / sol.alpha,
                  rep.energy_efficiency, abs(rep.energy_efficiency - sol.ee) / sol.ee]
            if args.precision is not None and (rep.outage == 0 or rep.halfwidth > args.precision * rep.outage):
                imprecise.append(f"{scheme.label} rho={rho} eps={eps} t0={t0}")
        oracle = [None, None]
        if spec.L <= MAX_ORACLE_ROUNDS:
            o = grid_oracle_solve(scheme, spec, sol.qos)
            oracle = [o.ee, (o.ee - sol.ee) / sol.ee]
        flag = "high_outage" if sol.alpha > LOW_OUTAGE_LIMIT else ""
        rows.append(_solution_head(sol) + [sol.ee] + mc + oracle + [flag])
    write_csv(rows, VERIFY_COLS, args.out, stdout)
    if imprecise:
        print("confidence half-width exceeds requested precision for: " + ", ".join(imprecise), file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


LIMIT_COLS = ["scheme", "rho", "t0", "theta_inf", "kappa_inf", "ee_limit", "ee_lower", "ceiling"]


def cmd_limits(args, stdout=None) -> int:
    rows = []
    for t0 in args.t0:
        if not t0 > 0:
            raise CliError(f"t0 must be positive, got {t0}")
        for scheme in args.scheme:
            r = ee_limit(scheme, args.rho, t0)
            rows.append([scheme.label, r.rho, r.t0] + [
                f"{v:.6f}" for v in (r.theta_inf, r.kappa_inf, r.ee_limit, r.ee_lower, r.ceiling)
            ])
    write_csv(rows, LIMIT_COLS, args.out, stdout)
    return EXIT_OK


# ----------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepConfig:
    name: str
    schemes: tuple[Scheme, ...]
    L: int
    rho: float
    sigma2: tuple[float, ...]
    epsilon: float
    t0: float
    axis: str
    values: tuple
    seed: int = 0
    trials: int = 0
    ir_rate: str = "surrogate"
    baseline: bool = False

    def points(self):
        """``(scheme, spec, qos)`` per row: scheme-major, then axis order."""
        for scheme in self.schemes:
            for v in self.values:
                p = {"L": self.L, "rho": self.rho, "epsilon": self.epsilon, "t0": self.t0, self.axis: v}
                yield scheme, _channel(p["L"], p["rho"], list(self.sigma2), truncate=True), _qos(p["epsilon"], p["t0"])


_REQUIRED = object()
SWEEP_KEYS = {"schemes", "axis", "values", "l", "rho", "sigma2", "epsilon", "t0", "seed", "trials", "ir_rate", "baseline", "out"}


def _key_line(lines: list[str], section: str, key: str) -> int | None:
    current = None
    for i, line in enumerate(lines, 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current in (section, "DEFAULT") and s.split("=", 1)[0].split(":", 1)[0].strip().lower() == key:
            return i
    return None


def load_sweeps(path: str) -> tuple[list[SweepConfig], str | None]:
    """Parse a sweep file; each section is one sweep, ``[DEFAULT]`` supplies shared keys."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text, source=path)
    except configparser.Error as exc:
        raise CliError(f"config error: {exc}") from None
    lines = text.splitlines()
    if not cp.sections():
        raise CliError(f"{path}: no sweep sections found")
    sweeps = []
    for name in cp.sections():
        sec = cp[name]

        def where(key):
            ln = _key_line(lines, name, key)
            return f"{path}:{ln}: [{name}] {key}" if ln else f"{path}: [{name}] {key}"

        def get(key, conv, default=_REQUIRED):
            if key not in sec:
                if default is _REQUIRED:
                    raise CliError(f"{path}: [{name}] missing required key {key!r}")
                return default
            try:
                return conv(sec[key], "")
            except CliError as exc:
                raise CliError(f"{where(key)}: {exc}") from None

        unknown = set(sec.keys()) - SWEEP_KEYS
        if unknown:
            raise CliError(f"{where(sorted(unknown)[0])}: unknown key")
        axis = sec.get("axis", "").strip()
        axis = {"l": "L", "eps": "epsilon"}.get(axis.lower(), axis)
        if axis not in SWEEP_AXES:
            raise CliError(f"{where('axis')}: must be one of {', '.join(SWEEP_AXES)}, got {axis!r}")
        values = get("values", _ints if axis == "L" else _floats)
        if not values or any(b <= a for a, b in zip(values, values[1:])):
            raise CliError(f"{where('values')}: must be non-empty and strictly increasing")
        ir_rate = sec.get("ir_rate", "surrogate").strip()
        if ir_rate not in ("surrogate", "direct"):
            raise CliError(f"{where('ir_rate')}: must be surrogate or direct")
        baseline = sec.get("baseline", "none").strip().lower()
        if baseline not in ("none", "uniform"):
            raise CliError(f"{where('baseline')}: must be none or uniform")
        baseline = baseline == "uniform"
        cfg = SweepConfig(
            name=name,
            schemes=tuple(get("schemes", lambda t, k: _schemes(t), [Scheme.TYPE_I, Scheme.CC, Scheme.IR])),
            L=get("l", _one(_ints), None if axis == "L" else _REQUIRED),
            rho=get("rho", _one(_floats), 0.0),
            sigma2=tuple(get("sigma2", _floats, [1.0])),
            epsilon=get("epsilon", _one(_floats), None if axis == "epsilon" else _REQUIRED),
            t0=get("t0", _one(_floats), None if axis == "t0" else _REQUIRED),
            axis=axis,
            values=tuple(values),
            seed=get("seed", _one(_ints), 0),
            trials=get("trials", _one(_ints), 0),
            ir_rate=ir_rate,
            baseline=baseline,
        )
        if cfg.trials < 0:
            raise CliError(f"{where('trials')}: must be >= 0")
        try:
            list(cfg.points())
        except CliError as exc:
            raise CliError(f"{path}: [{name}] {exc}") from None
        sweeps.append(cfg)
    out = cp.defaults().get("out")
    return sweeps, out


def _one(conv):
    def parse(text, key):
        vals = conv(text, key)
        if len(vals) != 1:
            raise CliError(f"expected a single value, got {text!r}")
        return vals[0]
    return parse


SWEEP_COLS = ["sweep", "scheme", "L", "rho", "epsilon", "t0", "rate", "alpha", "powers"] + TAIL_COLS
UNIFORM_COLS = ["uniform_ee", "uniform_gap"]


def _sweep_row(job) -> dict:
    cfg, scheme, spec, qos, workers = job
    sol = _solve(scheme, spec, qos, cfg.ir_rate)
    row = [cfg.name] + _solution_head(sol) + [";".join(fmt(p) for p in sol.ladder)] + _solution_tail(sol)
    out = dict(zip(SWEEP_COLS, row))
    if cfg.baseline:
        u = uniform_power_solve(scheme, spec, qos)
        out.update(uniform_ee=u.ee, uniform_gap=(sol.ee - u.ee) / sol.ee)
    if cfg.trials > 0:
        out.update(zip(MC_COLS, _mc_cells(sol, cfg.seed, cfg.trials, workers)))
    return out


def cmd_sweep(args, stdout=None) -> int:
    if not args.config:
        raise CliError("sweep needs --config PATH")
    sweeps, default_out = load_sweeps(args.config)
    header = list(SWEEP_COLS)
    if any(s.baseline for s in sweeps):
        header += UNIFORM_COLS
    if any(s.trials > 0 for s in sweeps):
        header += MC_COLS
    jobs = [(cfg, scheme, spec, qos, 1) for cfg in sweeps for scheme, spec, qos in cfg.points()]
    if args.workers > 1:
        # map keeps config order whatever the completion order
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    write_csv([[r.get(c) for c in header] for r in rows], header, args.out or default_out, stdout)
    return EXIT_OK


# ----------------------------------------------------------------- argument parsing

def _common(p: argparse.ArgumentParser, *, lists: bool = False, need_qos: bool = True):
    float_list = (lambda t: _parse_arg(_floats, t, "value")) if lists else float
    p.add_argument("--scheme", required=need_qos, type=(lambda t: _parse_arg(lambda x, n: _schemes(x), t))
                   if lists else Scheme.parse, help="typei, cc or ir" + (" (comma list)" if lists else ""))
    p.add_argument("--L", type=int, default=1, help="maximum number of HARQ rounds")
    p.add_argument("--rho", type=float_list, default=[0.0] if lists else 0.0, help="time correlation in [0, 1)")
    p.add_argument("--sigma2", type=lambda t: _parse_arg(_floats, t, "sigma2"), default=[1.0],
                   help="per-round fading variance: scalar or comma list")
    p.add_argument("--eps", type=float_list, required=need_qos, help="outage tolerance in (0, 1]")
    p.add_argument("--t0", type=float_list, required=need_qos, help="goodput threshold (bits/s/Hz)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--ir-rate", choices=("surrogate", "direct"), default="surrogate")
    p.add_argument("--out", default=None, help="CSV path; stdout when omitted")


def _parse_arg(fn, text, name="value"):
    try:
        return fn(text, name)
    except CliError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harq-ee", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="energy-efficiency-optimal rate, outage and powers")
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="solve, then Monte Carlo the resulting operating point")
    _common(p)
    p.set_defaults(func=cmd_simulate, trials=1_000_000)

    p = sub.add_parser("verify", help="closed form vs Monte Carlo vs grid oracle")
    _common(p, lists=True)
    p.add_argument("--precision", type=float, default=None,
                   help="fail (exit 3) when the CI half-width exceeds this fraction of the estimate")
    p.set_defaults(func=cmd_verify, trials=1_000_000)

    p = sub.add_parser("sweep", help="parameter sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("limits", help="large-L efficiency limits and ceilings")
    p.add_argument("--scheme", type=lambda t: _parse_arg(lambda x, n: _schemes(x), t),
                   default=list(Scheme), help="comma list; all schemes by default")
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--t0", type=lambda t: _parse_arg(_floats, t, "t0"), required=True, help="comma list")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_limits)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        if exc.code == EXIT_USAGE:
            parser.print_usage(sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
