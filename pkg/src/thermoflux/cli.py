"""Command-line front end.

Subcommands: curve, entropy, bound, ratio, simulate, verify.  Exit codes:
0 success, 1 identity violation (verify), 2 malformed input, 3 infeasible
instance.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .core import BathModel, DiagonalState, ThermalContext, parse_beta
from .divergence import d0, d0_smooth_fractional, d0_smooth_integral, smooth
from .errors import InfeasibleError, ThermofluxError
from .exact import ExactEnergy, ExactLog, format_rational, parse_rational
from .majorization import curve_csv, majorization_curve, staircase_svg
from .process import (
    build_transition_currents,
    degeneracy_scale,
    deterministic_work,
    epsilon_work_bound,
    fluctuation_ratio,
    forward_distribution,
    forward_probability,
    reverse_probability,
    w_delta,
)
from .verify import run_verification

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3


class SpecError(ThermofluxError):
    pass


def _canon_number(x, exact: bool):
    if x is None:
        return None
    if exact:
        return parse_rational(x)
    if isinstance(x, str):
        return float(parse_rational(x))
    if isinstance(x, bool) or not isinstance(x, (int, float, Fraction)):
        raise SpecError(f"expected a number, got {x!r}")
    return float(x)


def _canon_w(x, exact: bool):
    # "factor:p/q" gives exp(-beta*w) directly
    if x is None:
        return None
    if isinstance(x, str) and x.strip().startswith("factor:"):
        return "factor:" + format_rational(parse_rational(x.split(":", 1)[1]))
    return _canon_number(x, exact)


@dataclass(frozen=True)
class RunSpec:
    """A validated system description: spectrum, state, temperature and parameters."""

    beta: Any
    energies: tuple
    probabilities: tuple
    epsilon: Any = None
    delta: Any = None
    w: Any = None
    G: Any = None
    mode: str = "float"

    @classmethod
    def from_json(cls, data: dict, mode: str | None = None) -> "RunSpec":
        if not isinstance(data, dict):
            raise SpecError("spec must be a JSON object")
        for key in ("beta", "energies", "probabilities"):
            if key not in data:
                raise SpecError(f"spec is missing {key!r}")
        try:
            beta = parse_beta(data["beta"])
            mode = mode or data.get("mode") or ("exact" if isinstance(beta, ExactLog) else "float")
            if mode not in ("exact", "float"):
                raise SpecError(f"unknown mode {mode!r}")
            exact = mode == "exact"
            if exact and not isinstance(beta, ExactLog):
                raise SpecError('exact mode needs beta written as "ln(p/q)"')
            energies = tuple(_canon_number(e, exact) for e in data["energies"])
            if exact and any(e.denominator != 1 for e in energies):
                raise SpecError("exact mode needs integer energies")
            if exact:
                energies = tuple(int(e) for e in energies)
            probs = tuple(_canon_number(p, exact) for p in data["probabilities"])
            if len(probs) != len(energies):
                raise SpecError("energies and probabilities differ in length")
            spec = cls(
                beta=str(beta) if exact else float(beta),
                energies=energies,
                probabilities=probs,
                epsilon=_canon_number(data.get("epsilon"), exact),
                delta=_canon_number(data.get("delta"), exact),
                w=_canon_w(data.get("w"), exact),
                G=_canon_number(data.get("G"), exact),
                mode=mode,
            )
            spec.build()
        except SpecError:
            raise
        except (ThermofluxError, ValueError, TypeError, ZeroDivisionError) as exc:
            raise SpecError(str(exc)) from exc
        return spec

    def to_json(self) -> dict:
        exact = self.mode == "exact"

        def out(x):
            if x is None or isinstance(x, str):
                return x
            return format_rational(x) if exact else x

        data = {
            "beta": self.beta,
            "energies": list(self.energies),
            "probabilities": [out(p) for p in self.probabilities],
            "mode": self.mode,
        }
        for key in ("epsilon", "delta", "w", "G"):
            value = getattr(self, key)
            if value is not None:
                data[key] = out(value)
        return data

    def build(self) -> tuple[ThermalContext, DiagonalState]:
        state = DiagonalState.from_levels(self.energies, self.probabilities)
        ctx = ThermalContext(state.spectrum, self.beta)
        state = ctx.check_state(state)
        if not state.physical:
            raise SpecError(f"probabilities sum to {float(state.total)}, not 1")
        return ctx, state

    def work(self, ctx: ThermalContext) -> tuple[Any, dict]:
        """The requested work value in the context's arithmetic, plus snap info."""
        info: dict = {}
        if self.w is None:
            return None, info
        if isinstance(self.w, str):
            factor = parse_rational(self.w.split(":", 1)[1])
            if ctx.exact:
                return ExactEnergy(factor, ctx.base), info
            return -math.log(factor) / ctx.beta, info
        if not ctx.exact:
            return float(self.w), info
        snapped = ctx.snap_energy(self.w)
        if not (isinstance(self.w, Fraction) and self.w.denominator == 1):
            info = {"w_requested": _num(self.w), "w_snapped": _num(snapped)}
        return snapped, info


def _num(x):
    """JSON form: rationals as "p/q", floats to 15 significant digits, logs with both."""
    if isinstance(x, bool):
        return x
    if isinstance(x, (ExactLog, ExactEnergy)):
        return {"exact": str(x), "value": float(f"{float(x):.15g}")}
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return float(f"{x:.15g}")
    return x


def _csv_num(x) -> str:
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, (ExactLog, ExactEnergy)):
        return f"{float(x):.15g}"
    if isinstance(x, float):
        return f"{x:.15g}"
    return str(x)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _load_spec(args) -> RunSpec:
    if not args.spec:
        raise SpecError("--spec FILE is required")
    try:
        with open(args.spec, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read {args.spec}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{args.spec} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SpecError("spec must be a JSON object")
    mode = getattr(args, "arith", None) or args.global_arith
    for key in ("epsilon", "delta", "w"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    return RunSpec.from_json(data, mode=mode)


def _param(spec: RunSpec, name: str, default=0):
    value = getattr(spec, name)
    if value is None:
        return Fraction(default) if spec.mode == "exact" else float(default)
    return value


def cmd_curve(args) -> int:
    spec = _load_spec(args)
    ctx, state = spec.build()
    curve = majorization_curve(state, ctx)
    fmt = args.format or "csv"
    if fmt == "svg":
        text = staircase_svg(state, ctx)
    elif fmt == "json":
        text = _dump({"spec": spec.to_json(), "breakpoints": [[_num(x), _num(y)] for x, y in curve.breakpoints]})
    else:
        text = curve_csv(curve, _csv_num)
    _emit(text, args.out)
    return EXIT_OK


def cmd_entropy(args) -> int:
    spec = _load_spec(args)
    ctx, state = spec.build()
    eps = _param(spec, "epsilon")
    report: dict = {"spec": spec.to_json(), "epsilon": _num(eps), "d0": _num(d0(state, ctx))}
    report["d0_textbook"] = _num(-d0(state, ctx))
    if args.variant in ("fractional", "both"):
        res = smooth(state, ctx, eps)
        report["fractional"] = _num(d0_smooth_fractional(state, ctx, eps))
        report["smoothing"] = {
            "l": res.kept_count,
            "f": _num(res.fraction),
            "S": _num(res.support_mass),
            "removed": _num(res.removed_weight),
            "Z": _num(ctx.Z),
        }
    if args.variant in ("integral", "both"):
        report["integral"] = _num(d0_smooth_integral(state, ctx, eps))
    _emit(_dump(report), args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    spec = _load_spec(args)
    ctx, state = spec.build()
    eps = _param(spec, "epsilon")
    report = {
        "spec": spec.to_json(),
        "epsilon": _num(eps),
        "w_min": _num(epsilon_work_bound(state, ctx, eps)),
        "deterministic_work": _num(deterministic_work(state, ctx)),
        "d0": _num(d0(state, ctx)),
        "d0_eps_fractional": _num(d0_smooth_fractional(state, ctx, eps)),
        "d0_eps_integral": _num(d0_smooth_integral(state, ctx, eps)),
    }
    _emit(_dump(report), args.out)
    return EXIT_OK


def cmd_ratio(args) -> int:
    spec = _load_spec(args)
    ctx, state = spec.build()
    eps, delta = _param(spec, "epsilon"), _param(spec, "delta")
    w, info = spec.work(ctx)
    if w is None:
        w = epsilon_work_bound(state, ctx, eps)
    rev = reverse_probability(state, ctx, w, eps, delta)
    report = {
        "spec": spec.to_json(),
        "w": _num(w),
        **info,
        "W_delta": _num(w_delta(w, delta, ctx.beta)),
        "ratio": _num(fluctuation_ratio(state, ctx, w, eps, delta)),
        "forward": _num(forward_probability(eps)),
        "reverse": _num(rev.value),
        "feasible": rev.feasible,
    }
    _emit(_dump(report), args.out)
    return EXIT_OK if rev.feasible else EXIT_INFEASIBLE


def cmd_simulate(args) -> int:
    spec = _load_spec(args)
    ctx, state = spec.build()
    eps = _param(spec, "epsilon")
    source = smooth(state, ctx, eps).smoothed_state if eps else state
    w, info = spec.work(ctx)
    if w is None:
        w = deterministic_work(source, ctx)
    G = spec.G if spec.G is not None else 1
    scale = degeneracy_scale(source, ctx, BathModel(ctx.beta, G), w) if ctx.exact else 1
    bath = BathModel(ctx.beta, G * scale)
    currents = build_transition_currents(source, ctx, bath, w)
    dist, final = forward_distribution(currents, source, bath)
    fmt = args.format or "json"
    if fmt == "csv":
        lines = ["w,probability"]
        lines += [f"{_csv_num(k)},{_csv_num(v)}" for k, v in dist.outcomes.items()]
        lines.append(f"failure,{_csv_num(dist.failure)}")
        text = "\n".join(lines) + "\n"
    else:
        report = {
            "spec": spec.to_json(),
            **info,
            "G": _num(bath.G),
            "G_scale": scale,
            "distribution": [{"w": _num(k), "probability": _num(v)} for k, v in dist.outcomes.items()],
            "failure": _num(dist.failure),
            "final_state": [_num(p) for p in final.in_input_order()],
            "currents": {
                "rows": [ctx.spectrum.index[i] for i in currents.rows],
                "cols": [ctx.spectrum.index[j] for j in currents.cols],
                "counts": [[_num(k) for k in row] for row in currents.counts],
            },
        }
        text = _dump(report)
    _emit(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    mode = args.arith or args.global_arith or "exact"
    lines, violations, verified, refused = [], 0, 0, 0
    for report in run_verification(args.instances, args.seed, mode):
        lines.append(json.dumps(report, sort_keys=True))
        if report.get("refused"):
            refused += 1
            continue
        verified += 1
        violations += not report["ok"]
    _emit("\n".join(lines) + ("\n" if lines else ""), args.out)
    print(
        f"verified {verified} instances ({refused} refused over size caps), {violations} violations",
        file=sys.stderr,
    )
    if violations or verified < args.instances:
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermoflux", description=__doc__.splitlines()[0])
    parser.add_argument("--mode", dest="global_arith", choices=("exact", "float"), default=None,
                        help="arithmetic mode (default: exact when beta is given as ln(p/q))")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="system spec JSON file")
    common.add_argument("--epsilon", help="failure probability of the forward run")
    common.add_argument("--delta", help="failure probability of the reverse run")
    common.add_argument("--w", help='work value: number, "p/q", or "factor:p/q" for exp(-beta*w)')
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "svg"))

    arith = argparse.ArgumentParser(add_help=False)
    arith.add_argument("--mode", dest="arith", choices=("exact", "float"), default=None)

    sub.add_parser("curve", parents=[common, arith], help="thermo-majorization curve").set_defaults(func=cmd_curve)
    p = sub.add_parser("entropy", parents=[common], help="D0 and its smoothed variants")
    p.add_argument("--mode", dest="variant", choices=("fractional", "integral", "both"), default="both")
    p.set_defaults(func=cmd_entropy)
    sub.add_parser("bound", parents=[common, arith], help="epsilon-deterministic work bound").set_defaults(func=cmd_bound)
    sub.add_parser("ratio", parents=[common, arith], help="fluctuation ratio").set_defaults(func=cmd_ratio)
    sub.add_parser("simulate", parents=[common, arith], help="work distribution from transition currents").set_defaults(
        func=cmd_simulate
    )
    p = sub.add_parser("verify", parents=[arith], help="oracle sweep over random instances")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ThermofluxError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
