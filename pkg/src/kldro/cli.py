"""Command-line front end.

Subcommands:

* ``run``       -- execute a sweep described by a JSON config and write CSVs;
* ``worstcase`` -- worst-case mean of a single pmf over a KL ball;
* ``radius``    -- the three radius calibrations for one action;
* ``graph``     -- dump a layered graph as an edge list.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .experiments import CONFIG_FIELDS, ExperimentConfig, emit_results, run_sweep
from .graphs import build_layered, to_edgelist
from .marginals import Marginal, Support
from .radius import RadiusInputs, radius_agrawal, radius_baseline, radius_best, radius_mardia
from .worstcase import solve_dual


class ValidationError(Exception):
    pass


def _parse_scalar(key: str, text: str, typ):
    try:
        if typ is int:
            return int(text)
        if typ is float:
            return None if text.lower() in ("none", "null") else float(text)
        if typ is bool:
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError
        return text
    except ValueError:
        raise ValidationError(f"override {key}={text!r} does not parse as {typ.__name__}")


def _apply_overrides(raw: dict, overrides: list[str]) -> dict:
    out = dict(raw)
    for item in overrides:
        if "=" not in item:
            raise ValidationError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        if key not in CONFIG_FIELDS:
            raise ValidationError(f"unknown config key {key!r}")
        typ, _ = CONFIG_FIELDS[key]
        if typ is list:
            parts = [p for p in text.split(",") if p != ""]
            if key == "rules":
                out[key] = parts
            else:
                values = []
                for p in parts:
                    try:
                        values.append(int(p))
                    except ValueError:
                        try:
                            values.append(float(p))
                        except ValueError:
                            raise ValidationError(f"override {key}: {p!r} is not numeric")
                out[key] = values
        else:
            out[key] = _parse_scalar(key, text, typ)
    return out


def _parse_floats(text: str, flag: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in text.split(",") if p != ""])
    except ValueError:
        raise ValidationError(f"{flag} expects a comma-separated list of numbers")


def cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: malformed config {args.config}: line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return 1
    try:
        raw = _apply_overrides(raw, args.set or [])
        if args.seed is not None:
            raw["seed"] = args.seed
        cfg = ExperimentConfig.from_dict(raw)
    except (ValidationError, ValueError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 1
    results = run_sweep(cfg, workers=args.threads)
    results_path, agg_path = emit_results(results, args.out, cfg.sweep, cfg.rules)
    for point in results:
        for rule in cfg.rules:
            mean_rho, mad_rho, freq = point.aggregates[rule]
            print(
                f"{cfg.sweep}={point.sweep_value:g} {rule}: mean_rho={mean_rho:.6f} "
                f"mad_rho={mad_rho:.6f} disappointment={freq:.4f}"
            )
    print(f"wrote {results_path} and {agg_path}")
    return 0


def cmd_worstcase(args) -> int:
    try:
        points = _parse_floats(args.z, "--z")
        probs = _parse_floats(args.q, "--q")
        if args.r < 0:
            raise ValidationError("--r must be nonnegative")
        marginal = Marginal(Support(points), probs)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sol = solve_dual(marginal, args.r)
    print(f"worst-case expected cost: {sol.value!r}")
    print(f"beta: {sol.beta!r}")
    pmf = ", ".join(f"{z:g}: {float(p)!r}" for z, p in zip(points, sol.primal.probs))
    print(f"worst-case pmf: {pmf}")
    return 0


def cmd_radius(args) -> int:
    try:
        inputs = RadiusInputs(
            T_a=args.T, d_a=args.d, num_actions=args.A,
            T_min=args.T_min, alpha_a=args.alpha_a,
            rate=-float(np.log(args.alpha_a)) / args.T_min,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"baseline: {radius_baseline(inputs)!r}")
    if inputs.d_a >= 2:
        print(f"agrawal:  {radius_agrawal(inputs)!r}")
        if inputs.T_a >= 2:
            print(f"mardia:   {radius_mardia(inputs)!r}")
    else:
        print("agrawal:  n/a (needs d >= 2)")
        print("mardia:   n/a (needs d >= 2)")
    value, label = radius_best(inputs)
    print(f"minimum:  {value!r} ({label})")
    return 0


def cmd_graph(args) -> int:
    try:
        g = build_layered(args.layers, args.width)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = to_edgelist(g)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out} ({g.num_nodes} nodes, {g.num_arcs} arcs)")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kldro",
        description="Distributionally robust rules for data-driven shortest paths",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the JSON config")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--threads", type=int, default=1, help="worker processes for replicates")
    p_run.set_defaults(func=cmd_run)

    p_wc = sub.add_parser("worstcase", help="worst-case mean over a KL ball")
    p_wc.add_argument("--z", required=True, help="support points, e.g. 1,2")
    p_wc.add_argument("--q", required=True, help="pmf, e.g. 0.5,0.5")
    p_wc.add_argument("--r", type=float, required=True, help="ball radius")
    p_wc.set_defaults(func=cmd_worstcase)

    p_rad = sub.add_parser("radius", help="the three radius calibrations")
    p_rad.add_argument("--T", type=int, required=True, help="sample count of the action")
    p_rad.add_argument("--d", type=int, required=True, help="support size of the action")
    p_rad.add_argument("--A", type=int, required=True, help="number of actions")
    p_rad.add_argument("--T-min", dest="T_min", type=int, required=True,
                       help="minimum sample count over actions")
    p_rad.add_argument("--alpha-a", dest="alpha_a", type=float, required=True,
                       help="per-action confidence in (0, 1)")
    p_rad.set_defaults(func=cmd_radius)

    p_g = sub.add_parser("graph", help="dump a layered graph as an edge list")
    p_g.add_argument("--layers", type=int, required=True, help="intermediate layer count h")
    p_g.add_argument("--width", type=int, required=True, help="nodes per layer w")
    p_g.add_argument("--out", default=None, help="write to a file instead of stdout")
    p_g.set_defaults(func=cmd_graph)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures map to exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
