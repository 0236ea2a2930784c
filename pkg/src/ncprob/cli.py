"""Command-line front end: scenario files in, reports/densities/flow traces out.

Subcommands: idiv | convolve | flow | limit-run | bp-check | circle-run.
Exit codes: 0 ok, 2 validation failure, 3 numerical failure.  Reports are
byte-identical across reruns of the same scenario: no wall clock, fixed
iteration order, canonical grids embedded.
"""

from __future__ import annotations

import argparse
import json
import sys

import jsonschema

from . import __version__
from .circle import (
    DISK_GRID,
    CircleArraySpec,
    CircleGenerator,
    circle_equivalence,
    rotation_correction,
)
from .convolutions import (
    boolean_convolve,
    classical_convolve,
    free_convolve,
    monotone_convolve,
)
from .errors import NumericalError, ValidationError
from .harness import (
    ArraySpec,
    DEFAULT_NS,
    T_GRID,
    bp_crosscheck,
    run_powers,
    subprobability_equivalence,
)
from .idiv import (
    FLOW_STEP,
    LevyTriple,
    boolean_idiv,
    classical_idiv_density,
    flow_map,
    free_idiv_eval,
    monotone_idiv_flow,
)
from .measures import CircleMeasure, FiniteAtomicMeasure, PARAMETER
from .solvers import newton, upper_half_plane_guard
from .transforms import ZR, stieltjes_invert

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

_ARRAY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "family": {"enum": ["bernoulli_clt", "poisson", "damped_poisson", "fixed_bernoulli"]},
        "lam": {"type": "number"},
        "c": {"type": "number"},
        "shift_scale": {"type": "number"},
        "n_values": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "k_values": {"type": "array", "items": {"type": "integer", "minimum": 1}},
    },
    "required": ["family"],
}

_CIRCLE_ARRAY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "family": {"enum": ["semigroup", "rotated_semigroup"]},
        "beta": {"type": "number"},
        "sigma": {"type": "array", "items": {
            "type": "array", "items": {"type": "number"},
            "minItems": 2, "maxItems": 2}},
        "rotation_ell": {"oneOf": [{"type": "integer"}, {"enum": ["half"]}]},
        "n_values": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "k_values": {"type": "array", "items": {"type": "integer", "minimum": 1}},
    },
    "required": ["family", "beta", "sigma"],
}

_TRIPLE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "m": {"type": "number"},
        "gamma": {"type": "number"},
        "sigma": {"type": "array", "items": {
            "type": "array", "items": {"type": "number"},
            "minItems": 2, "maxItems": 2}},
    },
    "required": ["m", "gamma", "sigma"],
}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "space": {"enum": ["real", "circle"]},
        "array": {"oneOf": [_ARRAY_SCHEMA, _CIRCLE_ARRAY_SCHEMA]},
        "triple": _TRIPLE_SCHEMA,
        "generator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "beta": {"type": "number"},
                "sigma": _TRIPLE_SCHEMA["properties"]["sigma"],
            },
            "required": ["beta", "sigma"],
        },
        "ops": {"type": "array", "items": {
            "enum": ["classical", "free", "boolean", "monotone"]}},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "flow_step": {"type": "number", "exclusiveMinimum": 0, "maximum": 1e-2},
    },
    "required": ["space", "array"],
}


def _load_scenario(path):
    with open(path, "r", encoding="utf-8") as fh:
        scenario = json.load(fh)
    jsonschema.validate(scenario, SCENARIO_SCHEMA)
    return scenario


def _k_table(array):
    if "k_values" not in array:
        return None
    ns = array.get("n_values", list(DEFAULT_NS))
    ks = array["k_values"]
    if len(ks) != len(ns):
        raise ValidationError("array.k_values must align with array.n_values")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValidationError("array.k_values must be strictly increasing")
    return tuple(zip(ns, ks))


def _real_spec(array):
    ns = tuple(array.get("n_values", DEFAULT_NS))
    family = array["family"]
    if family == "bernoulli_clt":
        spec = ArraySpec.bernoulli_clt(ns)
    elif family == "poisson":
        spec = ArraySpec.poisson(array.get("lam", 1.0), ns)
    elif family == "damped_poisson":
        spec = ArraySpec.damped_poisson(
            array.get("lam", 1.0), array.get("c", 1.0),
            array.get("shift_scale", 0.0), ns)
    else:
        spec = ArraySpec.fixed(n_values=ns)
    table = _k_table(array)
    if table is not None:
        spec = ArraySpec(spec.name, spec.n_values, spec.measure_fn,
                         spec.f_eval_fn, spec.mass_fn, table, spec.limit)
    return spec


def _circle_spec(array, flow_step):
    ns = tuple(array.get("n_values", DEFAULT_NS))
    sigma = CircleMeasure.from_json_pairs(array["sigma"], role=PARAMETER)
    gen = CircleGenerator(float(array["beta"]), sigma)
    ell = array.get("rotation_ell", 0)
    if array["family"] == "semigroup":
        ell = 0
    if ell == "half":
        ell = lambda n: n // 2
    return CircleArraySpec.semigroup(gen, ns, flow_step=flow_step, rotation_ell=ell)


def _triple_from(obj):
    sigma = FiniteAtomicMeasure.from_json_pairs(obj["sigma"], role=PARAMETER)
    return LevyTriple(float(obj["m"]), float(obj["gamma"]), sigma)


def parse_sigma_arg(text, circle=False):
    """pos:weight,pos:weight ('' for the zero measure)."""
    pairs = []
    if text.strip():
        for chunk in text.split(","):
            try:
                pos, w = chunk.split(":")
                pairs.append((float(pos), float(w)))
            except ValueError as exc:
                raise ValidationError(f"bad sigma atom {chunk!r}") from exc
    cls = CircleMeasure if circle else FiniteAtomicMeasure
    return cls.from_json_pairs(pairs, role=PARAMETER)


def _dump_json(obj, path):
    text = json.dumps(obj, sort_keys=True, indent=2)
    if path is None:
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _write_csv(path, header_lines, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        for row in rows:
            fh.write(",".join(repr(v) for v in row) + "\n")


def _write_svg(path, points, width=640, height=360):
    """Single-polyline plot, no external renderer."""
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x0, x1 = min(xs), max(xs)
    y1 = max(ys) if max(ys) > 0 else 1.0
    span_x = (x1 - x0) or 1.0
    coords = " ".join(
        f"{(x - x0) / span_x * width:.2f},{height - y / y1 * (height - 10):.2f}"
        for x, y in points
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}">'
            f'<polyline fill="none" stroke="black" stroke-width="1" points="{coords}"/>'
            "</svg>\n"
        )


def _grid_json(points):
    return [[z.real, z.imag] for z in points]


def _provenance(args, op):
    return [
        f"ncprob {__version__} idiv",
        f"op={op} m={args.m!r} gamma={args.gamma!r} sigma={args.sigma!r}",
        f"grid_eps={args.grid_eps!r} flow_step={args.flow_step!r} "
        f"x_window={args.x_window} bins={args.bins}",
    ]


def _parse_window(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise ValidationError(f"bad window {text!r}; expected lo:hi") from exc
    if hi <= lo:
        raise ValidationError("window must satisfy lo < hi")
    return lo, hi


def _free_line_g(triple, eps):
    """G of the free law on the eps-line, warm-starting Newton along the sweep."""
    state = {}

    def g(z):
        guess = state.get("w", z)
        try:
            w = newton(lambda v: v + _voic(triple, v) - z,
                       lambda v: 1.0 + _dvoic(triple, v), guess,
                       tol=1e-12, guard=upper_half_plane_guard, label="free line")
        except NumericalError:
            w = free_idiv_eval(triple, z)
        state["w"] = w
        return 1.0 / w

    return g


def _voic(triple, w):
    acc = complex(triple.gamma)
    for p, s in triple.sigma.atoms:
        acc = acc + s * (1.0 + p * w) / (w - p)
    return acc


def _dvoic(triple, w):
    acc = 0.0j
    for p, s in triple.sigma.atoms:
        acc = acc - s * (1.0 + p * p) / (w - p) ** 2
    return acc


def _emit_atoms(args, out, engine, measure):
    if args.format == "csv":
        _write_csv(f"{out}_atoms.csv",
                   [f"ncprob {__version__} {engine}", "position,weight"],
                   measure.to_json_pairs())
    else:
        _dump_json({"engine": engine, "atoms": measure.to_json_pairs(),
                    "mass": measure.mass}, f"{out}_atoms.json")


def cmd_idiv(args):
    triple = LevyTriple(args.m, args.gamma, parse_sigma_arg(args.sigma))
    out = args.output or "ncprob_idiv"
    lo, hi = _parse_window(args.x_window)
    eps = args.grid_eps
    if args.op == "boolean":
        _emit_atoms(args, out, "boolean-idiv", boolean_idiv(triple))
        return EXIT_OK
    if args.op == "classical":
        xs, dens = classical_idiv_density(triple)
        keep = [(float(x), float(d)) for x, d in zip(xs, dens) if lo <= x <= hi]
        _write_csv(f"{out}_density.csv", _provenance(args, "classical") + ["x,density"], keep)
        if args.svg:
            _write_svg(f"{out}_density.svg", keep)
        return EXIT_OK
    if args.op == "monotone":
        g = lambda z: 1.0 / flow_map(triple, 1.0, z, step=args.flow_step)
    else:  # free
        g = _free_line_g(triple, eps)
    inv = stieltjes_invert(g, eps, (lo, hi), args.bins)
    _write_csv(f"{out}_density.csv", _provenance(args, args.op) + ["x,density"],
               inv.density)
    _dump_json({"engine": f"{args.op}-idiv", "atoms": [list(a) for a in inv.atoms]},
               f"{out}_atoms.json")
    if args.svg:
        _write_svg(f"{out}_density.svg", inv.density)
    return EXIT_OK


def _load_measure(path):
    with open(path, "r", encoding="utf-8") as fh:
        return FiniteAtomicMeasure.from_json_pairs(json.load(fh))


def cmd_convolve(args):
    mu, nu = _load_measure(args.a), _load_measure(args.b)
    out = args.output or "ncprob_convolve"
    if args.op == "free":
        grid = free_convolve(mu, nu)
        _dump_json(
            {"engine": "free-subordination", "grid": _grid_json(grid.points),
             "values": _grid_json(grid.values), "kind": grid.kind, "mass": grid.mass},
            f"{out}_grid.json",
        )
        return EXIT_OK
    fn = {"classical": classical_convolve, "boolean": boolean_convolve,
          "monotone": monotone_convolve}[args.op]
    _emit_atoms(args, out, f"{args.op}-convolve", fn(mu, nu))
    return EXIT_OK


def cmd_flow(args):
    triple = LevyTriple(args.m, args.gamma, parse_sigma_arg(args.sigma))
    result = monotone_idiv_flow(triple, args.t_end, args.flow_step)
    rows = []
    for t, grid in zip(result.times, result.grids):
        for z, v in zip(grid.points, grid.values):
            rows.append((t, z.real, z.imag, v.real, v.imag))
    header = [
        f"ncprob {__version__} flow",
        f"m={args.m!r} gamma={args.gamma!r} sigma={args.sigma!r} "
        f"t_end={args.t_end!r} flow_step={args.flow_step!r}",
        "t,re_z,im_z,re_F,im_F",
    ]
    _write_csv(args.output or "ncprob_flow.csv", header, rows)
    return EXIT_OK


def cmd_limit_run(args):
    scenario = _load_scenario(args.scenario)
    if scenario["space"] != "real":
        raise ValidationError("limit-run handles real-line scenarios; use circle-run")
    tol = scenario.get("tolerance", args.tolerance)
    step = scenario.get("flow_step", args.flow_step)
    spec = _real_spec(scenario["array"])
    triple = _triple_from(scenario["triple"]) if "triple" in scenario else spec.limit
    report = {
        "scenario": scenario,
        "grids": {"zr": _grid_json(ZR), "t_grid": list(T_GRID)},
        "version": __version__,
    }
    if triple.m < 1.0 - 1e-12:
        report["result"] = subprobability_equivalence(spec, triple, tol, step)
    else:
        ops = scenario.get("ops", ["classical", "free", "boolean", "monotone"])
        report["result"] = {
            "ops": {op: run_powers(spec, op, triple, tol, step).to_dict() for op in ops},
            "tolerance": tol,
        }
    _dump_json(report, args.output)
    return EXIT_OK


def cmd_bp_check(args):
    scenario = _load_scenario(args.scenario)
    if scenario["space"] != "real":
        raise ValidationError("bp-check handles real-line scenarios")
    tol = scenario.get("tolerance", args.tolerance)
    step = scenario.get("flow_step", args.flow_step)
    spec = _real_spec(scenario["array"])
    if "triple" in scenario:
        spec = ArraySpec(spec.name, spec.n_values, spec.measure_fn,
                         spec.f_eval_fn, spec.mass_fn, spec.k_table,
                         _triple_from(scenario["triple"]))
    result = bp_crosscheck(spec, tol, step)
    report = {
        "scenario": scenario,
        "grids": {"zr": _grid_json(ZR), "t_grid": list(T_GRID)},
        "result": result,
        "version": __version__,
    }
    _dump_json(report, args.output)
    return EXIT_OK if result["agreement"] else EXIT_NUMERICAL


def cmd_circle_run(args):
    scenario = _load_scenario(args.scenario)
    if scenario["space"] != "circle":
        raise ValidationError("circle-run handles circle scenarios")
    tol = scenario.get("tolerance", args.tolerance)
    step = scenario.get("flow_step", args.flow_step)
    spec = _circle_spec(scenario["array"], step)
    gen_obj = scenario.get("generator")
    if gen_obj is not None:
        gen = CircleGenerator(
            float(gen_obj["beta"]),
            CircleMeasure.from_json_pairs(gen_obj["sigma"], role=PARAMETER),
        )
    else:
        gen = spec.generator
    result = circle_equivalence(spec, gen.beta, gen.sigma, tol, step)
    report = {
        "scenario": scenario,
        "grids": {"disk": _grid_json(DISK_GRID)},
        "result": result,
        "version": __version__,
    }
    if scenario["array"]["family"] == "rotated_semigroup":
        report["rotation_correction"] = rotation_correction(spec, gen.beta, tol, step)
    _dump_json(report, args.output)
    return EXIT_OK


def _add_triple_args(p):
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--sigma", type=str, default="",
                   help="atoms as pos:weight,pos:weight ('' for zero)")


def _add_common(p):
    p.add_argument("--grid-eps", dest="grid_eps", type=float, default=1e-3)
    p.add_argument("--flow-step", dest="flow_step", type=float, default=FLOW_STEP)
    p.add_argument("--tolerance", type=float, default=0.05)
    p.add_argument("--output", type=str, default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--svg", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ncprob",
        description="Convolution calculus and limit-theorem checks for "
                    "classical, free, Boolean and monotone independence.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("idiv", help="laws of a Levy triple: atoms or density")
    _add_triple_args(p)
    p.add_argument("--op", choices=["classical", "free", "boolean", "monotone"],
                   required=True)
    p.add_argument("--x-window", dest="x_window", type=str, default="-6:6")
    p.add_argument("--bins", type=int, default=400)
    _add_common(p)
    p.set_defaults(func=cmd_idiv)

    p = sub.add_parser("convolve", help="convolve two atomic measures")
    p.add_argument("--op", choices=["classical", "free", "boolean", "monotone"],
                   required=True)
    p.add_argument("--a", required=True, help="measure JSON [[pos, weight], ...]")
    p.add_argument("--b", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("flow", help="dump flow snapshots as CSV")
    _add_triple_args(p)
    p.add_argument("--t-end", dest="t_end", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(func=cmd_flow)

    for name, fn in (("limit-run", cmd_limit_run), ("bp-check", cmd_bp_check),
                     ("circle-run", cmd_circle_run)):
        p = sub.add_parser(name)
        p.add_argument("scenario", help="scenario JSON path")
        _add_common(p)
        p.set_defaults(func=fn)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, jsonschema.ValidationError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
