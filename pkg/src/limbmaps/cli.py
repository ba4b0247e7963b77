"""Command-line entry point: `limbmaps <verb> ...`.

Exit codes: 0 success, 1 domain error (JSON {"error": ...} on stdout),
2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import theta as th
from .circle import Angle, limb_combinatorics, orbit_type
from .dynamics import DynamicalSystem, trace_dyn_ray
from .parameter import (
    ComponentRecord,
    ParameterSpace,
    locate_component,
    misiurewicz_record,
    solve_special,
    trace_param_ray,
)
from .render import PlaneSpec, render_plane, write_pgm, write_png
from .verify import SUITES, run_suite

DEFAULT_BOUNDS = {
    "mandelbrot": (-2.5, 1.5, -2.0, 2.0),
    "locus": (-3.0, 13.0, -4.7, 4.7),
    "monic": (-4.0, 4.0, -4.0, 4.0),
    "julia": (-2.0, 2.0, -2.0, 2.0),
    "juliaP": (-4.0, 2.0, -3.0, 3.0),
}


def _fraction(text: str) -> Fraction:
    """Exact rational 'a/b'; decimal or exponent syntax is refused."""
    if any(ch in text for ch in ".eE"):
        raise argparse.ArgumentTypeError(f"angles are exact rationals a/b, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def _angle(text: str) -> Angle:
    return Angle(_fraction(text))


def _rotation(text: str):
    f = _fraction(text)
    if f.denominator < 2 or not 0 < f < 1:
        raise argparse.ArgumentTypeError(f"rotation number must be p/q in (0,1), got {text!r}")
    return f.numerator, f.denominator


def _space(name: str, q) -> ParameterSpace:
    if name == "M":
        return ParameterSpace.mandelbrot()
    if q is None:
        raise argparse.ArgumentTypeError(f"space {name} needs --q")
    return ParameterSpace.locus(q) if name == "L" else ParameterSpace.monic_locus(q)


def _cjson(z):
    return {"re": z.real, "im": z.imag}


def _emit(obj) -> None:
    print(obj if isinstance(obj, str) else json.dumps(obj, sort_keys=True))


# --- verbs -----------------------------------------------------------------

def _cmd_limb(a):
    p, q = a.rotation
    _emit(limb_combinatorics(p, q).to_dict())


def _cmd_theta(a):
    p, q = a.rotation
    x = a.angle
    if a.symmetry:
        out = th.symmetry_angle(p, q)
    elif x is None:
        raise argparse.ArgumentTypeError("an angle is required")
    elif a.inverse:
        out = th.theta_limb_inv(p, q, x)
    elif a.bar:
        out = th.theta_bar(p, q, Angle(x))
    elif a.hat:
        out = th.theta_hat(p, q, Angle(x))
    elif a.map:
        p2, q2 = a.map
        if q2 != q:
            raise argparse.ArgumentTypeError("--map needs the same denominator q")
        out = th.theta_interlimb(p, p2, q, Angle(x))
    elif a.full:
        p2, q2 = a.full
        if q2 != q:
            raise argparse.ArgumentTypeError("--full needs the same denominator q")
        out = th.theta_hat_full(p, p2, q, Angle(x))
    elif a.tune:
        out = th.tune_angle(tuple(a.tune), Angle(x))
    else:
        out = th.theta_limb(p, q, Angle(x))
    if a.json:
        _emit({"schema": "limbmaps.angle/1", "value": str(out)})
    else:
        _emit(str(out))


def _cmd_ray(a):
    if a.target == "M":
        tr = trace_param_ray(ParameterSpace.mandelbrot(), _angle(a.args[0]), a.G_min, a.steps)
    elif a.target == "L":
        q, x = int(a.args[0]), _fraction(a.args[1])
        tr = trace_param_ray(ParameterSpace.locus(q), x if x == 1 else Angle(x), a.G_min, a.steps)
    elif a.target == "julia":
        c = complex(float(a.args[0]), float(a.args[1]))
        tr = trace_dyn_ray(DynamicalSystem.quadratic(c), _angle(a.args[2]), None, a.G_min, a.steps)
    else:  # juliaP q re im angle
        q = int(a.args[0])
        lam = complex(float(a.args[1]), float(a.args[2]))
        tr = trace_dyn_ray(DynamicalSystem.family(q, lam), _angle(a.args[3]), None, a.G_min, a.steps)
    text = tr.to_csv() if a.format == "csv" else json.dumps(tr.to_dict(), sort_keys=True)
    if a.output:
        with open(a.output, "w") as fh:
            fh.write(text)
        _emit({"schema": "limbmaps.written/1", "path": a.output,
               "landing_estimate": _cjson(tr.landing_estimate), "status": tr.status})
    else:
        _emit(text.rstrip("\n"))


def _cmd_solve(a):
    space = _space(a.space, a.q)
    seed = complex(*a.seed) if a.seed else None
    if a.kind == "mis":
        if a.angle is not None:
            d = 2 if space.kind == "mandelbrot" else space.q + 1
            lk = orbit_type(a.angle, d)
            arg = a.angle if space.kind == "mandelbrot" else a.angle.value
            est = trace_param_ray(space, arg, a.G_min).landing_estimate
            l, k = lk.preperiod, lk.period
            angles = [a.angle]
        else:
            if seed is None or a.preperiod is None or a.period is None:
                raise argparse.ArgumentTypeError("mis needs --angle, or --seed with --preperiod and --period")
            est, l, k, angles = seed, a.preperiod, a.period, []
        c = solve_special(space, "misiurewicz", est, k=k, l=l)
        _emit(misiurewicz_record(space, c, angles, l, k).to_dict())
        return
    if a.period is None:
        raise argparse.ArgumentTypeError(f"{a.kind} needs --period")
    if a.angles:
        comp = locate_component(space, a.angles, a.period, a.G_min)
        _emit(comp.to_dict())
        return
    if seed is None:
        raise argparse.ArgumentTypeError(f"{a.kind} needs --seed RE IM or --angles A B")
    value = solve_special(space, "center" if a.kind == "center" else "root", seed, k=a.period)
    if a.kind == "center":
        _emit(ComponentRecord(space, a.period, value).to_dict())
    else:
        _emit({"schema": "limbmaps.root/1", "space": space.label(), "period": a.period,
               "root": _cjson(value)})


def _cmd_render(a):
    bounds = tuple(a.bounds) if a.bounds else DEFAULT_BOUNDS[a.target]
    param = complex(*a.param) if a.param else 0j
    overlays = [(kind, _fraction(x) if kind == "L" else _angle(x)) for kind, x in (a.ray or [])]
    spec = PlaneSpec(a.target, bounds, a.size[0], a.size[1], a.max_iter, a.q, param, overlays)
    img = render_plane(spec)
    if a.output.lower().endswith(".png"):
        write_png(img, a.output)
    else:
        write_pgm(img, a.output)
    _emit({"schema": "limbmaps.render/1", "path": a.output, "width": img.width,
           "height": img.height, "inside_pixels": int(img.inside().sum())})


def _cmd_verify(a):
    rep = run_suite(a.suite, p=a.p, q=a.q, p2=a.p2, seed=a.seed,
                    sample_count=a.samples, angles=a.angles)
    text = rep.to_json(timing=a.timing, indent=2)
    if a.output:
        with open(a.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if rep.ok else 1


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="limbmaps", description="Exact limb surgery maps and their numerical counterparts.")
    sub = ap.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("limb", help="combinatorics of the p/q limb")
    s.add_argument("rotation", type=_rotation, metavar="p/q")
    s.set_defaults(func=_cmd_limb)

    s = sub.add_parser("theta", help="exact surgery maps on angles")
    s.add_argument("rotation", type=_rotation, metavar="p/q")
    s.add_argument("angle", type=_fraction, nargs="?", metavar="a/b")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--inverse", action="store_true", help="inverse of the limb map")
    g.add_argument("--bar", action="store_true", help="the involution of the wake")
    g.add_argument("--symmetry", action="store_true", help="fixed angle of the involution")
    g.add_argument("--hat", action="store_true", help="truncated-circle conjugacy")
    g.add_argument("--map", type=_rotation, metavar="p'/q", help="map to another limb")
    g.add_argument("--full", type=_rotation, metavar="p'/q", help="extension to the whole circle")
    g.add_argument("--tune", type=_angle, nargs=2, metavar="a/b", help="tune by a root pair")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=_cmd_theta)

    s = sub.add_parser("ray", help="trace an external ray",
                       description="ray M a/b | ray L q a/b | ray julia re im a/b | ray juliaP q re im a/b")
    s.add_argument("target", choices=("M", "L", "julia", "juliaP"))
    s.add_argument("args", nargs="+")
    s.add_argument("--G-min", dest="G_min", type=float, default=1e-8)
    s.add_argument("--steps", type=int, default=8, help="steps per halving of potential")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("-o", "--output")
    s.set_defaults(func=_cmd_ray, arity={"M": 1, "L": 2, "julia": 3, "juliaP": 4})

    s = sub.add_parser("solve", help="centers, roots and Misiurewicz parameters")
    s.add_argument("kind", choices=("center", "root", "mis"))
    s.add_argument("space", choices=("M", "L", "monic"))
    s.add_argument("--q", type=int)
    s.add_argument("--period", type=int)
    s.add_argument("--preperiod", type=int)
    s.add_argument("--seed", type=float, nargs=2, metavar=("RE", "IM"))
    s.add_argument("--angles", type=_angle, nargs=2, metavar="a/b")
    s.add_argument("--angle", type=_angle, metavar="a/b")
    s.add_argument("--G-min", dest="G_min", type=float, default=1e-8)
    s.set_defaults(func=_cmd_solve)

    s = sub.add_parser("render", help="escape-time image (PGM, or PNG with Pillow)")
    s.add_argument("target", choices=tuple(DEFAULT_BOUNDS))
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--q", type=int, default=3)
    s.add_argument("--param", type=float, nargs=2, metavar=("RE", "IM"))
    s.add_argument("--bounds", type=float, nargs=4, metavar=("RE0", "RE1", "IM0", "IM1"))
    s.add_argument("--size", type=int, nargs=2, default=(256, 256), metavar=("W", "H"))
    s.add_argument("--max-iter", dest="max_iter", type=int, default=200)
    s.add_argument("--ray", nargs=2, action="append", metavar=("KIND", "a/b"),
                   help="overlay; KIND is M, L or julia")
    s.set_defaults(func=_cmd_render)

    s = sub.add_parser("verify", help="run a verification suite")
    s.add_argument("suite", choices=SUITES)
    s.add_argument("--p", type=int, default=1)
    s.add_argument("--q", type=int, default=3)
    s.add_argument("--p2", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int)
    s.add_argument("--angles", type=_angle, nargs=2, metavar="a/b")
    s.add_argument("--timing", action="store_true", help="include runtime (breaks byte-reproducibility)")
    s.add_argument("-o", "--output")
    s.set_defaults(func=_cmd_verify)
    return ap


def parse_and_dispatch(argv) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(list(argv))
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    arity = getattr(a, "arity", None)
    if arity and len(a.args) != arity[a.target]:
        ap.print_usage(sys.stderr)
        print(f"limbmaps: error: ray {a.target} takes {arity[a.target]} arguments", file=sys.stderr)
        return 2
    try:
        return a.func(a) or 0
    except argparse.ArgumentTypeError as exc:
        ap.print_usage(sys.stderr)
        print(f"limbmaps: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        _emit({"error": str(exc), "type": type(exc).__name__})
        return 1


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
