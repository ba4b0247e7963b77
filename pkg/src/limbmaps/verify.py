"""Reproducible verification suites built from the exact and numeric layers."""
from __future__ import annotations

import cmath
import json
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import theta as th
from .circle import Angle, Arc, orbit_type
from .dynamics import DynamicalSystem, classify_critical_orbit
from .parameter import (
    ParameterSpace,
    _period_of,
    involution_numeric,
    locate_component,
    membership,
    phi_numeric,
    solve_special,
    trace_param_ray,
)

EXACT, LANDING, IDENTITY = 0.0, 1e-5, 1e-9
SUITES = ("conjugacy", "involution", "theoremC", "theoremD", "locus_structure", "symmetry")


def _plain(x):
    """JSON-friendly rendering of case values."""
    if isinstance(x, (Angle, Fraction)):
        return str(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    return x


@dataclass
class VerificationReport:
    suite: str
    params: dict
    cases: list = field(default_factory=list)
    runtime_seconds: float = 0.0

    def add(self, cid, inputs, expected, observed, error, tol=EXACT):
        ok = error is not None and math.isfinite(error) and error <= tol
        self.cases.append({
            "id": cid,
            "inputs": _plain(inputs),
            "expected": _plain(expected),
            "observed": _plain(observed),
            "error_metric": error,
            "tolerance": tol,
            "pass": bool(ok),
        })
        return ok

    @property
    def passed(self) -> int:
        return sum(c["pass"] for c in self.cases)

    @property
    def failed(self) -> int:
        return len(self.cases) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0 and bool(self.cases)

    def to_dict(self, timing: bool = False):
        summary = {"passed": self.passed, "failed": self.failed}
        if timing:
            summary["runtime_seconds"] = self.runtime_seconds
        return {
            "schema": "limbmaps.report/1",
            "suite": self.suite,
            "params": _plain(self.params),
            "cases": self.cases,
            "summary": summary,
        }

    def to_json(self, timing: bool = False, **kw) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True, **kw)


def _mismatch(a, b) -> float:
    return 0.0 if a == b else 1.0


def _rationals(rng, arc: Arc, n, maxden=2 ** 12, closed=True):
    """Random rationals on an arc, drawn by denominator then numerator."""
    lo = arc.start.value
    hi = lo + arc.length
    out = []
    while len(out) < n:
        d = rng.randint(1, maxden)
        a, b = math.ceil(lo * d), math.floor(hi * d)
        if not closed:
            a += lo * d == a
            b -= hi * d == b
        if a <= b:
            out.append(Angle(rng.randint(a, b), d))
    return out


def _wake(p, q) -> Arc:
    lo, hi = th.limb(p, q).root_pair
    return Arc.between(lo, hi)


# --- suites ----------------------------------------------------------------

def _conjugacy(rep, p, q, seed, n, **_):
    rng = random.Random(seed)
    lc = th.limb(p, q)
    fr = th.build_first_return(lc)
    bad = {"conjugacy": [], "inverse_round_trip": [], "forward_round_trip": [], "involution": []}
    for t in _rationals(rng, lc.interval, n):
        y = th.theta_hat(p, q, t)
        lhs = th.theta_hat(p, q, th.first_return_eval(fr, t))
        if lhs != (q + 1) * y % 1:
            bad["conjugacy"].append(t)
        back = th.theta_hat_inv(p, q, y)
        if back != t and not (t == lc.interval.end and back == lc.interval.start):
            bad["inverse_round_trip"].append(t)
    for _ in range(n):
        d = rng.randint(1, 2 ** 12)
        y = Fraction(rng.randrange(d + 1), d)
        if th.theta_hat(p, q, th.theta_hat_inv(p, q, y)) != y % 1 and y != 1:
            bad["forward_round_trip"].append(y)
    for t in _rationals(rng, _wake(p, q), n):
        if th.theta_bar(p, q, th.theta_bar(p, q, t)) != t:
            bad["involution"].append(t)
    for name, fails in bad.items():
        rep.add(name, {"p": p, "q": q, "samples": n}, 0, {"failures": len(fails), "first": fails[:1]},
                float(len(fails)))


def _involution(rep, p, q, seed, n, numeric=True, **_):
    rng = random.Random(seed)
    wake = _wake(p, q)
    lo, hi = th.limb(p, q).root_pair
    fails = [t for t in _rationals(rng, wake, n) if th.theta_bar(p, q, th.theta_bar(p, q, t)) != t]
    rep.add("bar_squared_identity", {"p": p, "q": q, "samples": n}, 0, len(fails), float(len(fails)))
    rep.add("endpoint_swap", [lo, hi], [hi, lo], [th.theta_bar(p, q, lo), th.theta_bar(p, q, hi)],
            _mismatch((th.theta_bar(p, q, lo), th.theta_bar(p, q, hi)), (hi, lo)))
    s = th.symmetry_angle(p, q)
    rep.add("symmetry_angle_fixed", s, s, th.theta_bar(p, q, s), _mismatch(th.theta_bar(p, q, s), s))
    rep.add("symmetry_angle_value", {"p": p, "q": q}, Fraction(1, 2), th.theta_limb(p, q, s),
            _mismatch(th.theta_limb(p, q, s), Fraction(1, 2)))
    if (p, q) == (1, 3):
        v = th.theta_bar(1, 3, Angle(1, 4))
        rep.add("bar(1/4)", Angle(1, 4), Angle(1, 6), v, _mismatch(v, Angle(1, 6)))
        rep.add("symmetry_1/3", {"p": 1, "q": 3}, Angle(11, 56), s, _mismatch(s, Angle(11, 56)))
    if numeric and s.den % 2 == 0:
        M = ParameterSpace.mandelbrot()
        l, k = orbit_type(s, 2)
        c = solve_special(M, "misiurewicz", trace_param_ray(M, s, 1e-14).landing_estimate, k=k, l=l)
        c2 = involution_numeric(p, q, theta=s).parameter
        rep.add("symmetry_arc_fixed_numeric", s, c, c2, abs(c - c2), 1e-6)


def _misiurewicz_landing(space, rel_or_angle, lk, G_min=1e-20):
    tr = trace_param_ray(space, rel_or_angle, G_min)
    p = solve_special(space, "misiurewicz", tr.landing_estimate, k=lk.period, l=lk.preperiod)
    return tr.landing_estimate, p


def _theorem_c(rep, p, q, p2, seed, n, angles=None, **_):
    M, L = ParameterSpace.mandelbrot(), ParameterSpace.locus(q)
    if angles and all(Angle(a).den % 2 for a in angles):
        _transport_hyperbolic(rep, p, q, p2, [Angle(a) for a in angles])
        return
    rng = random.Random(seed)
    wake = _wake(p, q)
    if angles:
        sample = [Angle(a) for a in angles]
    else:
        sample = []
        while len(sample) < n:
            t = _rationals(rng, wake, 1, maxden=2 ** 6, closed=False)[0]
            if t.den % 2 == 0 and t not in sample:
                sample.append(t)
    for t in sample:
        u = th.theta_limb(p, q, t)
        t2 = th.theta_interlimb(p, p2, q, t)
        for tag, space, arg, lk in (
            ("M", M, t, orbit_type(t, 2)),
            ("L", L, u, orbit_type(Angle(u), q + 1)),
            ("M'", M, t2, orbit_type(t2, 2)),
        ):
            try:
                land, par = _misiurewicz_landing(space, arg, lk)
                v = classify_critical_orbit(space.system(par), 400)
                ok_type = v.kind == "preperiodic" and v.preperiod == lk.preperiod and lk.period % v.period == 0
                rep.add(f"{tag}:{arg}:orbit_type", arg, tuple(lk),
                        (v.preperiod, v.period), 0.0 if ok_type else 1.0)
                rep.add(f"{tag}:{arg}:landing", arg, par, land, abs(land - par) / (1 + abs(par)), LANDING)
            except Exception as exc:  # reported, not raised
                rep.add(f"{tag}:{arg}", arg, "solved", repr(exc), None)


def _transport_hyperbolic(rep, p, q, p2, angles):
    M = ParameterSpace.mandelbrot()
    k = _period_of(angles[0], 2)
    comp = locate_component(M, angles, k)
    v = classify_critical_orbit(M.system(comp.center))
    rep.add("M:center", angles, k, (v.kind, v.period), 0.0 if (v.kind, v.period) == ("attracted", k) else 1.0)
    u = [th.theta_limb(p, q, a) for a in angles]
    m = _period_of(u[0], q + 1)
    rep.add("L:image_period", angles, "periodic under m_{q+1}", m, 0.0 if all(_period_of(x, q + 1) == m for x in u) else 1.0)
    lcomp, lam = phi_numeric(p, q, angles, 0.0)
    v = classify_critical_orbit(DynamicalSystem.family(q, lam))
    rep.add("L:center", u, m, (v.kind, v.period, lam),
            0.0 if (v.kind, v.period) == ("attracted", m) and abs(v.multiplier) < 1e-8 else 1.0)
    a2 = sorted(th.theta_interlimb(p, p2, q, a) for a in angles)
    k2 = _period_of(a2[0], 2)
    comp2 = locate_component(M, a2, k2)
    v = classify_critical_orbit(M.system(comp2.center))
    rep.add("M':center", a2, k2, (v.kind, v.period, comp2.center),
            0.0 if (v.kind, v.period) == ("attracted", k2) and abs(v.multiplier) < 1e-8 else 1.0)
    rep.add("periods", angles, None, [k, m, k2], 0.0)


def _theorem_d(rep, p, q, seed, n, **_):
    M, L = ParameterSpace.mandelbrot(), ParameterSpace.locus(q)
    rng = random.Random(seed)
    wake = _wake(p, q)
    sample = []
    while len(sample) < n:
        t = _rationals(rng, wake, 1, maxden=2 ** 6, closed=False)[0]
        if t.den % 2 == 0 and t not in sample and th.theta_bar(p, q, t) != t:
            sample.append(t)
    for t in sample:
        tb = th.theta_bar(p, q, t)
        try:
            _, c = _misiurewicz_landing(M, t, orbit_type(t, 2))
            swapped = involution_numeric(p, q, theta=tb).parameter
            rep.add(f"exchange:{t}", [t, tb], c, swapped, abs(c - swapped), 1e-6)
            u, ub = th.theta_limb(p, q, t), th.theta_limb(p, q, tb)
            _, lam = _misiurewicz_landing(L, u, orbit_type(Angle(u), q + 1))
            _, lamb = _misiurewicz_landing(L, ub, orbit_type(Angle(ub), q + 1))
            rep.add(f"locus_conjugate:{t}", [u, ub], lam.conjugate(), lamb,
                    abs(lamb - lam.conjugate()) / (1 + abs(lam)), IDENTITY)
        except Exception as exc:
            rep.add(f"theoremD:{t}", t, "solved", repr(exc), None)


def _locus_structure(rep, q, seed, n, **_):
    rng = random.Random(seed)
    L = ParameterSpace.locus(q)
    outside = []
    for _ in range(n):
        lam = cmath.rect(1.0 - rng.random(), 2 * math.pi * rng.random())
        if lam != 0 and not membership(L, lam, 500).inside:
            outside.append(lam)
    rep.add("unit_disk_inside", {"q": q, "samples": n}, 0, len(outside), float(len(outside)))
    for r, s in ((1, 2), (1, 3), (1, 4)):
        lam = 1.02 * cmath.exp(2j * math.pi * r / s)
        v = classify_critical_orbit(DynamicalSystem.family(q, lam), 20000, 1e-10)
        rep.add(f"tupling_{r}/{s}", lam, s, (v.kind, v.period),
                0.0 if (v.kind, v.period) == ("attracted", s) else 1.0)
    omega = -q / (q + 1)
    lam_star = (q + 1) * (1 + 1 / q) ** q
    val = DynamicalSystem.family(q, lam_star).f(omega)
    rep.add("branch_point", lam_star, -q, val, abs(val + q), 1e-12)
    v = classify_critical_orbit(DynamicalSystem.family(q, lam_star))
    rep.add("branch_point_orbit", lam_star, (1, 1), (v.preperiod, v.period),
            0.0 if (v.kind, v.preperiod, v.period) == ("preperiodic", 1, 1) else 1.0)
    lam1 = (1 + 1 / q) ** q
    sys = DynamicalSystem.family(q, lam1)
    rep.add("superattracting_fixed", lam1, omega, sys.f(omega), abs(sys.f(omega) - omega), 1e-12)
    rep.add("superattracting_multiplier", lam1, 0, abs(sys.df(omega)), abs(sys.df(omega)), 1e-10)
    rep.add("half_inside", 0.5, True, membership(L, 0.5).inside, 0.0 if membership(L, 0.5).inside else 1.0)


def _symmetry(rep, q, n, **_):
    L = ParameterSpace.locus(q)
    side = max(4, int(math.sqrt(n)))
    bad = 0
    for i in range(side):
        for j in range(side):
            lam = complex(-3 + 16 * (j + 0.5) / side, 4.7 * (i + 0.5) / side)
            a = membership(L, lam, 200)
            b = membership(L, lam.conjugate(), 200)
            bad += a != b
    rep.add("conjugation_symmetry", {"q": q, "grid": side}, 0, bad, float(bad))


_RUNNERS = {
    "conjugacy": _conjugacy,
    "involution": _involution,
    "theoremC": _theorem_c,
    "theoremD": _theorem_d,
    "locus_structure": _locus_structure,
    "symmetry": _symmetry,
}

_DEFAULT_N = {"conjugacy": 1000, "involution": 200, "theoremC": 2, "theoremD": 2,
              "locus_structure": 200, "symmetry": 256}


def run_suite(name: str, p: int = 1, q: int = 3, p2: int | None = None, seed: int = 0,
              sample_count: int | None = None, angles=None, **extra) -> VerificationReport:
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if p2 is None:
        p2 = next((x for x in range(1, q) if x != p and math.gcd(x, q) == 1), p)
    n = _DEFAULT_N[name] if sample_count is None else sample_count
    params = {"p": p, "q": q, "p2": p2, "seed": seed, "sample_count": n}
    if angles:
        params["angles"] = [str(Angle(a)) for a in angles]
    rep = VerificationReport(name, params)
    t0 = time.perf_counter()
    _RUNNERS[name](rep, p=p, q=q, p2=p2, seed=seed, n=n, angles=angles, **extra)
    rep.runtime_seconds = time.perf_counter() - t0
    return rep
