import cmath
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from limbmaps.circle import Angle, orbit_type
from limbmaps.dynamics import (
    BranchUndefined,
    DynamicalSystem,
    NoConvergence,
    WrongPeriod,
    classify_critical_orbit,
    escape_analyze,
    find_cycle,
    monic_coordinates,
    trace_dyn_ray,
)

Q = DynamicalSystem.quadratic
P = DynamicalSystem.family


def arg_dist(a, b):
    return abs((a - b + 0.5) % 1.0 - 0.5)


# --- escape analysis ------------------------------------------------------

@pytest.mark.parametrize("z0,arg", [(4, 0.0), (4j, 0.25), (-4, 0.5)])
def test_escape_identity_bottcher(z0, arg):
    r = escape_analyze(Q(0), z0)
    assert r.escaped
    assert r.potential == pytest.approx(math.log(4), rel=1e-12)
    assert arg_dist(r.ext_argument, arg) < 1e-12


def test_superattracting_fixed_point_does_not_escape():
    sys = P(3, 64 / 27)
    assert not escape_analyze(sys, -0.75).escaped
    assert sys.f(-0.75) == pytest.approx(-0.75, abs=1e-15)


def test_negative_axis_has_no_argument():
    r = escape_analyze(P(3, -5.0), 40.0)
    assert r.escaped and r.ext_argument is None and r.potential > 0
    with pytest.raises(BranchUndefined):
        P(3, -5.0).monic_scale()


def test_family_rejects_zero():
    with pytest.raises(ValueError):
        P(3, 0)


@pytest.mark.parametrize("sys", [Q(0.3 + 0.2j), Q(-2), Q(4j), P(3, 0.5), P(3, 9.48),
                                 P(5, 14 + 6j), P(4, 0.01 + 0.01j), DynamicalSystem.monic(3, 2 - 1j)])
def test_escape_radius_certificate(sys):
    rng = random.Random(11)
    R = sys.escape_radius
    for _ in range(1000):
        z = cmath.rect(R * (1 + 1e-9 + 10 * rng.random() ** 3), rng.uniform(-math.pi, math.pi))
        assert abs(sys.f(z)) > 2 * abs(z)


# --- functional equations --------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.sampled_from([Q(0.25 + 0.5j), Q(-1.0), Q(0.4j), P(3, 2.0), P(3, 8 + 2j), P(5, 1.2 - 0.3j)]),
       st.floats(0.0, 1.0), st.floats(1.2, 6.0))
def test_functional_equations(sys, t, r):
    z = cmath.rect(r * sys.escape_radius, 2 * math.pi * t) / (1 if sys.kind == "quadratic" else 1.0)
    a, b = escape_analyze(sys, z), escape_analyze(sys, sys.f(z))
    d = sys.degree
    assert a.escaped and b.escaped
    assert abs(b.potential - d * a.potential) <= 1e-9 * max(1.0, b.potential)
    assert arg_dist(b.ext_argument, d * a.ext_argument) < 1e-9


def test_functional_equations_near_julia_set():
    sys = Q(0.3 + 0.5j)
    for z0 in [0.9 + 0.9j, -1.1 + 0.2j, 0.2 - 1.2j]:
        a, b = escape_analyze(sys, z0), escape_analyze(sys, sys.f(z0))
        assert a.escaped
        assert abs(b.potential - 2 * a.potential) < 1e-9
        assert arg_dist(b.ext_argument, 2 * a.ext_argument) < 1e-9


# --- rays --------------------------------------------------------------------

@pytest.mark.parametrize("theta,land", [("0", 1), ("1/3", cmath.exp(2j * math.pi / 3)),
                                        ("3/7", cmath.exp(6j * math.pi / 7))])
def test_rays_of_the_circle(theta, land):
    tr = trace_dyn_ray(Q(0), Angle(theta))
    assert tr.status == "landed"
    assert abs(tr.landing_estimate - land) < 1e-6


def test_ray_lands_at_critical_value():
    tr = trace_dyn_ray(Q(1j), Angle(1, 6))
    assert abs(tr.landing_estimate - 1j) < 1e-5
    v = classify_critical_orbit(Q(1j))
    assert (v.preperiod, v.period) == tuple(orbit_type(Angle(1, 6), 2)) == (1, 2)


def test_ray_samples_keep_their_coordinates():
    sys = Q(-0.12 + 0.75j)
    tr = trace_dyn_ray(sys, Angle(1, 7), G_min=1e-4)
    for G, z in tr.samples[:: max(1, len(tr.samples) // 25)]:
        r = escape_analyze(sys, z, 100000)
        assert r.potential == pytest.approx(G, rel=1e-6)
        assert arg_dist(r.ext_argument, 1 / 7) < 1e-9


def test_family_ray_serialization():
    tr = trace_dyn_ray(P(3, 2.0), Angle(1, 4), G_min=1e-3)
    d = tr.to_dict()
    assert d["schema"] == "limbmaps.ray/1" and d["target_argument"] == "1/4"
    lines = tr.to_csv().splitlines()
    assert lines[0] == "potential,re,im" and len(lines) == len(tr.samples) + 1
    assert [s["potential"] for s in d["samples"]] == sorted((g for g, _ in tr.samples), reverse=True)


def test_monic_coordinates_far():
    m = DynamicalSystem.monic(3, 1.0)
    G, a = monic_coordinates(m, 1e4)
    assert G == pytest.approx(math.log(1e4), rel=1e-3) and arg_dist(a, 0) < 1e-12


# --- cycles --------------------------------------------------------------------

def test_find_cycle_examples():
    c = find_cycle(Q(0), 1, 0.1)
    assert abs(c.points[0]) < 1e-12 and abs(c.multiplier) < 1e-12
    c = find_cycle(Q(-1), 2, 0.1)
    assert sorted(round(z.real, 10) for z in c.points) == [-1.0, 0.0]
    assert abs(c.multiplier) < 1e-12
    c = find_cycle(P(3, 0.5), 1, 0.1)
    assert abs(c.points[0]) < 1e-12 and c.multiplier == pytest.approx(0.5)


def test_find_cycle_rejects_lower_period():
    with pytest.raises((WrongPeriod, NoConvergence)):
        find_cycle(Q(-1), 2, -0.6)
    c = find_cycle(Q(-1), 2, -0.6, strict=False)
    assert c.minimal_period == 1
    assert c.points[0] == pytest.approx((1 - math.sqrt(5)) / 2)


def _fd_multiplier(sys, z, k, h=1e-6):
    def fk(x):
        for _ in range(k):
            x = sys.f(x)
        return x
    return (fk(z + h) - fk(z - h)) / (2 * h)


@pytest.mark.parametrize("sys,k,seed", [(Q(-0.12 + 0.75j), 3, None), (Q(0.3), 2, -0.5 + 1j),
                                        (Q(-1.3), 4, None), (P(3, 2.5 + 1j), 1, -0.7),
                                        (P(5, 14 + 6j), 2, -1.0 + 0.3j), (DynamicalSystem.monic(3, 1.5j), 2, 0.4)])
def test_multiplier_matches_finite_differences(sys, k, seed):
    if seed is None:  # attracting cycle: take the tail of the critical orbit
        seed = sys.free_critical_point
        for _ in range(500):
            seed = sys.f(seed)
    c = find_cycle(sys, k, seed)
    fd = _fd_multiplier(sys, c.points[0], k)
    assert abs(fd - c.multiplier) <= 1e-6 * max(1.0, abs(c.multiplier))


# --- critical orbit ---------------------------------------------------------

@pytest.mark.parametrize("c,lk", [(1j, (1, 2)), (-2, (1, 1))])
def test_classify_preperiodic(c, lk):
    v = classify_critical_orbit(Q(c))
    assert v.kind == "preperiodic" and (v.preperiod, v.period) == lk


def test_classify_branch_point():
    lam = 4 * (4 / 3) ** 3
    sys = P(3, lam)
    assert abs(sys.f(-0.75) + 3) < 1e-12
    v = classify_critical_orbit(sys)
    assert v.kind == "preperiodic" and (v.preperiod, v.period) == (1, 1)
    assert v.to_dict()["kind"] == "preperiodic"


def test_classify_attracted_and_escaping():
    v = classify_critical_orbit(Q(-1))
    assert v.kind == "attracted" and v.period == 2 and abs(v.multiplier) < 1e-12
    v = classify_critical_orbit(Q(-0.12 + 0.75j))
    assert v.kind == "attracted" and v.period == 3
    v = classify_critical_orbit(Q(1))
    assert v.kind == "escaping" and v.iterations >= 1
    assert classify_critical_orbit(P(3, 0.5)).kind == "attracted"


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([3, 4, 5]), st.floats(-3, 13), st.floats(-5, 5), st.floats(-2, 2), st.floats(-2, 2))
def test_conjugation_symmetry_of_orbits(q, a, b, x, y):
    lam = complex(a, b)
    if lam == 0:
        return
    s, sb = P(q, lam), P(q, lam).mirror()
    z, w = complex(x, y), complex(x, y).conjugate()
    for _ in range(30):
        if not math.isfinite(abs(z)) or abs(z) > 1e30:
            break
        assert w == z.conjugate()
        z, w = s.f(z), sb.f(w)
