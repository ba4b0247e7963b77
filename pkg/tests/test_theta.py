import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from limbmaps.circle import Angle, OutsideDomain, multiply_angle, orbit_type
from limbmaps.theta import (
    BadRootPair,
    OutsideWake,
    build_first_return,
    first_return_eval,
    first_return_orbit_type,
    itinerary,
    limb,
    symmetry_angle,
    theta_bar,
    theta_hat,
    theta_hat_bounds,
    theta_hat_full,
    theta_hat_inv,
    theta_interlimb,
    theta_limb,
    theta_limb_inv,
    tune_angle,
)
import oracles

A = Angle
F = Fraction
LIMBS = [(1, 3), (2, 3), (1, 5), (2, 5), (3, 7)]


def rationals_in(lc, rng, n, maxden=2 ** 11):
    out = []
    while len(out) < n:
        d = rng.randint(1, maxden)
        t = A(rng.randrange(d), d)
        if lc.interval.contains(t, closed=True):
            out.append(t)
    return out


angles = st.builds(
    lambda d, n: A(n % d, d), st.integers(1, 2 ** 10), st.integers(0, 2 ** 20)
)


# --- worked values ---------------------------------------------------------

def test_branch_table_1_3():
    fr = build_first_return(limb(1, 3))
    rows = [(str(b.start), str(b.end), b.steps) for b in fr.branches]
    assert rows == [("4/7", "9/14", 3), ("9/14", "11/14", 2),
                    ("11/14", "1/14", 1), ("1/14", "1/7", 3)]
    assert fr.branches[-1].hi == F(8, 7) and fr.branches[-1].lo == F(15, 14)


@pytest.mark.parametrize("theta,out", [("4/7", "4/7"), ("1", "0"), ("9/14", "1/7")])
def test_first_return_eval(theta, out):
    assert first_return_eval(build_first_return(limb(1, 3)), A(theta)) == A(out)


def test_first_return_outside():
    with pytest.raises(OutsideDomain):
        first_return_eval(build_first_return(limb(1, 3)), A(1, 4))


@pytest.mark.parametrize("theta,y", [("4/7", 0), ("1", F(2, 3)), ("2/3", F(1, 3))])
def test_theta_hat_examples(theta, y):
    assert theta_hat(1, 3, A(theta)) == y


@pytest.mark.parametrize("y,theta", [(0, "4/7"), (F(1, 3), "2/3"), (F(1, 2), "11/14")])
def test_theta_hat_inv_examples(y, theta):
    assert theta_hat_inv(1, 3, y) == A(theta)


def test_alternative_digits_same_point():
    # 1/2 = 0.2000..._4 = 0.1333..._4
    assert theta_hat_inv(1, 3, F(1, 2), repeating=True) == A(11, 14)
    for p, q in LIMBS:
        for j in range(1, 2 * (q + 1) ** 2):
            y = F(j, (q + 1) ** 2)
            if y < 1:
                assert theta_hat_inv(p, q, y) == theta_hat_inv(p, q, y, repeating=True)


@pytest.mark.parametrize("theta,y", [("1/7", 0), ("2/7", 1), ("1/4", F(2, 3)), ("11/56", F(1, 2))])
def test_theta_limb_examples(theta, y):
    assert theta_limb(1, 3, A(theta)) == y
    assert theta_limb_inv(1, 3, y) == A(theta)


def test_theta_limb_outside_wake():
    with pytest.raises(OutsideWake):
        theta_limb(1, 3, A(1, 2))


def test_interlimb_examples():
    assert theta_interlimb(1, 1, 3, A(1, 4)) == A(1, 4)
    assert theta_interlimb(1, 2, 3, A(1, 7)) == limb(2, 3).root_pair[0]


def test_involution_examples():
    assert theta_bar(1, 3, A(1, 7)) == A(2, 7)
    assert theta_bar(1, 3, A(1, 4)) == A(1, 6)
    assert symmetry_angle(1, 3) == A(11, 56)
    assert theta_bar(1, 3, A(9, 56)) == A(15, 56)
    assert theta_bar(1, 3, A(15, 56)) == A(9, 56)


def test_tune_examples():
    assert tune_angle((A(1, 3), A(2, 3)), A(1, 2)) == A(7, 12)
    assert tune_angle((A(1, 3), A(2, 3)), A(0)) == A(1, 3)
    for t in ["1/5", "3/8", "5/12", "0"]:
        assert tune_angle(("0", "1"), A(t)) == A(t)
    with pytest.raises(BadRootPair):
        tune_angle((A(1, 3), A(1, 7)), A(1, 2))
    with pytest.raises(BadRootPair):
        tune_angle((A(1, 6), A(1, 3)), A(1, 2))


def test_q2_rejected():
    with pytest.raises(ValueError):
        theta_hat(1, 2, A(0))


# --- oracle agreement -----------------------------------------------------

@pytest.mark.parametrize("p,q", LIMBS)
def test_theta_hat_matches_oracle(p, q):
    lc = limb(p, q)
    rng = random.Random(100 * p + q)
    for t in rationals_in(lc, rng, 150, maxden=600):
        assert theta_hat(p, q, t) == oracles.theta_hat(lc, t.value)


@pytest.mark.parametrize("p,q", LIMBS)
def test_theta_limb_matches_oracle(p, q):
    lc = limb(p, q)
    lo, hi = lc.root_pair
    rng = random.Random(q)
    wl = (hi.value - lo.value) % 1
    for _ in range(100):
        t = lo + wl * F(rng.randrange(0, 257), 256)
        assert theta_limb(p, q, t) == oracles.theta_limb(lc, t.value)


def test_interlimb_even_denominator_against_oracle():
    l1, l2 = limb(1, 5), limb(2, 5)
    lo, hi = l1.root_pair
    wl = (hi.value - lo.value) % 1
    rng = random.Random(5)
    for _ in range(40):
        t = lo + wl * F(rng.randrange(1, 64), 64)  # even denominator
        assert t.den % 2 == 0
        u = theta_interlimb(1, 2, 5, t)
        assert oracles.theta_limb(l2, u.value) == oracles.theta_limb(l1, t.value)
        assert u.den % 2 == 0


# --- properties -------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.sampled_from(LIMBS), angles)
def test_exact_conjugacy(pq, t):
    p, q = pq
    lc = limb(p, q)
    assume(lc.interval.contains(t, closed=True))
    fr = build_first_return(lc)
    assert theta_hat(p, q, first_return_eval(fr, t)) == multiply_angle(
        A(theta_hat(p, q, t)), q + 1
    ).value


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(LIMBS), angles)
def test_round_trip(pq, t):
    p, q = pq
    lc = limb(p, q)
    assume(lc.interval.contains(t))
    assert theta_hat_inv(p, q, theta_hat(p, q, t)) == t


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(LIMBS), st.fractions(min_value=0, max_value=1, max_denominator=5000))
def test_inverse_round_trip(pq, y):
    p, q = pq
    assert theta_hat(p, q, theta_hat_inv(p, q, y)) == y % 1 or y == 1


@pytest.mark.parametrize("p,q", LIMBS)
def test_monotone(p, q):
    lc = limb(p, q)
    L = lc.interval.start
    pts = sorted({lc.interval.lift(t) for t in rationals_in(lc, random.Random(1), 200)})
    pts = [x for x in pts if x < lc.interval.length]
    vals = [theta_hat(p, q, L + x) for x in pts]
    assert all(a < b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("p,q", LIMBS)
def test_boundary_consistency(p, q):
    lc = limb(p, q)
    for j, b in enumerate(lc.branches):
        right = theta_hat(p, q, A(b.lo))
        # left limit: the previous branch sends its right end to the right end of I
        left = F(j - 1, q + 1) + F(1, q + 1) if j else F(0)
        assert right == left == F(j, q + 1)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(LIMBS), st.fractions(min_value=0, max_value=1, max_denominator=3000))
def test_involution(pq, y):
    p, q = pq
    t = theta_limb_inv(p, q, y)
    assert theta_bar(p, q, theta_bar(p, q, t)) == t
    s = symmetry_angle(p, q)
    assert theta_bar(p, q, s) == s


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(LIMBS), angles)
def test_orbit_type_transport(pq, t):
    p, q = pq
    assume(limb(p, q).interval.contains(t))
    assert first_return_orbit_type(p, q, t) == orbit_type(A(theta_hat(p, q, t)), q + 1)
    it = itinerary(p, q, t)
    assert it.value(q + 1) == theta_hat(p, q, t)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(1, 2, 5), (1, 3, 4), (2, 3, 7), (1, 2, 3)]),
       st.fractions(min_value=0, max_value=1, max_denominator=2000))
def test_interlimb_parity_and_order(ppq, y):
    p, p2, q = ppq
    t = theta_limb_inv(p, q, y)
    u = theta_interlimb(p, p2, q, t)
    assert (t.den % 2) == (u.den % 2)
    assert theta_interlimb(p2, p, q, u) == t


@pytest.mark.parametrize("p,p2,q", [(1, 2, 3), (2, 1, 3), (1, 3, 4), (2, 3, 5)])
def test_theta_hat_full(p, p2, q):
    lc = limb(p, q)
    rng = random.Random(7)
    pts = sorted({A(rng.randrange(d), d) for d in range(2, 300)})
    img = [theta_hat_full(p, p2, q, t) for t in pts]
    # orientation preserving homeomorphism: images are circularly sorted
    k = img.index(min(img))
    rot = img[k:] + img[:k]
    assert rot == sorted(rot) and len(set(img)) == len(img)
    # overlap on V0 arcs: both formulas agree
    for arc in lc.region_arcs["V0"]:
        for i in range(1, 8):
            t = arc.start + arc.length * F(i, 8)
            a = theta_hat_full(p, p2, q, t)
            from limbmaps.theta import theta_hat_truncated
            b = theta_hat_truncated(p, p2, q, t + F(1, 2)) + F(1, 2)
            assert a == b
    assert all(theta_hat_full(p, p, q, t) == t for t in pts)


def test_tuning_transport_main_limb():
    rng = random.Random(9)
    pair = limb(1, 3).root_pair
    image = tuple(theta_interlimb(1, 2, 3, t) for t in pair)
    assert image == limb(2, 3).root_pair
    for _ in range(100):
        d = rng.randint(1, 200)
        th = A(rng.randrange(d), d)
        lhs = theta_interlimb(1, 2, 3, tune_angle(pair, th))
        assert lhs == tune_angle(image, th)


@given(angles)
def test_tune_identity_and_oracle(t):
    assert tune_angle(("0", "1"), t) == t
    pre, per = oracles.binary_digits(t.value)
    w = {0: "01", 1: "10"}
    bits = "".join(w[b] for b in pre), "".join(w[b] for b in per)
    val = F(int(bits[0] or "0", 2), 2 ** len(bits[0])) + F(
        int(bits[1], 2), 2 ** len(bits[0]) * (2 ** len(bits[1]) - 1)
    )
    assert tune_angle((A(1, 3), A(2, 3)), t) == A(val)


def test_theta_hat_bounds():
    import math
    x = float(limb(1, 3).interval.start.value) + math.sqrt(2) / 5
    lo, hi = theta_hat_bounds(1, 3, x, bits=30)
    assert 0 <= lo <= hi <= 1 and hi - lo < F(1, 10 ** 4)
    r = A(F(x).limit_denominator(10 ** 6))
    assert lo - F(1, 10 ** 3) <= theta_hat(1, 3, r) <= hi + F(1, 10 ** 3)
