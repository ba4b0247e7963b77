"""Combinatorial surgery maps on external arguments.

The first return map of doubling on the truncated circle I_{p/q}/~ is an
expanding degree-(q+1) cover; coding a point by the branches its orbit
visits gives the conjugacy to multiplication by q+1.  Everything here is
exact: rational arguments have eventually periodic itineraries, so the
conjugacy is evaluated by a geometric series and inverted by solving one
affine fixed-point equation.

Values in [0, 1] (where 1 is meaningful, e.g. Theta(theta+) = 1) are
returned as `Fraction`; points of the circle are returned as `Angle`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import floor

from .circle import (
    Angle,
    Arc,
    LimbCombinatorics,
    OrbitType,
    OutsideDomain,
    limb_combinatorics,
    orbit_type,
)


class OutsideWake(ValueError):
    pass


class InvalidDigits(RuntimeError):
    pass


class BadRootPair(ValueError):
    pass


@lru_cache(maxsize=None)
def limb(p: int, q: int) -> LimbCombinatorics:
    """Cached limb data; the surgery maps need q >= 3."""
    if q < 3:
        raise ValueError("the surgery maps are defined for q >= 3")
    return limb_combinatorics(p, q)


@dataclass(frozen=True)
class FirstReturnMap:
    limb: LimbCombinatorics
    branches: tuple

    @property
    def degree(self) -> int:
        return len(self.branches)


@dataclass(frozen=True)
class Itinerary:
    preperiodic_digits: tuple
    periodic_digits: tuple

    def value(self, base: int) -> Fraction:
        return _digits_value(self.preperiodic_digits, self.periodic_digits, base)


def build_first_return(lc: LimbCombinatorics) -> FirstReturnMap:
    fr = FirstReturnMap(lc, lc.branches)
    assert fr.degree == lc.q + 1
    assert fr.branches[0].lo == lc.left and fr.branches[-1].hi == lc.right
    return fr


def _lift_closed(lc: LimbCombinatorics, theta) -> Fraction:
    """Lift a point of T^T into [left, right); theta~^0 is identified with left."""
    off = lc.interval.lift(theta)
    if off > lc.interval.length:
        raise OutsideDomain(f"{theta} is not in I_{lc.p}/{lc.q}")
    if off == lc.interval.length:
        off = Fraction(0)
    return lc.left + off


def _branch_of(lc: LimbCombinatorics, x: Fraction) -> int:
    # half-open [lo, hi): a shared endpoint belongs to the branch it starts
    for j, b in enumerate(lc.branches):
        if b.lo <= x < b.hi:
            return j
    raise OutsideDomain(f"{x} outside the lifted interval")


def _step(lc, x):
    j = _branch_of(lc, x)
    b = lc.branches[j]
    return j, (2 ** b.steps) * x - b.shift


def first_return_eval(fr: FirstReturnMap, theta) -> Angle:
    # A shared endpoint is pushed through the branch on its left; by
    # continuity both sides give the same point of T^T.
    lc = fr.limb
    x = _lift_closed(lc, theta)
    for b in lc.branches:
        if b.lo < x <= b.hi:
            return Angle((2 ** b.steps) * x - b.shift)
    return Angle(_step(lc, x)[1])


def _itinerary_lifted(lc: LimbCombinatorics, x: Fraction):
    """Digits and orbit-type of a lifted rational under the first return map.

    Runs on integer numerators over the fixed denominator of x.
    """
    D = x.denominator
    a = x.numerator
    # lo*D is rational in general; a >= lo*D is tested as a*den >= num
    los = []
    for b in lc.branches:
        c = b.lo * D
        los.append((c.numerator, c.denominator, b.steps, int(b.shift) * D))
    hi_last = lc.right * D
    seen = {}
    digits = []
    while a not in seen:
        seen[a] = len(digits)
        j = len(los) - 1
        while j > 0 and a * los[j][1] < los[j][0]:
            j -= 1
        if a * hi_last.denominator >= hi_last.numerator:
            raise OutsideDomain("point left the lifted interval")
        _, _, k, s = los[j]
        digits.append(j)
        a = (a << k) - s
    start = seen[a]
    return tuple(digits[:start]), tuple(digits[start:])


def itinerary(p: int, q: int, theta) -> Itinerary:
    lc = limb(p, q)
    pre, per = _itinerary_lifted(lc, _lift_closed(lc, theta))
    return Itinerary(pre, per)


def _digits_value(pre, per, base) -> Fraction:
    a, m = len(pre), len(per)
    head = 0
    for d in pre:
        head = head * base + d
    cyc = 0
    for d in per:
        cyc = cyc * base + d
    scale = base ** a
    return Fraction(head, scale) + Fraction(cyc, scale * (base ** m - 1))


def digits(y: Fraction, base: int):
    """Eventually periodic base-`base` digits of y in [0, 1).

    Terminating expansions are returned with periodic part (0,).
    """
    y = Fraction(y)
    if not 0 <= y < 1:
        raise ValueError("need 0 <= y < 1")
    u, v = y.numerator, y.denominator
    seen = {}
    out = []
    while u not in seen:
        seen[u] = len(out)
        u *= base
        out.append(u // v)
        u %= v
    start = seen[u]
    return tuple(out[:start]), tuple(out[start:])


def _theta_hat_lifted(lc, x: Fraction) -> Fraction:
    pre, per = _itinerary_lifted(lc, x)
    return _digits_value(pre, per, lc.q + 1)


def theta_hat(p: int, q: int, theta) -> Fraction:
    """Conjugacy from the first return map on T^T to multiplication by q+1."""
    lc = limb(p, q)
    return _theta_hat_lifted(lc, _lift_closed(lc, theta))


def _inverse_lifted(lc, pre, per, check=True) -> Fraction:
    br = lc.branches
    # forward along a digit word: x -> 2**K x - S
    def word(ds):
        K = S = 0
        for d in ds:
            b = br[d]
            K += b.steps
            S = (S << b.steps) + int(b.shift)
        return K, S

    Kp, Sp = word(per)
    Ka, Sa = word(pre)
    den = ((1 << Kp) - 1) << Ka
    num = Sp + (Sa << Kp) - Sa      # x = (Sp/(2**Kp - 1) + Sa) / 2**Ka
    if check:
        a = num
        for d in tuple(pre) + tuple(per):
            b = br[d]
            if not (a * b.lo.denominator >= b.lo.numerator * den
                    and a * b.hi.denominator < b.hi.numerator * den):
                raise InvalidDigits(f"digit {d} does not match point {Fraction(a, den)}")
            a = (a << b.steps) - int(b.shift) * den
    return Fraction(num, den)


def theta_hat_inv_lifted(lc, y: Fraction) -> Fraction:
    y = Fraction(y)
    if not 0 <= y <= 1:
        raise OutsideDomain("y must lie in [0, 1]")
    if y == 1:
        return _inverse_lifted(lc, (), (lc.q,), check=False)
    pre, per = digits(y, lc.q + 1)
    return _inverse_lifted(lc, pre, per)


def theta_hat_inv(p: int, q: int, y, repeating: bool = False) -> Angle:
    """Inverse of theta_hat.

    With repeating=True the alternative expansion of a (q+1)-adic y
    (ending in repeated q's) is used; it reconstructs the same point.
    """
    lc = limb(p, q)
    y = Fraction(y)
    if repeating and 0 < y < 1:
        pre, per = digits(y, q + 1)
        if per == (0,):
            pre = pre[:-1] + (pre[-1] - 1,)
            return Angle(_inverse_lifted(lc, pre, (q,), check=False))
    return Angle(theta_hat_inv_lifted(lc, y))


def theta_hat_bounds(p: int, q: int, x: float, bits: int = 40):
    """Rational enclosure of theta_hat at a real (possibly irrational) point.

    Returns (lo, hi) with theta_hat(a) = lo <= theta_hat(x) <= hi = theta_hat(b)
    for dyadic a <= x <= b at resolution 2**-bits.
    """
    lc = limb(p, q)
    off = (x - float(lc.left)) % 1.0
    if off > float(lc.interval.length):
        raise OutsideDomain(f"{x} is not in I_{p}/{q}")
    scale = 2 ** bits
    a = Fraction(floor(off * scale), scale)
    b = a + Fraction(1, scale)
    a = max(a, Fraction(0))
    b = min(b, lc.interval.length)
    lo = _theta_hat_lifted(lc, lc.left + a)
    hi = Fraction(1) if b == lc.interval.length else _theta_hat_lifted(lc, lc.left + b)
    return lo, hi


def first_return_orbit_type(p: int, q: int, theta) -> OrbitType:
    lc = limb(p, q)
    pre, per = _itinerary_lifted(lc, _lift_closed(lc, theta))
    return OrbitType(len(pre), len(per))


# --- the wake [theta-, theta+] -------------------------------------------

@lru_cache(maxsize=None)
def _wake(p, q):
    lc = limb(p, q)
    lo, hi = lc.root_pair
    wake = Arc.between(lo, hi)
    scale = 2 ** (q - 1)
    shift = scale * lo.value - lc.left
    assert shift.denominator == 1
    assert scale * (lo.value + wake.length) - shift == lc.right
    return lc, wake, scale, shift


def _wake_offset(p, q, theta) -> Fraction:
    lc, wake, _, _ = _wake(p, q)
    off = wake.lift(theta)
    if off > wake.length:
        raise OutsideWake(f"{theta} is not in the {p}/{q}-wake")
    return off


def theta_limb(p: int, q: int, theta) -> Fraction:
    """Theta_{p/q}: [theta-, theta+] -> [0, 1]."""
    lc, wake, scale, shift = _wake(p, q)
    off = _wake_offset(p, q, theta)
    if off == 0:
        return Fraction(0)
    if off == wake.length:
        return Fraction(1)
    x = scale * (wake.start.value + off) - shift
    return _theta_hat_lifted(lc, x)


def theta_limb_inv(p: int, q: int, y) -> Angle:
    lc, wake, scale, shift = _wake(p, q)
    y = Fraction(y)
    if y == 0:
        return wake.start
    if y == 1:
        return wake.end
    x = theta_hat_inv_lifted(lc, y)
    return Angle((x + shift) / scale)


def theta_interlimb(p: int, p2: int, q: int, theta) -> Angle:
    """Theta^q_{p p2}: the wake of p/q onto the wake of p2/q."""
    return theta_limb_inv(p2, q, theta_limb(p, q, theta))


def theta_bar(p: int, q: int, theta) -> Angle:
    """Orientation reversing involution of the p/q-wake arguments."""
    return theta_limb_inv(p, q, 1 - theta_limb(p, q, theta))


def symmetry_angle(p: int, q: int) -> Angle:
    return theta_limb_inv(p, q, Fraction(1, 2))


def theta_hat_truncated(p: int, p2: int, q: int, theta) -> Angle:
    """Conjugacy of first return maps T^T_{p/q} -> T^T_{p2/q}."""
    lc2 = limb(p2, q)
    return Angle(theta_hat_inv_lifted(lc2, theta_hat(p, q, theta)))


def theta_hat_full(p: int, p2: int, q: int, theta) -> Angle:
    """Extension of the truncated conjugacy to the whole circle."""
    lc = limb(p, q)
    theta = Angle(theta)
    if lc.interval.interior_contains(theta):
        return theta_hat_truncated(p, p2, q, theta)
    half = Fraction(1, 2)
    return theta_hat_truncated(p, p2, q, theta + half) + half


# --- tuning --------------------------------------------------------------

def binary_word(t) -> str:
    """Period word of a purely periodic angle under doubling."""
    t = Angle(t)
    l, k = orbit_type(t, 2)
    if l != 0:
        raise BadRootPair(f"{t} is not periodic under doubling")
    n = t.value * (2 ** k - 1)
    assert n.denominator == 1
    return format(int(n), f"0{k}b")


def tune_angle(pair, theta) -> Angle:
    """Substitute 0 -> w-, 1 -> w+ in the binary expansion of theta.

    Entries of `pair` are periodic angles or explicit bit words such as
    "0" and "1"; a string counts as a word when it has only 0/1 characters.
    """
    def word(w):
        if isinstance(w, str) and w and not set(w) - {"0", "1"}:
            return w
        return binary_word(w)

    words = [word(w) for w in pair]
    w0, w1 = words
    if len(w0) != len(w1) or not w0 or set(w0 + w1) - {"0", "1"}:
        raise BadRootPair(f"words {w0!r}, {w1!r} do not have a common period")
    pre, per = digits(Angle(theta).value, 2)
    sub = lambda ds: "".join(w1 if d else w0 for d in ds)
    spre, sper = sub(pre), sub(per)
    return Angle(_digits_value([int(c) for c in spre], [int(c) for c in sper], 2))
