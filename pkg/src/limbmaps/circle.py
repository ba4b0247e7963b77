"""Exact arithmetic on R/Z and the combinatorics of the doubling map.

Angles are exact rationals reduced mod 1.  The limb data of a p/q-limb
(the alpha-cycle, the alpha' arguments, the region arcs and the first
return branch table) is built here by a small constraint search.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from numbers import Rational


class NotACycle(ValueError):
    pass


class NotRotational(ValueError):
    pass


class LabelingError(RuntimeError):
    """Raised when the limb labeling search finds zero or several solutions."""


class LabelingAmbiguous(LabelingError):
    pass


class LabelingInfeasible(LabelingError):
    pass


class Angle:
    """A point of the circle R/Z with exact rational coordinate in [0, 1)."""

    __slots__ = ("_value",)

    def __init__(self, num, den=1):
        if isinstance(num, Angle):
            value = num._value
        elif isinstance(num, str):
            value = _parse_fraction(num)
        else:
            value = Fraction(num, den)
        self._value = value - (value.numerator // value.denominator)

    @classmethod
    def parse(cls, text: str) -> "Angle":
        return cls(text)

    @property
    def num(self) -> int:
        return self._value.numerator

    @property
    def den(self) -> int:
        return self._value.denominator

    @property
    def value(self) -> Fraction:
        return self._value

    def __repr__(self):
        return f"Angle({self.num}, {self.den})"

    def __str__(self):
        return f"{self.num}/{self.den}"

    def __float__(self):
        return float(self._value)

    def __hash__(self):
        return hash(("Angle", self._value))

    def __eq__(self, other):
        if isinstance(other, Angle):
            return self._value == other._value
        if isinstance(other, (int, Rational)):
            return self._value == Fraction(other) % 1
        return NotImplemented

    def __lt__(self, other):
        return self._value < Angle(other)._value

    def __le__(self, other):
        return self._value <= Angle(other)._value

    def __gt__(self, other):
        return self._value > Angle(other)._value

    def __ge__(self, other):
        return self._value >= Angle(other)._value

    def __add__(self, other):
        return Angle(self._value + _as_fraction(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Angle(self._value - _as_fraction(other))

    def __rsub__(self, other):
        return Angle(_as_fraction(other) - self._value)

    def __neg__(self):
        return Angle(-self._value)

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return Angle(self._value * k)

    __rmul__ = __mul__


def _as_fraction(x) -> Fraction:
    if isinstance(x, Angle):
        return x.value
    if isinstance(x, float):
        raise TypeError("floating point angles are not accepted")
    return Fraction(x)


def _parse_fraction(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty angle")
    if any(ch in text for ch in ".eE"):
        raise ValueError(f"angle must be an exact rational 'a/b', got {text!r}")
    return Fraction(text)


def multiply_angle(theta, d: int) -> Angle:
    if d < 2:
        raise ValueError("d must be >= 2")
    return Angle(theta) * d


@dataclass(frozen=True)
class OrbitType:
    preperiod: int
    period: int

    def __iter__(self):
        return iter((self.preperiod, self.period))


def orbit_type(theta, d: int = 2) -> OrbitType:
    """Minimal (preperiod, period) of theta under multiplication by d."""
    seen = {}
    x = Angle(theta)
    n = 0
    while x not in seen:
        seen[x] = n
        x = x * d
        n += 1
    l = seen[x]
    return OrbitType(l, n - l)


def rotation_number(cycle) -> Fraction:
    """Combinatorial rotation number of a cycle of the doubling map."""
    pts = sorted(Angle(t) for t in cycle)
    q = len(pts)
    if q == 0 or len(set(pts)) != q:
        raise NotACycle("empty cycle or repeated points")
    index = {t: i for i, t in enumerate(pts)}
    try:
        advances = {(index[t * 2] - i) % q for i, t in enumerate(pts)}
    except KeyError:
        raise NotACycle("doubling does not preserve the set") from None
    # single orbit
    x, n = pts[0] * 2, 1
    while x != pts[0]:
        x, n = x * 2, n + 1
    if n != q:
        raise NotACycle(f"set is a union of cycles (orbit length {n} != {q})")
    if len(advances) != 1:
        raise NotRotational("positional advance is not constant")
    return Fraction(advances.pop() % q, q) if q > 1 else Fraction(0)


def alpha_cycle(p: int, q: int) -> list[Angle]:
    """The period-q doubling cycle of rotation number p/q, in circular order."""
    _check_pq(p, q, allow_q2=True)
    # bit j of the smallest element is 1 iff frac(j p / q) >= 1 - p/q
    bits = [1 if ((j * p) % q) >= q - p else 0 for j in range(q)]
    num = int("".join(map(str, bits)), 2)
    first = Angle(num, 2 ** q - 1)
    cyc = [first]
    for _ in range(q - 1):
        cyc.append(cyc[-1] * 2)
    cyc = sorted(cyc)
    assert rotation_number(cyc) == Fraction(p, q)
    return cyc


def _check_pq(p, q, allow_q2=True):
    if not (isinstance(p, int) and isinstance(q, int)):
        raise TypeError("p and q must be integers")
    if not (1 <= p < q) or gcd(p, q) != 1:
        raise ValueError(f"need 1 <= p < q with gcd(p, q) = 1, got {p}/{q}")
    if q < 2 or (q == 2 and not allow_q2):
        raise ValueError(f"q must be >= {2 if allow_q2 else 3}")


@dataclass(frozen=True)
class Arc:
    """Counterclockwise circular arc from `start` of exact length in (0, 1]."""

    start: Angle
    length: Fraction

    @classmethod
    def between(cls, a, b) -> "Arc":
        a, b = Angle(a), Angle(b)
        length = (b.value - a.value) % 1 or Fraction(1)
        return cls(a, length)

    @property
    def end(self) -> Angle:
        return self.start + self.length

    @property
    def wraps(self) -> bool:
        return self.start.value + self.length > 1

    def lift(self, theta) -> Fraction:
        """Offset of theta from the start, in [0, 1)."""
        return (Angle(theta).value - self.start.value) % 1

    def contains(self, theta, closed=False) -> bool:
        """Half-open [start, end) containment; closed=True includes the end."""
        if self.lift(theta) < self.length:
            return True
        return closed and Angle(theta) == self.end

    def interior_contains(self, theta) -> bool:
        off = self.lift(theta)
        return 0 < off < self.length

    def doubled(self) -> "Arc":
        return Arc(self.start * 2, min(2 * self.length, Fraction(1)))

    def as_strings(self):
        return [str(self.start), str(self.end)]


@dataclass(frozen=True)
class Branch:
    """One branch of the first return map: [start, end] -> T^T by 2**steps."""

    start: Angle
    end: Angle
    steps: int
    # start/end as reals in the lifted interval [L, L + |I|]
    lo: Fraction = field(repr=False, default=Fraction(0))
    hi: Fraction = field(repr=False, default=Fraction(0))
    shift: int = field(repr=False, default=0)


@dataclass(frozen=True)
class LimbCombinatorics:
    p: int
    q: int
    alpha_args: tuple        # theta~^0 .. theta~^{q-1}
    alpha_prime_args: tuple  # theta^0 .. theta^{q-1}
    identified: Angle
    interval: Arc
    root_pair: tuple
    region_arcs: dict        # "V0", "V1", ..., "W1", ... (W = V-tilde)
    branches: tuple

    @property
    def left(self) -> Fraction:
        """Lifted real coordinate of the left end of I_{p/q}."""
        return self.interval.start.value

    @property
    def right(self) -> Fraction:
        return self.interval.start.value + self.interval.length

    def lift(self, theta) -> Fraction:
        """Real representative of theta in [left, right), or raise."""
        off = self.interval.lift(theta)
        if off >= self.interval.length:
            raise OutsideDomain(f"{theta} is not in I_{self.p}/{self.q}")
        return self.left + off

    def in_interval(self, theta) -> bool:
        return self.interval.lift(theta) <= self.interval.length

    def to_dict(self) -> dict:
        return {
            "schema": "limbmaps.limb/1",
            "p": self.p,
            "q": self.q,
            "alpha_args": [str(t) for t in self.alpha_args],
            "alpha_prime_args": [str(t) for t in self.alpha_prime_args],
            "identified": str(self.identified),
            "interval": self.interval.as_strings(),
            "root_pair": [str(t) for t in self.root_pair],
            "region_arcs": {k: [a.as_strings() for a in v] for k, v in self.region_arcs.items()},
            "branches": [
                {"start": str(b.start), "end": str(b.end), "steps": b.steps}
                for b in self.branches
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


class OutsideDomain(ValueError):
    pass


def _regions(tl, tp, interval):
    """Region arcs from labels: tl = theta~^i (alpha), tp = theta^i (alpha')."""
    q = len(tl)
    regions = {"V0": [Arc.between(tl[q - 1], tp[0]), Arc.between(tp[q - 1], tl[0])]}
    for i in range(1, q):
        regions[f"V{i}"] = [Arc.between(tp[i - 1], tp[i])]
    for i in range(1, q):
        regions[f"W{i}"] = [Arc.between(tl[i - 1], tl[i])]
    return regions


def _labeling_ok(tl, tp, p, q) -> bool:
    interval = Arc.between(tl[q - 1], tl[0])
    # the critical sector at alpha contains every alpha' argument
    if not all(interval.interior_contains(t) for t in tp):
        return False
    # alpha' arguments ordered theta^0 < ... < theta^{q-1} inside I
    offs = [interval.lift(t) for t in tp]
    if offs != sorted(offs):
        return False
    # consecutive alpha arguments bound the small sectors W^i
    for i in range(1, q):
        arc = Arc.between(tl[i - 1], tl[i])
        if any(arc.interior_contains(t) for t in tl):
            return False
    regions = _regions(tl, tp, interval)
    # region arcs tile the circle minus the 2q ray arguments
    total = sum(a.length for arcs in regions.values() for a in arcs)
    if total != 1:
        return False
    # action of doubling on the regions
    w_p = regions[f"W{p}"][0]
    for a in regions["V0"]:
        if a.doubled() != w_p:
            return False
    for i in range(1, q):
        for key in (f"V{i}", f"W{i}"):
            image = regions[key][0].doubled()
            if i == q - p:
                if image != interval:
                    return False
            elif image != regions[f"W{(i + p) % q}"][0]:
                return False
    return True


def _branch_table(tl, tp, p, q, interval):
    L = interval.start.value
    R = L + interval.length
    cuts = [L] + [L + interval.lift(t) for t in tp] + [R]
    steps = [q]
    for i in range(1, q):
        j = next(j for j in range(1, q) if (j * p) % q == i)
        steps.append(q - j)
    steps.append(q)
    out = []
    for b in range(q + 1):
        lo, hi, k = cuts[b], cuts[b + 1], steps[b]
        shift = (2 ** k) * lo - L
        assert shift.denominator == 1, "branch does not start over theta~"
        assert (2 ** k) * hi - int(shift) == R, "branch does not cover T^T"
        out.append(Branch(Angle(lo), Angle(hi), k, lo, hi, int(shift)))
    return tuple(out)


def limb_combinatorics(p: int, q: int) -> LimbCombinatorics:
    """Labeled combinatorial data of the p/q-limb, found by constraint search."""
    _check_pq(p, q, allow_q2=True)
    cyc = alpha_cycle(p, q)
    solutions = []
    for s, sign in itertools.product(range(q), (1, -1)):
        tl = [cyc[(s + sign * i) % q] for i in range(q)]
        tp = [t + Fraction(1, 2) for t in tl]
        if _labeling_ok(tl, tp, p, q) and (tl, tp) not in solutions:
            solutions.append((tl, tp))
    if not solutions:
        raise LabelingInfeasible(f"no labeling for {p}/{q}")
    if len(solutions) > 1:
        raise LabelingAmbiguous(f"{len(solutions)} labelings for {p}/{q}")
    tl, tp = solutions[0]
    interval = Arc.between(tl[q - 1], tl[0])
    return LimbCombinatorics(
        p=p,
        q=q,
        alpha_args=tuple(tl),
        alpha_prime_args=tuple(tp),
        identified=tl[q - 1],
        interval=interval,
        root_pair=(tl[p - 1], tl[p % q]),
        region_arcs=_regions(tl, tp, interval),
        branches=_branch_table(tl, tp, p, q, interval),
    )
