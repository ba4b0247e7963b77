"""Iteration engines for Q_c(z) = z^2 + c, P_{q,lam}(z) = lam z (1+z/q)^q and
the monic conjugate P~_{q,nu}(w) = w (w+nu)^q.

Potentials and external arguments are always computed in monic
coordinates (w = (nu/q) z for the family, nu the principal q-th root of
lam), where the Boettcher map is tangent to the identity at infinity.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .circle import Angle

TWO_PI = 2 * math.pi


class NoConvergence(RuntimeError):
    pass


class WrongPeriod(ValueError):
    pass


class NotEscaping(ValueError):
    pass


class BranchUndefined(ValueError):
    pass


# --- systems --------------------------------------------------------------

@dataclass(frozen=True)
class DynamicalSystem:
    kind: str          # "quadratic" | "family" | "monic"
    param: complex     # c, lam or nu
    q: int = 1

    @classmethod
    def quadratic(cls, c) -> "DynamicalSystem":
        return cls("quadratic", complex(c), 1)

    @classmethod
    def family(cls, q: int, lam) -> "DynamicalSystem":
        if lam == 0:
            raise ValueError("lam = 0 is excluded")
        return cls("family", complex(lam), q)

    @classmethod
    def monic(cls, q: int, nu) -> "DynamicalSystem":
        return cls("monic", complex(nu), q)

    @property
    def degree(self) -> int:
        return 2 if self.kind == "quadratic" else self.q + 1

    @property
    def critical_points(self):
        """(point, multiplicity) pairs; the free critical point comes first."""
        q, a = self.q, self.param
        if self.kind == "quadratic":
            return [(0j, 1)]
        if self.kind == "family":
            return [(complex(-q / (q + 1)), 1), (complex(-q), q - 1)]
        return [(-a / (q + 1), 1), (-a, q - 1)]

    @property
    def free_critical_point(self) -> complex:
        return self.critical_points[0][0]

    @property
    def escape_radius(self) -> float:
        a = abs(self.param)
        if self.kind == "quadratic":
            # |z| > 1 + sqrt(1+|c|) already forces |z^2 + c| > 2|z|
            return max(2.0, a, 1.0 + math.sqrt(1.0 + a))
        if self.kind == "family":
            return self.q * (1.0 + (2.0 / a) ** (1.0 / self.q))
        return a + 2.0

    def f(self, z):
        q, a = self.q, self.param
        if self.kind == "quadratic":
            return z * z + a
        if self.kind == "family":
            return a * z * (1 + z / q) ** q
        return z * (z + a) ** q

    def df(self, z):
        q, a = self.q, self.param
        if self.kind == "quadratic":
            return 2 * z
        if self.kind == "family":
            u = 1 + z / q
            return a * u ** (q - 1) * (1 + (q + 1) * z / q)
        return (z + a) ** (q - 1) * ((q + 1) * z + a)

    # monic coordinates
    def monic_scale(self) -> complex:
        """Factor s with w = s z conjugating to a monic map."""
        if self.kind == "family":
            if self.param.imag == 0 and self.param.real < 0:
                raise BranchUndefined("principal q-th root undefined on the negative axis")
            return self.param ** (1.0 / self.q) / self.q
        return 1.0

    def as_monic(self) -> "DynamicalSystem":
        if self.kind == "family":
            return DynamicalSystem.monic(self.q, self.param ** (1.0 / self.q))
        return self

    def mirror(self) -> "DynamicalSystem":
        return DynamicalSystem(self.kind, self.param.conjugate(), self.q)


# --- results --------------------------------------------------------------

@dataclass
class EscapeResult:
    escaped: bool
    iterations: int
    potential: float = 0.0
    ext_argument: float | None = None


@dataclass
class Cycle:
    points: list
    period: int
    multiplier: complex
    minimal_period: int = 0


def _cjson(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


@dataclass
class RayTrace:
    samples: list                   # (potential, point)
    target_argument: Angle
    landing_estimate: complex
    status: str                     # landed | diverged | max_steps
    space: str = "dynamical"
    native: list = field(default_factory=list, repr=False)

    def to_csv(self) -> str:
        rows = ["potential,re,im"]
        rows += [f"{g!r},{z.real!r},{z.imag!r}" for g, z in self.samples]
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "schema": "limbmaps.ray/1",
            "space": self.space,
            "target_argument": str(self.target_argument),
            "status": self.status,
            "landing_estimate": _cjson(self.landing_estimate),
            "samples": [{"potential": g, **_cjson(z)} for g, z in self.samples],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# --- coordinates for the continuation engine ----------------------------

def _bailout(d: int) -> float:
    return 10.0 ** min(30.0, 250.0 / d)


class DynCoord:
    """g_n(w) = f^n(w) for a monic map, with derivative in w."""

    def __init__(self, sys: DynamicalSystem):
        self.sys = sys.as_monic()
        self.d = self.sys.degree
        self.scale = abs(self.sys.param)

    def g(self, w, n):
        f, df = self.sys.f, self.sys.df
        der = 1.0 + 0j
        for _ in range(n):
            der = df(w) * der
            w = f(w)
        return w, der

    def seed(self, theta: float, G: float) -> complex:
        return cmath.exp(complex(G, TWO_PI * theta))

    def scale_at(self, x) -> float:
        return self.scale

    def check(self, x):
        pass


class MandelCoord:
    """g_n(c) = Q_c^n(c), derivative in c."""

    d = 2

    def g(self, c, n):
        z, der = c, 1.0 + 0j
        for _ in range(n):
            der = 2 * z * der + 1
            z = z * z + c
        return z, der

    def seed(self, theta: float, G: float) -> complex:
        return cmath.exp(complex(G, TWO_PI * theta))

    def scale_at(self, c) -> float:
        # phi_M(c) = c (1 + O(1/c)); no extra margin is needed
        return 0.0

    def check(self, c):
        pass


class WedgeExit(RuntimeError):
    pass


class MonicLocusCoord:
    """g_n(nu) = P~_nu^n(v~_nu) with v~ = -k nu^{q+1}, derivative in nu."""

    def __init__(self, q: int):
        self.q = q
        self.d = q + 1
        self.k = q ** q / (q + 1) ** (q + 1)
        self.half_wedge = math.pi / q

    def g(self, nu, n):
        q = self.q
        w = -self.k * nu ** (q + 1)
        der = -self.k * (q + 1) * nu ** q
        for _ in range(n):
            s = w + nu
            sq1 = s ** (q - 1)
            der = sq1 * ((q + 1) * w + nu) * der + q * w * sq1
            w = w * s * sq1
        return w, der

    def seed(self, theta: float, G: float) -> complex:
        r = (math.exp(G) / self.k) ** (1.0 / (q1 := self.q + 1))
        return r * cmath.exp(1j * TWO_PI * (theta - 0.5) / q1)

    def scale_at(self, nu) -> float:
        return abs(nu)

    def check(self, nu):
        if abs(cmath.phase(nu)) >= self.half_wedge:
            raise WedgeExit(f"nu = {nu} left the wedge |Arg nu| < pi/{self.q}")


# --- continuation engine -------------------------------------------------

_LOG_FAR = math.log(1e10)


def _level(d, G, scale):
    """Smallest n with d^n G above the far-field threshold."""
    T = _LOG_FAR + math.log1p(scale)
    n = 0
    while d ** n * G < T:
        n += 1
    return n


def _newton(coord, x, n, W, tol=1e-12, maxit=40):
    for _ in range(maxit):
        val, der = coord.g(x, n)
        if der == 0 or not math.isfinite(abs(val)):
            return None
        step = (val - W) / der
        x = x - step
        if abs(step) <= tol * (1 + abs(x)):
            # the residual cannot beat the rounding floor |g'| eps |x|
            val, der = coord.g(x, n)
            floor = 100 * 2.2e-16 * abs(der) * (1 + abs(x))
            if abs(val - W) <= max(1e-6 * abs(W), floor):
                return x
            return None
    return None


def trace_ray(coord, theta, G_start=None, G_min: float = 1e-8,
              steps_per_halving: int = 8, space="dynamical", report=None):
    """Newton continuation of the ray of argument theta down to potential G_min.

    theta is an Angle, or a Fraction in [0, 1] when the two ends of the
    unit interval are different rays (relative arguments in the 0-wake).
    """
    rel = theta.value if isinstance(theta, Angle) else Fraction(theta)
    d = coord.d
    G = G_start if G_start is not None else _LOG_FAR + 1.0
    x = coord.seed(float(rel), G)
    # start far enough out that g_0 = W is the ray itself
    while _level(d, G, coord.scale_at(x)) > 0:
        if G_start is not None:
            raise ValueError("G_start is too small for an explicit start")
        G += 1.0
        x = coord.seed(float(rel), G)
    coord.check(x)
    report = report or (lambda x: x)
    samples, native = [(G, report(x))], [x]
    factor = 2.0 ** (-1.0 / steps_per_halving)

    def target(x, n, Gt):
        phase = float(rel * d ** n % 1)
        return cmath.exp(complex(d ** n * Gt, TWO_PI * phase))

    status = "max_steps"
    while G > G_min:
        sub = max(G * factor, G_min)
        y = None
        for _ in range(21):
            y = _single(coord, x, sub, target)
            if y is not None:
                break
            sub = math.sqrt(G * sub)
        if y is None:
            # at the rounding floor the samples stall before G_min
            stalled = len(samples) > 2 and abs(samples[-1][1] - samples[-2][1]) < 1e-9
            status = "landed" if stalled else "diverged"
            break
        x, G = y, sub
        samples.append((G, report(x)))
        native.append(x)
    else:
        a, b = samples[-2][1], samples[-1][1]
        status = "landed" if abs(a - b) < 1e-6 else "max_steps"
    return RayTrace(samples, theta, samples[-1][1], status, space, native)


def _single(coord, x, Gt, target):
    n = _level(coord.d, Gt, coord.scale_at(x))
    y = _newton(coord, x, n, target(x, n, Gt))
    if y is not None:
        coord.check(y)
    return y


def trace_dyn_ray(sys: DynamicalSystem, theta, G_start=None, G_min=1e-8,
                  steps_per_halving=8) -> RayTrace:
    coord = DynCoord(sys)
    s = sys.monic_scale()
    return trace_ray(coord, theta, G_start, G_min, steps_per_halving,
                     report=lambda w: w / s)


# --- potential and argument ----------------------------------------------

def _monic_potential(sys, w, max_iter=100000):
    d = sys.degree
    big = _bailout(d)
    n = 0
    while abs(w) <= big:
        w = sys.f(w)
        n += 1
        if n > max_iter:
            return None
    return math.log(abs(w)) / d ** n


def _pullback_argument(sys, w):
    """External argument of a far point by nearest-branch pullback."""
    d = sys.degree
    big = _bailout(d)
    orbit = [w]
    while abs(orbit[-1]) <= big:
        orbit.append(sys.f(orbit[-1]))
    t = (cmath.phase(orbit[-1]) / TWO_PI) % 1.0
    for z in reversed(orbit[:-1]):
        a = (cmath.phase(z) / TWO_PI) % 1.0
        cands = [(t + j) / d for j in range(d)]
        t = min(cands, key=lambda c: abs((c - a + 0.5) % 1.0 - 0.5))
    return t % 1.0


def _outward(sys, w, G, steps_per_halving=8):
    """Follow the ray through w outward until it is far from the Julia set."""
    coord = DynCoord(sys)
    d = coord.d
    far = 100.0 * (1.0 + coord.scale)
    factor = 2.0 ** (1.0 / steps_per_halving)
    while abs(w) <= far:
        n = _level(d, G, coord.scale)
        base, _ = coord.g(w, n)
        # small radial moves of f^n(w) keep Newton on the same preimage
        Gt = min(G * factor, G + 0.5 / d ** n)
        for _ in range(21):
            W = base / abs(base) * math.exp(d ** n * Gt)
            y = _newton(coord, w, n, W)
            if y is not None:
                break
            Gt = math.sqrt(G * Gt)
        if y is None:
            raise NoConvergence("outward ray continuation failed")
        w, G = y, Gt
    return w


def monic_coordinates(sys: DynamicalSystem, w):
    """(potential, external argument) of a point in monic coordinates."""
    m = sys.as_monic()
    G = _monic_potential(m, w)
    if G is None or G == 0:
        return None
    if abs(w) <= 100.0 * (1.0 + abs(m.param)):
        w = _outward(m, w, G)
    return G, _pullback_argument(m, w)


def escape_analyze(sys: DynamicalSystem, z0, max_iter: int = 1000) -> EscapeResult:
    R = sys.escape_radius
    z = complex(z0)
    n = 0
    while abs(z) <= R:
        if n >= max_iter:
            return EscapeResult(False, max_iter)
        z = sys.f(z)
        n += 1
    try:
        s = sys.monic_scale()
    except BranchUndefined:
        s = None
    if s is None:
        # potential is branch independent; the argument is not
        m = DynamicalSystem.monic(sys.q, abs(sys.param) ** (1.0 / sys.q) * cmath.exp(1j * math.pi / sys.q))
        G = _monic_potential(m, m.param / sys.q * complex(z0))
        return EscapeResult(True, n, G, None)
    G, arg = monic_coordinates(sys, s * complex(z0))
    return EscapeResult(True, n, G, arg)


# --- cycles ----------------------------------------------------------------

def _orbit_with_derivative(sys, z, k):
    der = 1.0 + 0j
    pts = []
    for _ in range(k):
        pts.append(z)
        der = sys.df(z) * der
        z = sys.f(z)
    return z, der, pts


def find_cycle(sys: DynamicalSystem, k: int, seed, max_iter: int = 100,
               tol: float = 1e-13, strict: bool = True) -> Cycle:
    z = complex(seed)
    for _ in range(max_iter):
        w, der, _ = _orbit_with_derivative(sys, z, k)
        if der == 1:
            raise NoConvergence("Newton derivative vanished")
        step = (w - z) / (der - 1)
        z -= step
        if not math.isfinite(abs(z)):
            break
        if abs(step) <= tol * (1 + abs(z)):
            w, der, pts = _orbit_with_derivative(sys, z, k)
            mp = minimal_period(pts, w)
            if strict and mp != k:
                raise WrongPeriod(f"converged to a cycle of period {mp}, not {k}")
            return Cycle(pts, k, der, mp)
    raise NoConvergence(f"no period-{k} cycle found from seed {seed}")


def minimal_period(pts, back, tol=1e-9) -> int:
    k = len(pts)
    scale = 1 + max(abs(p) for p in pts)
    for j in range(1, k + 1):
        if k % j == 0 and abs(pts[j % k] - pts[0] if j < k else back - pts[0]) <= tol * scale:
            return j
    return k


@dataclass(frozen=True)
class Verdict:
    kind: str                       # escaping | attracted | preperiodic | unresolved
    iterations: int = 0
    period: int = 0
    preperiod: int = 0
    multiplier: complex | None = None

    def as_tuple(self):
        if self.kind == "preperiodic":
            return (self.preperiod, self.period)
        if self.kind == "attracted":
            return (self.period, self.multiplier)
        if self.kind == "escaping":
            return (self.iterations,)
        return ()

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind == "escaping":
            out["iterations"] = self.iterations
        if self.kind in ("attracted", "preperiodic"):
            out["period"] = self.period
            out["multiplier"] = _cjson(complex(self.multiplier))
        if self.kind == "preperiodic":
            out["preperiod"] = self.preperiod
        return out


def classify_critical_orbit(sys: DynamicalSystem, max_iter: int = 2000,
                            tol: float = 1e-7, max_period: int = 64) -> Verdict:
    """Classify the orbit of the critical value f(crit) of the free critical point."""
    R = sys.escape_radius
    z = sys.f(sys.free_critical_point)
    orbit = [z]
    scale = 1 + abs(z)
    for t in range(1, max_iter + 1):
        z = sys.f(z)
        if abs(z) > R:
            return Verdict("escaping", iterations=t)
        orbit.append(z)
        scale = max(scale, 1 + abs(z))
        # minimal (l, k): first in l + k = t, then in k
        for k in range(1, min(t, max_period) + 1):
            l = t - k
            if abs(z - orbit[l]) > tol * scale:
                continue
            v = _decide(sys, orbit, l, k, tol * scale)
            if v is not None:
                return v
    return Verdict("unresolved", iterations=max_iter)


def _decide(sys, orbit, l, k, tol):
    try:
        cyc = find_cycle(sys, k, orbit[l], strict=True)
    except (NoConvergence, WrongPeriod):
        return None
    m = cyc.multiplier
    if abs(m) < 1:
        return Verdict("attracted", period=k, multiplier=m)
    near = lambda x: min(abs(x - p) for p in cyc.points)
    # the orbit must sit on the polished cycle from index l on
    if near(orbit[l]) > 1e3 * tol:
        return None
    while l > 0 and near(orbit[l - 1]) <= tol:
        l -= 1
    return Verdict("preperiodic", period=k, preperiod=l, multiplier=m)
