"""Parameter planes: M for z^2 + c and the connectedness locus L_q of
P_{q,lam}(z) = lam z (1 + z/q)^q.

Locus rays are traced in the monic nu-plane (lam = nu^q) and indexed by
the relative argument in [0, 1], the dynamical argument of the critical
value.  Solvers work directly in lam, where the free critical point
omega = -q/(q+1) does not move.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .circle import Angle, orbit_type
from .dynamics import (
    DynamicalSystem,
    MandelCoord,
    MonicLocusCoord,
    NoConvergence,
    NotEscaping,
    WrongPeriod,
    RayTrace,
    classify_critical_orbit,
    escape_analyze,
    find_cycle,
    monic_coordinates,
    trace_ray,
)
from . import theta as th


class WrongMinimality(ValueError):
    pass


class LandingMismatch(RuntimeError):
    pass


@dataclass(frozen=True)
class ParameterSpace:
    kind: str          # mandelbrot | locus | monic_locus
    q: int = 2

    @classmethod
    def mandelbrot(cls):
        return cls("mandelbrot", 2)

    @classmethod
    def locus(cls, q):
        return cls("locus", q)

    @classmethod
    def monic_locus(cls, q):
        return cls("monic_locus", q)

    def system(self, point) -> DynamicalSystem:
        if self.kind == "mandelbrot":
            return DynamicalSystem.quadratic(point)
        if self.kind == "locus":
            return DynamicalSystem.family(self.q, point)
        return DynamicalSystem.monic(self.q, point)

    def label(self) -> str:
        return self.kind if self.kind == "mandelbrot" else f"{self.kind}({self.q})"


def _cjson(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


@dataclass
class ComponentRecord:
    space: ParameterSpace
    period: int
    center: complex
    root: complex | None = None
    root_angles: tuple | None = None

    def to_dict(self):
        return {
            "schema": "limbmaps.component/1",
            "space": self.space.label(),
            "period": self.period,
            "center": _cjson(self.center),
            "root": None if self.root is None else _cjson(self.root),
            "root_angles": None if self.root_angles is None else [str(a) for a in self.root_angles],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


@dataclass
class MisiurewiczRecord:
    space: ParameterSpace
    preperiod: int
    period: int
    parameter: complex
    angles: list = field(default_factory=list)

    def to_dict(self):
        return {
            "schema": "limbmaps.misiurewicz/1",
            "space": self.space.label(),
            "preperiod": self.preperiod,
            "period": self.period,
            "parameter": _cjson(self.parameter),
            "angles": [str(a) for a in self.angles],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


# --- membership and coordinates ----------------------------------------

@dataclass(frozen=True)
class Membership:
    inside: bool
    iterations: int


def membership(space: ParameterSpace, point, max_iter: int = 500) -> Membership:
    sys = space.system(point)
    z = sys.free_critical_point
    R = sys.escape_radius
    for n in range(1, max_iter + 1):
        z = sys.f(z)
        if abs(z) > R:
            return Membership(False, n)
    return Membership(True, max_iter)


def _nu_of(space, point) -> complex:
    if space.kind == "monic_locus":
        return complex(point)
    lam = complex(point)
    if lam.imag == 0 and lam.real <= 0:
        raise ValueError("relative coordinates need lam off the closed negative axis")
    return lam ** (1.0 / space.q)


def critical_value_monic(q: int, nu: complex) -> complex:
    return -(q ** q / (q + 1) ** (q + 1)) * nu ** (q + 1)


def param_coordinates(space: ParameterSpace, point):
    """(potential, argument); for the loci the argument is the relative one."""
    if space.kind == "mandelbrot":
        r = escape_analyze(DynamicalSystem.quadratic(point), point)
        if not r.escaped:
            raise NotEscaping(f"{point} is not outside M")
        return r.potential, r.ext_argument
    q = space.q
    nu = _nu_of(space, point)
    sysm = DynamicalSystem.monic(q, nu)
    if membership(ParameterSpace.monic_locus(q), nu, 2000).inside:
        raise NotEscaping(f"{point} is not outside the locus")
    out = monic_coordinates(sysm, critical_value_monic(q, nu))
    if out is None:
        raise NotEscaping(f"{point} is not outside the locus")
    return out


def trace_param_ray(space: ParameterSpace, theta, G_min: float = 1e-8,
                    steps_per_halving: int = 8) -> RayTrace:
    """Parameter ray; for loci theta is the relative argument in [0, 1]."""
    if space.kind == "mandelbrot":
        return trace_ray(MandelCoord(), Angle(theta), None, G_min,
                         steps_per_halving, space="mandelbrot")
    q = space.q
    rel = Fraction(theta.value if isinstance(theta, Angle) else theta)
    if not 0 <= rel <= 1:
        raise ValueError("relative argument must lie in [0, 1]")
    report = (lambda nu: nu ** q) if space.kind == "locus" else None
    return trace_ray(MonicLocusCoord(q), rel, None, G_min, steps_per_halving,
                     space=space.label(), report=report)


# --- Newton solvers ------------------------------------------------------

class _Family:
    """f(z, p) with the partial derivatives the solvers need."""

    def __init__(self, space: ParameterSpace):
        if space.kind == "monic_locus":
            raise ValueError("solve in the locus (lam) coordinates")
        self.space = space
        self.q = space.q
        self.crit = 0j if space.kind == "mandelbrot" else complex(-space.q / (space.q + 1))

    def parts(self, z, p):
        """f, f_z, f_p, f_zz, f_zp."""
        if self.space.kind == "mandelbrot":
            return z * z + p, 2 * z, 1.0, 2.0, 0.0
        q = self.q
        u = 1 + z / q
        u2 = u ** (q - 2) if q >= 2 else 1.0
        u1 = u2 * u
        lin = 1 + (q + 1) * z / q
        fp = z * u1 * u
        fz_over = u1 * lin
        fzz_over = (q - 1) / q * u2 * lin + u1 * (q + 1) / q
        return p * fp, p * fz_over, fp, p * fzz_over, fz_over


def _newton1(F, x, tol=1e-14, maxit=80):
    step = float("inf")
    for _ in range(maxit):
        val, der = F(x)
        if der == 0:
            break
        step = val / der
        # damp wild steps
        if abs(step) > 1 + abs(x):
            step *= (1 + abs(x)) / abs(step)
        x -= step
        if abs(step) <= tol * (1 + abs(x)):
            return x
    if abs(step) <= 1e-10 * (1 + abs(x)):
        return x                       # rounding floor of a high degree map
    raise NoConvergence(f"Newton did not converge from {x}")


def _crit_orbit_and_pderiv(fam, p, n):
    """z_n = f^n(crit) and dz_n/dp; index 0 is the critical point."""
    z, b = fam.crit, 0j
    zs, bs = [z], [b]
    for _ in range(n):
        f, fz, fp, _, _ = fam.parts(z, p)
        z, b = f, fz * b + fp
        zs.append(z)
        bs.append(b)
    return zs, bs


def _center(fam, k, seed):
    def F(p):
        zs, bs = _crit_orbit_and_pderiv(fam, p, k)
        return zs[k] - fam.crit, bs[k]

    p = _newton1(F, complex(seed))
    zs, _ = _crit_orbit_and_pderiv(fam, p, k)
    scale = 1 + max(abs(z) for z in zs)
    for j in range(1, k):
        if k % j == 0 and abs(zs[j] - fam.crit) < 1e-8 * scale:
            raise WrongMinimality(f"center has period {j}, not {k}")
    return p


def _misiurewicz(fam, l, k, seed):
    # value-orbit indices: v_j = z_{j+1}
    def F(p):
        zs, bs = _crit_orbit_and_pderiv(fam, p, l + k + 1)
        return zs[l + k + 1] - zs[l + 1], bs[l + k + 1] - bs[l + 1]

    p = _newton1(F, complex(seed))
    v = classify_critical_orbit(fam_system(fam, p), max_iter=200, tol=1e-7)
    # rays of period k may land on a cycle whose period is a divisor of k
    if v.kind != "preperiodic" or v.preperiod != l or k % v.period:
        raise WrongMinimality(f"solution {p} has critical orbit {v}, not ({l}, {k})")
    return p


def fam_system(fam, p):
    if fam.space.kind == "mandelbrot":
        return DynamicalSystem.quadratic(p)
    return DynamicalSystem.family(fam.q, p)


def _cycle_system(fam, k, p, z):
    """F1 = f^k(z) - z, a = (f^k)'(z) and the Jacobian pieces."""
    a, b, aa, ab = 1.0 + 0j, 0j, 0j, 0j
    w = z
    for _ in range(k):
        f, fz, fp, fzz, fzp = fam.parts(w, p)
        aa, ab = fzz * a * a + fz * aa, fzz * a * b + fzp * a + fz * ab
        a, b = fz * a, fz * b + fp
        w = f
    return w - z, a, b, aa, ab


def _newton2(fam, k, t, p, z, tol=1e-13, maxit=60):
    dz = dp = float("inf")
    for _ in range(maxit):
        F1, a, b, aa, ab = _cycle_system(fam, k, p, z)
        F2 = a - t
        # [[a-1, b], [aa, ab]] [dz, dp] = [F1, F2]
        det = (a - 1) * ab - b * aa
        if det == 0:
            raise NoConvergence("singular Jacobian")
        dz = (F1 * ab - b * F2) / det
        dp = ((a - 1) * F2 - aa * F1) / det
        lim = 0.5 * (1 + abs(p))
        if abs(dp) > lim:
            dz, dp = dz * lim / abs(dp), dp * lim / abs(dp)
        z, p = z - dz, p - dp
        if abs(dp) <= tol * (1 + abs(p)) and abs(dz) <= tol * (1 + abs(z)):
            return p, z
    if abs(dp) <= 1e-10 * (1 + abs(p)) and abs(dz) <= 1e-10 * (1 + abs(z)):
        return p, z
    raise NoConvergence(f"cycle system did not converge (t={t})")


def parabolic_seed(space: ParameterSpace, p, iterations: int = 4000) -> complex:
    """A point near the (nearly) parabolic cycle: the late critical orbit.

    Just outside the locus the orbit lingers near the ghost of the cycle
    before escaping, so the middle of the orbit is used instead.
    """
    sys = space.system(p)
    z = sys.free_critical_point
    orbit = [z]
    for _ in range(iterations):
        z = sys.f(z)
        if abs(z) > sys.escape_radius:
            return orbit[len(orbit) // 2]
        orbit.append(z)
    return z


def solve_special(space: ParameterSpace, kind: str, seed, k: int = 1, l: int = 0,
                  z_seed=None, multiplier=1.0):
    """Newton for centers, roots and Misiurewicz parameters.

    kind is "center", "root" or "misiurewicz"; a root returns the
    parameter only (the parabolic cycle point is in solve_root).
    """
    if space.kind == "monic_locus":
        lam = solve_special(ParameterSpace.locus(space.q), kind, complex(seed) ** space.q,
                            k, l, z_seed, multiplier)
        return lam ** (1.0 / space.q)
    fam = _Family(space)
    if kind == "center":
        return _center(fam, k, seed)
    if kind == "misiurewicz":
        return _misiurewicz(fam, l, k, seed)
    if kind == "root":
        return solve_root(space, k, seed, z_seed, multiplier)[0]
    raise ValueError(f"unknown kind {kind!r}")


def _root_candidates(fam, k, seed, z_seed):
    """Roots of period-k components reachable from a seed.

    Entries are (param, cycle point, m, multiplier).  At a primitive root
    the k-cycle itself is parabolic (m = k).  At a satellite root it
    merges with a parent m-cycle whose multiplier is a root of unity of
    order k/m; there the k-cycle system is degenerate, so the parent
    cycle is solved instead.
    """
    out = []
    for m in (m for m in range(1, k + 1) if k % m == 0):
        r = k // m
        for j in (j for j in range(r) if math.gcd(j, r) == 1):
            mu = cmath.exp(2j * math.pi * j / r)
            try:
                p, z = _newton2(fam, m, mu, complex(seed), complex(z_seed))
            except (NoConvergence, ZeroDivisionError, OverflowError):
                continue
            out.append((p, z, m, mu))
    return out


def _root_any(fam, k, seed, z_seed):
    cands = _root_candidates(fam, k, seed, z_seed)
    if not cands:
        raise NoConvergence(f"no period-{k} root near {seed}")
    return min(cands, key=lambda c: abs(c[0] - seed))


def solve_root(space, k, seed, z_seed=None, multiplier=1.0):
    fam = _Family(space)
    if z_seed is None:
        z_seed = parabolic_seed(space, seed)
    if multiplier != 1.0:
        return _newton2(fam, k, multiplier, complex(seed), complex(z_seed))
    p, z, _, _ = _root_any(fam, k, seed, z_seed)
    return p, z


def _inside_from_root(fam, k, root, z, m, mu, steps=32):
    """Center of the period-k component continued from its root."""
    if m == k:
        p = root
        for j in range(1, steps + 1):
            p, z = _newton2(fam, k, 1 - j / steps, p, z)
        return _center(fam, k, p)
    # satellite: push the parent cycle just past |mu| = 1, where the
    # k-cycle is attracting, then continue the k-cycle to multiplier 0
    for eps in (0.05, 0.02, 0.1, 0.01):
        try:
            p, zm = _newton2(fam, m, mu * (1 + eps), root, z)
            sys = fam_system(fam, p)
            w = parabolic_seed(fam.space, p, 20000)
            cyc = find_cycle(sys, k, w)
        except (NoConvergence, WrongPeriod, ZeroDivisionError, OverflowError):
            continue
        if abs(cyc.multiplier) >= 1:
            continue
        t0, z = cyc.multiplier, cyc.points[0]
        for j in range(1, steps + 1):
            p, z = _newton2(fam, k, t0 * (1 - j / steps), p, z)
        return _center(fam, k, p)
    raise NoConvergence("could not enter the satellite component")


def misiurewicz_record(space, p, angles, l, k) -> MisiurewiczRecord:
    """Record with the minimal orbit type of the solved point.

    The point period may be a proper divisor of the ray period k.
    """
    v = classify_critical_orbit(space.system(p), 400)
    if v.kind == "preperiodic" and k % v.period == 0:
        l, k = v.preperiod, v.period
    return MisiurewiczRecord(space, l, k, complex(p), list(angles))


# --- multiplier transport ------------------------------------------------

def _closed_form(space, comp, t):
    if space.kind == "mandelbrot" and comp.period == 1:
        return t / 2 - t * t / 4
    if space.kind == "locus" and comp.period == 1:
        if abs(comp.center) < 1e-12:
            return t                       # fixed point 0, P'(0) = lam
        q = space.q
        if abs(t - 1) < 1e-12:
            return 1.0 + 0j
        z = q * (t - 1) / (q + 1 - t)
        return (1 + z / q) ** (-q)
    return None


def multiplier_param(space: ParameterSpace, comp: ComponentRecord, t, steps: int = 32) -> complex:
    """Parameter in the component whose attracting cycle has multiplier t."""
    t = complex(t)
    if abs(t) > 1 + 1e-12:
        raise ValueError("|t| must be at most 1")
    cf = _closed_form(space, comp, t)
    if cf is not None:
        return complex(cf)
    fam = _Family(space)
    p, z = complex(comp.center), fam.crit
    n = max(4, int(math.ceil(abs(t) * steps)))
    for j in range(1, n + 1):
        # the last stretch to the boundary is taken more gently
        s = j / n
        p, z = _newton2(fam, comp.period, t * s, p, z)
    return p


def measured_multiplier(space, comp, p) -> complex:
    """Multiplier of the attracting period-k cycle at p, by find_cycle."""
    sys = space.system(p)
    seed = parabolic_seed(space, p, 2000)
    return find_cycle(sys, comp.period, seed, strict=False).multiplier


# --- transport between M_{p/q} and the 0-limb -------------------------------

def _period_of(u, d) -> int:
    lk = orbit_type(Angle(u), d)
    if lk.preperiod:
        raise ValueError(f"{u} is not periodic under m_{d}")
    return lk.period


def locate_component(space, angles, period, G_min=1e-8, tol=1e-2, trace=None):
    """Root and center of the period-`period` component whose root rays are `angles`.

    Each landing estimate is Newton-polished to a root; the two polished
    roots must agree.  The center is reached by continuing the cycle
    along real multipliers from the root.
    """
    d = 2 if space.kind == "mandelbrot" else space.q + 1
    for a in angles:
        if _period_of(a, d) != period:
            raise ValueError(f"{a} does not have period {period} under m_{d}")
    trace = trace or (lambda a: trace_param_ray(space, a, G_min))
    land = [trace(a).landing_estimate for a in angles]
    est = (land[0] + land[1]) / 2
    fam = _Family(space)
    # root rays of a satellite lie on one cycle, those of a primitive root on two
    a0 = angles[0].value if isinstance(angles[0], Angle) else Fraction(angles[0])
    orbit = {a0 * d ** j % 1 for j in range(period)}
    b0 = angles[1].value if isinstance(angles[1], Angle) else Fraction(angles[1])
    satellite = b0 % 1 in orbit
    cands = [[c for c in _root_candidates(fam, period, s, parabolic_seed(space, s))
              if (c[2] < period) == satellite] for s in land]
    common = [c for c in cands[0]
              if any(abs(c[0] - e[0]) <= 1e-6 * (1 + abs(c[0])) for e in cands[1])]
    raw_ok = abs(land[0] - land[1]) <= tol * (1 + abs(est))
    best = None
    if common:
        best = min(common, key=lambda c: abs(c[0] - est))
    elif not raw_ok:
        # parabolic landing is slow, so the raw match is relative and loose
        raise LandingMismatch(f"rays land {abs(land[0] - land[1]):.3g} apart")
    elif cands[0] or cands[1]:
        best = min(cands[0] + cands[1], key=lambda c: abs(c[0] - est))
    try:
        if best is None:
            raise NoConvergence("root polish failed")
        root, z, m, mu = best
        center = _inside_from_root(fam, period, root, z, m, mu)
    except (NoConvergence, WrongMinimality, ZeroDivisionError, OverflowError):
        root = best[0] if best else est
        center = _center(fam, period, est)
    return ComponentRecord(space, period, center, root, tuple(angles))


def phi_numeric(p: int, q: int, root_angles, t=0.0, G_min: float = 1e-8):
    """Transport a hyperbolic component of M_{p/q} to the 0-limb of L_q.

    Returns (component record in L_q, parameter at internal multiplier t).
    """
    u = [th.theta_limb(p, q, a) for a in root_angles]
    m = _period_of(u[0], q + 1)
    space = ParameterSpace.locus(q)
    if set(u) == {0, 1}:
        # the main component: the root is the root of the 0-limb itself
        comp = ComponentRecord(space, 1, _center(_Family(space), 1, 2.0), 1.0 + 0j, tuple(u))
    else:
        comp = locate_component(space, u, m, G_min)
    return comp, multiplier_param(space, comp, t)


def involution_numeric(p: int, q: int, theta=None, root_angles=None, t=0.0,
                       G_min: float = 1e-8):
    """Numerical reflection of M_{p/q} across its symmetry arc.

    With theta (Misiurewicz case): landing of R_M(theta_bar(theta)),
    polished with the common orbit type.  With root_angles: the component
    whose root angles are the theta_bar images, at multiplier conj(t).
    """
    M = ParameterSpace.mandelbrot()
    if theta is not None:
        tb = th.theta_bar(p, q, Angle(theta))
        l, k = orbit_type(tb, 2)
        seed = trace_param_ray(M, tb, G_min).landing_estimate
        c = solve_special(M, "misiurewicz", seed, k=k, l=l)
        return misiurewicz_record(M, c, [tb], l, k)
    images = sorted(th.theta_bar(p, q, a) for a in root_angles)
    k = _period_of(images[0], 2)
    comp = locate_component(M, images, k, G_min)
    return comp, multiplier_param(M, comp, complex(t).conjugate())
