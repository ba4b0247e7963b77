"""Escape-time rasterization of parameter and dynamical planes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circle import Angle

TARGETS = ("mandelbrot", "locus", "monic", "julia", "juliaP")


@dataclass
class PlaneSpec:
    target: str
    bounds: tuple                 # (re_min, re_max, im_min, im_max)
    width: int
    height: int
    max_iter: int = 200
    q: int = 3
    param: complex = 0j           # c for julia, lam for juliaP
    overlays: list = field(default_factory=list)   # [(kind, angle)], kind in M/L/julia

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        a, b, c, d = self.bounds
        if not (a < b and c < d):
            raise ValueError("empty bounds")
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be positive")


@dataclass
class ImageGrid:
    width: int
    height: int
    pixels: np.ndarray            # escape iteration, 0 = never escaped
    max_iter: int
    overlay: np.ndarray | None = None

    def inside(self) -> np.ndarray:
        return self.pixels == 0

    def to_bytes(self) -> bytes:
        """8-bit levels: 0 inside, 1..254 log-scaled escape time, 255 ray."""
        n = self.pixels.astype(np.float64)
        scale = 253.0 / math.log1p(self.max_iter)
        levels = np.where(n > 0, 1 + np.floor(np.log1p(n) * scale), 0)
        levels = np.clip(levels, 0, 254).astype(np.uint8)
        if self.overlay is not None:
            levels[self.overlay] = 255
        return levels.tobytes()

    def pgm(self) -> bytes:
        return f"P5\n{self.width} {self.height}\n255\n".encode("ascii") + self.to_bytes()


def pixel_grid(spec: PlaneSpec):
    """Pixel-center coordinates; rows run top to bottom.

    For bounds symmetric about the real axis the lower half is the exact
    negation of the upper half, so conjugate pixels see conjugate inputs.
    """
    re0, re1, im0, im1 = spec.bounds
    w, h = spec.width, spec.height
    xs = re0 + (np.arange(w) + 0.5) * ((re1 - re0) / w)
    ys = im1 - (np.arange(h) + 0.5) * ((im1 - im0) / h)
    if im0 == -im1:
        half = h // 2
        ys[h - half:] = -ys[:half][::-1]
        if h % 2:
            ys[half] = 0.0
    return xs[None, :] + 1j * ys[:, None]


def _power(u, q):
    out = u
    for _ in range(q - 1):
        out = out * u
    return out


def _escape_time(z, step, radius, max_iter):
    z = z.copy()
    counts = np.zeros(z.shape, dtype=np.int32)
    active = np.ones(z.shape, dtype=bool)
    radius = np.broadcast_to(radius, z.shape)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, max_iter + 1):
            idx = np.nonzero(active)
            if not idx[0].size:
                break
            zn = step(z[idx], idx)
            z[idx] = zn
            esc = ~(np.abs(zn) <= radius[idx])
            counts[tuple(i[esc] for i in idx)] = n
            active[tuple(i[esc] for i in idx)] = False
    return counts


def render_plane(spec: PlaneSpec) -> ImageGrid:
    grid = pixel_grid(spec)
    q = spec.q
    inv_q = 1.0 / q
    t = spec.target
    if t == "mandelbrot":
        c = grid
        z0 = np.zeros_like(grid)
        R = np.maximum(2.0, np.maximum(np.abs(c), 1.0 + np.sqrt(1.0 + np.abs(c))))
        step = lambda z, idx: z * z + c[idx]
    elif t == "julia":
        c = complex(spec.param)
        z0 = grid
        R = max(2.0, abs(c), 1.0 + math.sqrt(1.0 + abs(c)))
        step = lambda z, idx: z * z + c
    elif t == "locus":
        lam = grid
        z0 = np.full(grid.shape, -q / (q + 1), dtype=complex)
        with np.errstate(divide="ignore"):
            R = q * (1.0 + (2.0 / np.abs(lam)) ** inv_q)
        step = lambda z, idx: lam[idx] * z * _power(1 + z * inv_q, q)
    elif t == "juliaP":
        lam = complex(spec.param)
        z0 = grid
        R = q * (1.0 + (2.0 / abs(lam)) ** inv_q)
        step = lambda z, idx: lam * z * _power(1 + z * inv_q, q)
    else:  # monic nu-plane, free critical point -nu/(q+1)
        nu = grid
        z0 = -nu * (1.0 / (q + 1))
        R = np.abs(nu) + 2.0
        step = lambda z, idx: z * _power(z + nu[idx], q)
    counts = _escape_time(z0, step, R, spec.max_iter)
    img = ImageGrid(spec.width, spec.height, counts, spec.max_iter)
    if spec.overlays:
        img.overlay = _rasterize_overlays(spec)
    return img


def _to_pixel(spec, z):
    re0, re1, im0, im1 = spec.bounds
    x = (z.real - re0) / (re1 - re0) * spec.width
    y = (im1 - z.imag) / (im1 - im0) * spec.height
    return x, y


def _rasterize_overlays(spec: PlaneSpec) -> np.ndarray:
    from .dynamics import DynamicalSystem, trace_dyn_ray
    from .parameter import ParameterSpace, trace_param_ray

    mask = np.zeros((spec.height, spec.width), dtype=bool)
    for kind, angle in spec.overlays:
        if kind == "M":
            tr = trace_param_ray(ParameterSpace.mandelbrot(), Angle(angle))
        elif kind == "L":
            tr = trace_param_ray(ParameterSpace.locus(spec.q), angle)
        elif spec.target == "julia":
            tr = trace_dyn_ray(DynamicalSystem.quadratic(spec.param), Angle(angle))
        else:
            tr = trace_dyn_ray(DynamicalSystem.family(spec.q, spec.param), Angle(angle))
        pts = [z for _, z in tr.samples]
        for a, b in zip(pts, pts[1:]):
            xa, ya = _to_pixel(spec, a)
            xb, yb = _to_pixel(spec, b)
            n = int(min(4 * max(abs(xb - xa), abs(yb - ya)), 10 ** 5)) + 1
            for s in np.linspace(0.0, 1.0, n + 1):
                x = int(math.floor(xa + s * (xb - xa)))
                y = int(math.floor(ya + s * (yb - ya)))
                if 0 <= x < spec.width and 0 <= y < spec.height:
                    mask[y, x] = True
    return mask


def write_pgm(img: ImageGrid, path) -> None:
    with open(path, "wb") as fh:
        fh.write(img.pgm())


def write_png(img: ImageGrid, path) -> None:
    try:
        from PIL import Image
    except ImportError as exc:  # optional convenience
        raise RuntimeError("PNG output needs Pillow; use PGM instead") from exc
    data = np.frombuffer(img.to_bytes(), dtype=np.uint8).reshape(img.height, img.width)
    Image.fromarray(data, mode="L").save(path)
