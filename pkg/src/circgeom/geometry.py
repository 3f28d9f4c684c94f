"""Defining functions, generalized circles and their tangency geometry.

A defining function is either the Euclidean distance ``|x - y|`` or the
distance plus a small polynomial perturbation in the four scalar inputs.
Curves are level sets ``{y : phi(x0, y) = r0}`` clipped to a disk window.
This module provides the curve-space metric, the window-restricted tangency
pseudo-distance (position mismatch plus unit-normal mismatch, minimized
over pairs of curve points), annulus overlap estimates, and two-focus
conic level sets with a robust crossing counter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .config import STAGE, Stage


class DomainError(ValueError):
    """Input point outside the configured reference box."""


class SingularityError(ValueError):
    """Gradient evaluated too close to the curve center."""


class EmptyCurveError(ValueError):
    """A curve does not meet the requested window."""


class NonUniqueRootError(ValueError):
    """More than one parallel-normal point at the working resolution."""


class HypothesisError(ValueError):
    """A quantitative hypothesis required by an operation fails."""


SINGULAR_RADIUS = 1e-9


# ---------------------------------------------------------------------------
# defining functions


def _monomial_partial(exponents, coeff, axis):
    """Differentiate coeff * prod(v_i^e_i) along one of the four inputs."""
    e = list(exponents)
    if e[axis] == 0:
        return None
    c = coeff * e[axis]
    e[axis] -= 1
    return tuple(e), c


@dataclass(frozen=True)
class DefiningFunction:
    """Euclidean distance, optionally plus a polynomial perturbation.

    ``perturbation`` maps exponent tuples ``(i1, i2, j1, j2)`` (powers of
    x1, x2, y1, y2) to coefficients.  ``c3_bound`` is the precomputed sup of
    the perturbation's partial derivatives up to third order over the
    reference box.
    """

    kind: str = "euclidean"
    perturbation: dict = field(default_factory=dict)
    c3_bound: float = 0.0
    stage: Stage = STAGE

    def __post_init__(self):
        if self.kind not in ("euclidean", "perturbed"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "perturbed" and self.c3_bound >= self.stage.c3_threshold:
            raise ValueError(
                f"perturbation C3 bound {self.c3_bound:.3g} exceeds the "
                f"smallness threshold {self.stage.c3_threshold:.3g}"
            )

    @property
    def degree(self) -> int:
        if not self.perturbation:
            return 0
        return max(sum(e) for e in self.perturbation)

    def perturbation_value(self, x, y):
        if not self.perturbation:
            return 0.0 if np.ndim(y) == 1 else np.zeros(np.shape(y)[:-1])
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = 0.0
        for (i1, i2, j1, j2), c in self.perturbation.items():
            total = total + c * (
                x[..., 0] ** i1 * x[..., 1] ** i2 * y[..., 0] ** j1 * y[..., 1] ** j2
            )
        return total

    def perturbation_grad_y(self, x, y):
        gx = self._apply_table(self._partial_table(2), x, y)
        gy = self._apply_table(self._partial_table(3), x, y)
        return np.stack([gx, gy], axis=-1)

    def _partial_table(self, axis):
        table = {}
        for e, c in self.perturbation.items():
            out = _monomial_partial(e, c, axis)
            if out is not None:
                table[out[0]] = table.get(out[0], 0.0) + out[1]
        return table

    def _apply_table(self, table, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1])
        total = np.zeros(shape)
        for (i1, i2, j1, j2), c in table.items():
            total = total + c * (
                x[..., 0] ** i1 * x[..., 1] ** i2 * y[..., 0] ** j1 * y[..., 1] ** j2
            )
        return total

    def to_record(self) -> str:
        """Serialize as a flat text record with graded-lex coefficient order."""
        lines = [f"kind={self.kind}", f"degree={self.degree}"]
        keys = sorted(self.perturbation, key=lambda e: (sum(e), e))
        for e in keys:
            lines.append(
                f"coef {e[0]} {e[1]} {e[2]} {e[3]} {self.perturbation[e]!r}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str) -> "DefiningFunction":
        kind = "euclidean"
        table = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("kind="):
                kind = line.split("=", 1)[1]
            elif line.startswith("coef "):
                parts = line.split()
                e = tuple(int(v) for v in parts[1:5])
                table[e] = float(parts[5])
        if kind == "euclidean":
            return cls()
        return make_perturbed(table)


def c3_norm(table: dict, stage: Stage = STAGE, grid: int = 9) -> float:
    """Sup over the reference box of all perturbation partials of order <= 3."""
    lo = np.asarray(stage.domain_lo)
    hi = np.asarray(stage.domain_hi)
    axes = [np.linspace(lo[i % 2], hi[i % 2], grid) for i in range(4)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    x = pts[:, :2]
    y = pts[:, 2:]

    def table_max(tab):
        if not tab:
            return 0.0
        total = np.zeros(len(pts))
        for (i1, i2, j1, j2), c in tab.items():
            total += c * x[:, 0] ** i1 * x[:, 1] ** i2 * y[:, 0] ** j1 * y[:, 1] ** j2
        return float(np.max(np.abs(total)))

    frontier = [table]
    best = table_max(table)
    for _ in range(3):
        next_frontier = []
        for tab in frontier:
            for axis in range(4):
                d = {}
                for e, c in tab.items():
                    out = _monomial_partial(e, c, axis)
                    if out is not None:
                        d[out[0]] = d.get(out[0], 0.0) + out[1]
                if d:
                    next_frontier.append(d)
                    best = max(best, table_max(d))
        frontier = next_frontier
    return best


def make_perturbed(table: dict, stage: Stage = STAGE) -> DefiningFunction:
    """Build a perturbed defining function, computing its C3 bound."""
    return DefiningFunction(
        kind="perturbed",
        perturbation=dict(table),
        c3_bound=c3_norm(table, stage),
        stage=stage,
    )


EUCLIDEAN = DefiningFunction()


def eval_phi(phi: DefiningFunction, x, y) -> float:
    """Evaluate the defining function at a center/point pair."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 1 and not phi.stage.in_domain(x):
        raise DomainError(f"center {x} outside the reference box")
    if y.ndim == 1 and not phi.stage.in_domain(y):
        raise DomainError(f"point {y} outside the reference box")
    dist = np.linalg.norm(np.atleast_2d(y) - np.atleast_2d(x), axis=-1)
    if x.ndim == 1 and y.ndim == 1:
        dist = float(dist[0])
    if phi.kind == "euclidean":
        return dist
    return dist + phi.perturbation_value(x, y)


def eval_phi_many(phi: DefiningFunction, x, ys: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over an array of points (no domain check)."""
    x = np.asarray(x, dtype=float)
    ys = np.asarray(ys, dtype=float)
    dist = np.linalg.norm(ys - x, axis=-1)
    if phi.kind == "euclidean":
        return dist
    return dist + phi.perturbation_value(x, ys)


def grad_y(phi: DefiningFunction, x, y) -> np.ndarray:
    """Analytic gradient of phi(x, .) at y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = y - x
    dist = np.linalg.norm(diff, axis=-1)
    if np.any(dist < SINGULAR_RADIUS):
        raise SingularityError("gradient undefined at the center")
    g = diff / dist[..., None] if diff.ndim > 1 else diff / dist
    if phi.kind == "perturbed":
        g = g + phi.perturbation_grad_y(x, y)
    return g


def unit_grad_y(phi: DefiningFunction, x, y) -> np.ndarray:
    g = grad_y(phi, x, y)
    n = np.linalg.norm(g, axis=-1)
    return g / n[..., None] if g.ndim > 1 else g / n


def cinematic_check(phi: DefiningFunction, a, b, h: float = 1e-5):
    """Gradient norm and the curvature-nondegeneracy determinant at (a, b).

    The determinant is formed from the x-Jacobian of two scalar maps: the
    transverse component of the y-gradient, and the transverse derivative of
    the normalized y-gradient's transverse component (all along the unit
    vector e orthogonal to the y-gradient at (a, b)).  Central differences
    in x and y are used.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    g0 = grad_y(phi, a, b)
    norm0 = float(np.linalg.norm(g0))
    if norm0 < SINGULAR_RADIUS:
        raise SingularityError("vanishing gradient")
    e = np.array([-g0[1], g0[0]]) / norm0

    def f1(x):
        return float(e @ grad_y(phi, x, b))

    def f2(x):
        def s(y):
            g = grad_y(phi, x, y)
            return float(e @ g / np.linalg.norm(g))

        return (s(b + h * e) - s(b - h * e)) / (2 * h)

    jac = np.empty((2, 2))
    for j, func in enumerate((f1, f2)):
        for i in range(2):
            dx = np.zeros(2)
            dx[i] = h
            jac[j, i] = (func(a + dx) - func(a - dx)) / (2 * h)
    return norm0, float(np.linalg.det(jac))


# ---------------------------------------------------------------------------
# windows and circles


@dataclass(frozen=True)
class Window:
    """Disk window B(center, radius) with a fixed nesting ratio."""

    center: tuple[float, float]
    radius: float
    shrink_factor: float = 0.5

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("window radius must be positive")
        if not 0 < self.shrink_factor < 1:
            raise ValueError("shrink factor must lie in (0, 1)")

    @classmethod
    def standard(cls, stage: Stage = STAGE) -> "Window":
        return cls(stage.window_center, stage.window_radius, stage.shrink_factor)

    @classmethod
    def full(cls, stage: Stage = STAGE) -> "Window":
        return cls(stage.window_center, 100.0, stage.shrink_factor)

    def shrunk(self, times: int = 1) -> "Window":
        return Window(self.center, self.radius * self.shrink_factor**times, self.shrink_factor)

    def contains(self, pts, tol: float = 0.0):
        pts = np.asarray(pts, dtype=float)
        d = np.linalg.norm(pts - np.asarray(self.center), axis=-1)
        return d <= self.radius + tol

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        r = self.radius * np.sqrt(rng.uniform(size=n))
        th = rng.uniform(0.0, 2 * math.pi, size=n)
        return np.asarray(self.center) + np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


@dataclass(frozen=True)
class Circle:
    """Level set {y in window : phi(center, y) = radius}, the atom of counting."""

    center: tuple[float, float]
    radius: float
    phi: DefiningFunction = EUCLIDEAN

    def __post_init__(self):
        stage = self.phi.stage
        # closed interval: the reference radii 1 - tau and 1 are admissible
        if not (stage.radius_lo <= self.radius <= stage.radius_hi):
            raise ValueError(
                f"radius {self.radius} outside [{stage.radius_lo}, {stage.radius_hi}]"
            )
        hw = stage.center_box_halfwidth
        if abs(self.center[0]) > hw or abs(self.center[1]) > hw:
            raise ValueError(f"center {self.center} outside the parameter box")

    @property
    def center_arr(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    def point_at(self, theta):
        """Point(s) of the curve at polar parameter theta around the center."""
        theta = np.asarray(theta, dtype=float)
        u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        if self.phi.kind == "euclidean":
            return self.center_arr + self.radius * u
        s = np.full(theta.shape, self.radius)
        # Newton in the radial coordinate; the perturbation is C3-small so
        # two or three steps reach machine-level residuals
        for _ in range(4):
            y = self.center_arr + s[..., None] * u
            f = eval_phi_many(self.phi, self.center_arr, y) - self.radius
            df = 1.0 + np.sum(self.phi.perturbation_grad_y(self.center_arr, y) * u, axis=-1)
            s = s - f / df
        return self.center_arr + s[..., None] * u

    def membership(self, pts, delta: float):
        """|phi(center, pts) - radius| <= delta, vectorized."""
        vals = eval_phi_many(self.phi, self.center_arr, np.asarray(pts, dtype=float))
        return np.abs(vals - self.radius) <= delta


def metric_d(g: Circle, h: Circle) -> float:
    """Parameter-space metric: center distance plus radius distance."""
    return float(np.linalg.norm(g.center_arr - h.center_arr) + abs(g.radius - h.radius))


def euclidean_delta_closed_form(g: Circle, h: Circle) -> float:
    """Full-plane tangency pseudo-distance for Euclidean circles."""
    return abs(float(np.linalg.norm(g.center_arr - h.center_arr)) - abs(g.radius - h.radius))


@dataclass
class CurveSample:
    """Ordered points along a curve with their polar parameters."""

    points: np.ndarray
    thetas: np.ndarray
    step: float
    breaks: list = field(default_factory=list)
    degenerate: bool = False

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0

    def segments(self) -> Iterable[np.ndarray]:
        """Yield the maximal contiguous polylines."""
        if self.is_empty:
            return
        bounds = [0, *self.breaks, len(self.points)]
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi - lo >= 2:
                yield self.points[lo:hi]

    def to_csv(self) -> str:
        lines = ["y1,y2"]
        for p in self.points:
            lines.append(f"{p[0]!r},{p[1]!r}")
        return "\n".join(lines) + "\n"


def default_step(delta: float | None = None) -> float:
    if delta is None:
        return 1e-3
    return min(delta / 4.0, 1e-3)


def sample_curve(g: Circle, window: Window, step: float | None = None) -> CurveSample:
    """Sample the window-clipped curve at roughly uniform arc length.

    Raises EmptyCurveError when the curve misses the closed window.
    """
    if step is None:
        step = default_step()
    n = max(64, int(math.ceil(2 * math.pi * g.radius / step)))
    thetas = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    pts = g.point_at(thetas)
    keep = window.contains(pts, tol=step)
    if not np.any(keep):
        raise EmptyCurveError("curve does not meet the window")
    idx = np.nonzero(keep)[0]
    # rotate so a single angular run of kept samples stays contiguous
    gaps = np.nonzero(np.diff(idx) > 1)[0]
    breaks = []
    if len(gaps) > 0:
        first_gap = gaps[0]
        idx = np.concatenate([idx[first_gap + 1 :], idx[: first_gap + 1]])
        prev = None
        for k, i in enumerate(idx):
            if prev is not None and (i - prev) % n > 1:
                breaks.append(k)
            prev = i
    return CurveSample(points=pts[idx], thetas=thetas[idx], step=step, breaks=breaks)


def _delta_objective(g: Circle, h: Circle, t1, t2):
    y1 = g.point_at(np.asarray(t1))
    y2 = h.point_at(np.asarray(t2))
    n1 = unit_grad_y(g.phi, g.center_arr, y1)
    n2 = unit_grad_y(h.phi, h.center_arr, y2)
    return np.linalg.norm(y1 - y2, axis=-1) + np.linalg.norm(n1 - n2, axis=-1)


def _descend(objective, t1: float, t2: float, span: float, sweeps: int = 200):
    """Simplex descent from a coarse pair at the given parameter scale.

    The initial simplex has edge length ``span``; iteration stops once the
    simplex value spread falls below 1e-11 (well past the 1e-8 target for
    the smooth off-diagonal objective).
    """
    pts = [(t1, t2), (t1 + span, t2), (t1, t2 + span)]
    vals = [objective(*p) for p in pts]
    for _ in range(sweeps):
        order = sorted(range(3), key=vals.__getitem__)
        pts = [pts[k] for k in order]
        vals = [vals[k] for k in order]
        if vals[2] - vals[0] < 1e-11:
            break
        (bx, by), (mx, my), (wx, wy) = pts
        cx, cy = 0.5 * (bx + mx), 0.5 * (by + my)
        rx, ry = 2 * cx - wx, 2 * cy - wy
        fr = objective(rx, ry)
        if fr < vals[0]:
            ex, ey = cx + 2 * (rx - cx), cy + 2 * (ry - cy)
            fe = objective(ex, ey)
            if fe < fr:
                pts[2], vals[2] = (ex, ey), fe
            else:
                pts[2], vals[2] = (rx, ry), fr
        elif fr < vals[1]:
            pts[2], vals[2] = (rx, ry), fr
        else:
            if fr < vals[2]:
                pts[2], vals[2] = (rx, ry), fr
            kx, ky = cx + 0.5 * (pts[2][0] - cx), cy + 0.5 * (pts[2][1] - cy)
            fk = objective(kx, ky)
            if fk < vals[2]:
                pts[2], vals[2] = (kx, ky), fk
            else:
                pts[1] = (0.5 * (pts[1][0] + bx), 0.5 * (pts[1][1] + by))
                vals[1] = objective(*pts[1])
                pts[2] = (0.5 * (pts[2][0] + bx), 0.5 * (pts[2][1] + by))
                vals[2] = objective(*pts[2])
    return min(vals)


_COARSE_N = 64
_COARSE_THETAS = np.linspace(0.0, 2 * math.pi, _COARSE_N, endpoint=False)
_COARSE_DIRS = np.stack([np.cos(_COARSE_THETAS), np.sin(_COARSE_THETAS)], axis=-1)
_COARSE_ANG = np.linalg.norm(
    _COARSE_DIRS[:, None, :] - _COARSE_DIRS[None, :, :], axis=-1
)


def _euclidean_pair_objective(g: Circle, h: Circle, window: Window):
    """Scalar-float objective for the Euclidean fast path."""
    x1x, x1y = g.center
    x2x, x2y = h.center
    r1, r2 = g.radius, h.radius
    wcx, wcy = window.center
    wr = window.radius

    def f(t1, t2):
        c1, s1 = math.cos(t1), math.sin(t1)
        c2, s2 = math.cos(t2), math.sin(t2)
        y1x, y1y = x1x + r1 * c1, x1y + r1 * s1
        y2x, y2y = x2x + r2 * c2, x2y + r2 * s2
        val = math.hypot(y1x - y2x, y1y - y2y) + math.hypot(c1 - c2, s1 - s2)
        # hinge penalty keeps the minimizer inside the closed window
        over = max(0.0, math.hypot(y1x - wcx, y1y - wcy) - wr) + max(
            0.0, math.hypot(y2x - wcx, y2y - wcy) - wr
        )
        return val + 100.0 * over

    return f


def delta(g: Circle, h: Circle, window: Window, resolution: float | None = None) -> float:
    """Window-restricted tangency pseudo-distance between two curves.

    Coarse minimization over sampled point pairs followed by local descent
    in the two polar parameters (simplex edge at the coarse spacing, 1e-11
    convergence), constrained to the window by a hinge penalty.  Returns
    ``math.inf`` when either curve misses the closed window.
    """
    if resolution is not None and resolution <= 0:
        raise ValueError("resolution must be positive")
    # symmetric by construction: canonicalize the argument order
    ka = (g.center[0], g.center[1], g.radius)
    kb = (h.center[0], h.center[1], h.radius)
    if kb < ka:
        g, h = h, g
    euclidean = g.phi.kind == "euclidean" and h.phi.kind == "euclidean"
    if euclidean and resolution is None:
        thetas = _COARSE_THETAS
        y1 = g.center_arr + g.radius * _COARSE_DIRS
        y2 = h.center_arr + h.radius * _COARSE_DIRS
        ang = _COARSE_ANG
    else:
        step = resolution if resolution is not None else 0.05
        n = max(32, int(math.ceil(2 * math.pi / step)))
        thetas = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        y1 = g.point_at(thetas)
        y2 = h.point_at(thetas)
        n1 = unit_grad_y(g.phi, g.center_arr, y1)
        n2 = unit_grad_y(h.phi, h.center_arr, y2)
        ang = np.linalg.norm(n1[:, None, :] - n2[None, :, :], axis=-1)
    n = len(thetas)
    inside1 = window.contains(y1, tol=2 * math.pi * g.radius / n)
    inside2 = window.contains(y2, tol=2 * math.pi * h.radius / n)
    if not (np.any(inside1) and np.any(inside2)):
        return math.inf
    pos = np.linalg.norm(y1[:, None, :] - y2[None, :, :], axis=-1)
    obj = pos + ang
    obj[~inside1, :] = np.inf
    obj[:, ~inside2] = np.inf

    # descend from each distinct coarse basin near the global coarse minimum
    order = np.argsort(obj, axis=None)[:10]
    cutoff = float(obj.flat[order[0]]) + 0.08
    starts: list[tuple[int, int]] = []
    for k in order:
        if obj.flat[k] > cutoff:
            break
        i, j = np.unravel_index(k, obj.shape)
        if all(
            min(abs(i - a), n - abs(i - a)) + min(abs(j - b), n - abs(j - b)) > 3
            for a, b in starts
        ):
            starts.append((int(i), int(j)))
        if len(starts) >= 3:
            break

    if euclidean:
        objective = _euclidean_pair_objective(g, h, window)
    else:
        wc = np.asarray(window.center)

        def objective(t1, t2):
            val = float(_delta_objective(g, h, t1, t2))
            p1 = g.point_at(np.asarray(t1))
            p2 = h.point_at(np.asarray(t2))
            over = max(0.0, float(np.linalg.norm(p1 - wc)) - window.radius) + max(
                0.0, float(np.linalg.norm(p2 - wc)) - window.radius
            )
            return val + 100.0 * over

    best = float(obj.flat[order[0]])
    span = 2 * math.pi / n
    for i, j in starts:
        best = min(best, _descend(objective, float(thetas[i]), float(thetas[j]), span))
    return max(best, 0.0)


def delta_pairs_euclidean(
    centers_a: np.ndarray, radii_a: np.ndarray, centers_b: np.ndarray, radii_b: np.ndarray
) -> np.ndarray:
    """Closed-form full-plane pseudo-distance for all Euclidean cross pairs."""
    dc = np.linalg.norm(centers_a[:, None, :] - centers_b[None, :, :], axis=-1)
    dr = np.abs(radii_a[:, None] - radii_b[None, :])
    return np.abs(dc - dr)


def perturbation_slack(phi: DefiningFunction) -> float:
    """Bound on how far the closed form can drift under the perturbation.

    The curve and its unit normal move by at most a multiple of the
    perturbation's C1 size, so the Euclidean closed form minus this slack is
    a valid candidate prefilter for near-tangency searches.
    """
    if phi.kind == "euclidean":
        return 0.0
    return 6.0 * phi.c3_bound


def parallel_normal_point(
    g: Circle,
    x_other,
    window: Window,
    resolution: float = 1e-3,
    companion_radius: float | None = None,
    hypothesis_ratio: float = 0.25,
) -> np.ndarray:
    """The unique curve point whose normal is parallel to the other pencil ray.

    Locates the sign change of the wedge of the two y-gradients along the
    sampled curve and refines it by bisection.  When ``companion_radius`` is
    supplied, the quantitative hypothesis (pseudo-distance small next to the
    center separation) is checked first.
    """
    x_other = np.asarray(x_other, dtype=float)
    sep = float(np.linalg.norm(g.center_arr - x_other))
    if sep < 10 * SINGULAR_RADIUS:
        raise SingularityError("centers coincide")
    if companion_radius is not None:
        other = Circle(tuple(x_other), companion_radius, g.phi)
        dval = delta(g, other, window.shrunk(1))
        if not dval <= hypothesis_ratio * sep:
            raise HypothesisError(
                f"pseudo-distance {dval:.3g} not small next to separation {sep:.3g}"
            )
    sample = sample_curve(g, window, step=resolution)

    def wedge_at(theta):
        y = g.point_at(np.asarray(theta))
        g1 = grad_y(g.phi, g.center_arr, y)
        g2 = grad_y(g.phi, x_other, y)
        return g1[..., 0] * g2[..., 1] - g1[..., 1] * g2[..., 0]

    w = wedge_at(sample.thetas)
    roots = []
    boundaries = set(sample.breaks)
    for k in range(len(w) - 1):
        if k + 1 in boundaries:
            continue
        if w[k] == 0.0:
            roots.append(sample.thetas[k])
        elif w[k] * w[k + 1] < 0:
            a, b = sample.thetas[k], sample.thetas[k + 1]
            if b < a:
                b += 2 * math.pi
            fa = w[k]
            for _ in range(60):
                m = 0.5 * (a + b)
                fm = float(wedge_at(m))
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    if not roots:
        raise EmptyCurveError("no parallel-normal point inside the window")
    pts = [g.point_at(np.asarray(t)) for t in roots]
    uniq = [pts[0]]
    for p in pts[1:]:
        if all(np.linalg.norm(p - q) > 4 * resolution for q in uniq):
            uniq.append(p)
    if len(uniq) > 1:
        raise NonUniqueRootError(f"{len(uniq)} parallel-normal points found")
    return uniq[0]


def annulus_overlap_area(
    g: Circle,
    h: Circle,
    delta_width: float,
    window: Window,
    n_samples: int = 20000,
    rng: np.random.Generator | None = None,
):
    """Monte Carlo area of the two thickened curves' intersection in the window.

    Returns (estimate, standard_error).
    """
    if delta_width <= 0:
        raise ValueError("thickness must be positive")
    if n_samples < 10**4:
        raise ValueError("at least 1e4 samples required")
    if rng is None:
        rng = np.random.default_rng(0)
    pts = window.sample_uniform(n_samples, rng)
    hits = g.membership(pts, delta_width) & h.membership(pts, delta_width)
    p = float(np.mean(hits))
    est = window.area * p
    se = window.area * math.sqrt(max(p * (1 - p), 1.0 / n_samples)) / math.sqrt(n_samples)
    return est, se


def overlap_diameter(g: Circle, h: Circle, delta_width: float, window: Window, grid_step: float | None = None) -> float:
    """Diameter of the overlap of the thickened curves on a membership grid."""
    if grid_step is None:
        grid_step = max(delta_width / 2.0, window.radius / 600.0)
    c = np.asarray(window.center)
    r = window.radius
    xs = np.arange(c[0] - r, c[0] + r + grid_step, grid_step)
    ys = np.arange(c[1] - r, c[1] + r + grid_step, grid_step)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    pts = pts[np.linalg.norm(pts - c, axis=-1) <= r]
    mask = g.membership(pts, delta_width) & h.membership(pts, delta_width)
    hits = pts[mask]
    if len(hits) == 0:
        return 0.0
    if len(hits) > 2000:
        from scipy.spatial import ConvexHull

        try:
            hits = hits[ConvexHull(hits).vertices]
        except Exception:
            hits = hits[:: max(1, len(hits) // 2000)]
    d = np.linalg.norm(hits[:, None, :] - hits[None, :, :], axis=-1)
    return float(np.max(d))


# ---------------------------------------------------------------------------
# two-focus conic level sets


def _marching_segments(fvals: np.ndarray, xs: np.ndarray, ys: np.ndarray):
    """Zero-crossing segments of a scalar grid, one segment per square.

    Cells with a sign change on some edge are located vectorized; only those
    are walked in Python.
    """
    f = np.where(fvals == 0.0, 1e-300, fvals)
    sgn = np.sign(f)
    active = (
        (sgn[:-1, :-1] != sgn[1:, :-1])
        | (sgn[1:, :-1] != sgn[1:, 1:])
        | (sgn[1:, 1:] != sgn[:-1, 1:])
        | (sgn[:-1, 1:] != sgn[:-1, :-1])
    )
    segs = []
    for i, j in zip(*np.nonzero(active)):
        corners = (
            (f[i, j], xs[i], ys[j]),
            (f[i + 1, j], xs[i + 1], ys[j]),
            (f[i + 1, j + 1], xs[i + 1], ys[j + 1]),
            (f[i, j + 1], xs[i], ys[j + 1]),
        )
        pts = []
        for k in range(4):
            f1, px, py = corners[k]
            f2, qx, qy = corners[(k + 1) % 4]
            if f1 * f2 < 0:
                t = f1 / (f1 - f2)
                pts.append((px + t * (qx - px), py + t * (qy - py)))
        if len(pts) >= 2:
            segs.append((pts[0], pts[1]))
            if len(pts) == 4:
                segs.append((pts[2], pts[3]))
    return segs


def _chain_segments(segs, tol):
    """Stitch marching segments into ordered polylines."""
    from collections import defaultdict

    def key(p):
        return (round(p[0] / tol), round(p[1] / tol))

    adj = defaultdict(list)
    for a, b in segs:
        adj[key(a)].append((a, b))
        adj[key(b)].append((b, a))
    unused = set(range(len(segs)))
    seg_of = {}
    for idx, (a, b) in enumerate(segs):
        seg_of[(key(a), key(b))] = idx
        seg_of[(key(b), key(a))] = idx
    chains = []
    while unused:
        idx = next(iter(unused))
        unused.discard(idx)
        a, b = segs[idx]
        chain = [a, b]
        # extend forward then backward
        for forward in (True, False):
            while True:
                end = chain[-1] if forward else chain[0]
                found = None
                for p, q in adj[key(end)]:
                    j = seg_of.get((key(p), key(q)))
                    if j in unused:
                        found = q
                        unused.discard(j)
                        break
                if found is None:
                    break
                if forward:
                    chain.append(found)
                else:
                    chain.insert(0, found)
        chains.append(np.asarray(chain))
    return chains


def phi_conic(
    phi: DefiningFunction,
    x,
    x_other,
    omega: int,
    level: float,
    window: Window,
    resolution: int = 200,
) -> CurveSample:
    """Level set {y : phi(x, y) + omega * phi(x_other, y) = level} in a window.

    Extracted by marching squares.  Degenerate sum-type levels (level equal
    to the focal distance) are returned as the focal segment with the
    ``degenerate`` flag set.
    """
    x = np.asarray(x, dtype=float)
    x_other = np.asarray(x_other, dtype=float)
    focal = float(np.linalg.norm(x - x_other))
    if focal < 10 * SINGULAR_RADIUS:
        raise ValueError("foci coincide")
    if phi.kind == "euclidean":
        if omega == +1 and abs(level - focal) <= 1e-12:
            ts = np.linspace(0.0, 1.0, resolution)
            pts = x[None, :] + ts[:, None] * (x_other - x)[None, :]
            keep = window.contains(pts)
            return CurveSample(
                points=pts[keep], thetas=ts[keep], step=focal / resolution, degenerate=True
            )
        if omega == +1 and level < focal:
            return CurveSample(points=np.empty((0, 2)), thetas=np.empty(0), step=0.0)
        if omega == -1 and abs(level) >= focal:
            return CurveSample(points=np.empty((0, 2)), thetas=np.empty(0), step=0.0)

    c = np.asarray(window.center)
    r = window.radius
    xs = np.linspace(c[0] - r, c[0] + r, resolution)
    ys = np.linspace(c[1] - r, c[1] + r, resolution)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx, gy], axis=-1)
    f = eval_phi_many(phi, x, pts) + omega * eval_phi_many(phi, x_other, pts) - level
    segs = _marching_segments(f, xs, ys)
    cell = 2 * r / (resolution - 1)
    if not segs:
        return CurveSample(points=np.empty((0, 2)), thetas=np.empty(0), step=cell)
    chains = _chain_segments(segs, tol=cell * 1e-3)
    points = []
    breaks = []
    for chain in chains:
        keep = window.contains(chain)
        runs = np.nonzero(keep)[0]
        if len(runs) < 2:
            continue
        sub = chain[runs]
        if points:
            breaks.append(len(points))
        points.extend(sub)
    if not points:
        return CurveSample(points=np.empty((0, 2)), thetas=np.empty(0), step=cell)
    pts_arr = np.asarray(points)
    return CurveSample(points=pts_arr, thetas=np.arange(len(pts_arr), dtype=float), step=cell, breaks=breaks)


def _segment_intersections(poly_a: np.ndarray, poly_b: np.ndarray) -> list:
    """All proper crossings between two polylines."""
    out = []
    a0 = poly_a[:-1]
    a1 = poly_a[1:]
    b0 = poly_b[:-1]
    b1 = poly_b[1:]
    da = a1 - a0
    db = b1 - b0
    # bounding-box prefilter
    a_lo = np.minimum(a0, a1)
    a_hi = np.maximum(a0, a1)
    b_lo = np.minimum(b0, b1)
    b_hi = np.maximum(b0, b1)
    ok = (
        (a_lo[:, None, 0] <= b_hi[None, :, 0])
        & (b_lo[None, :, 0] <= a_hi[:, None, 0])
        & (a_lo[:, None, 1] <= b_hi[None, :, 1])
        & (b_lo[None, :, 1] <= a_hi[:, None, 1])
    )
    ii, jj = np.nonzero(ok)
    for i, j in zip(ii, jj):
        r = da[i]
        s = db[j]
        denom = r[0] * s[1] - r[1] * s[0]
        if abs(denom) < 1e-15:
            continue
        q = b0[j] - a0[i]
        t = (q[0] * s[1] - q[1] * s[0]) / denom
        u = (q[0] * r[1] - q[1] * r[0]) / denom
        if -1e-9 <= t <= 1 + 1e-9 and -1e-9 <= u <= 1 + 1e-9:
            out.append(a0[i] + t * r)
    return out


def _cluster_points(points: np.ndarray, tol: float) -> int:
    """Number of single-linkage clusters at the given radius."""
    n = len(points)
    if n == 0:
        return 0
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(points[i] - points[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    return len({find(i) for i in range(n)})


@dataclass(frozen=True)
class ConicCrossings:
    count: int
    non_transversal: bool = False


def conic_intersection_count(curve_a: CurveSample, curve_b: CurveSample, tol: float) -> ConicCrossings:
    """Count transversal crossing clusters between two extracted level sets."""
    if curve_a.is_empty or curve_b.is_empty:
        raise ValueError("both curves must be nonempty")
    # coincident curves: a large fraction of one inside tol of the other
    sub = curve_a.points[:: max(1, len(curve_a.points) // 200)]
    d = np.linalg.norm(sub[:, None, :] - curve_b.points[None, :, :], axis=-1).min(axis=1)
    if float(np.mean(d < tol)) > 0.9:
        return ConicCrossings(count=0, non_transversal=True)
    hits = []
    for pa in curve_a.segments():
        for pb in curve_b.segments():
            hits.extend(_segment_intersections(pa, pb))
    if not hits:
        return ConicCrossings(count=0)
    return ConicCrossings(count=_cluster_points(np.asarray(hits), tol))


def euclidean_conic_coeffs(x, x_other, level: float) -> np.ndarray:
    """Implicit quadric for a Euclidean two-focus level set.

    Squaring the defining relation twice yields a genuine conic: with the
    linear form L(y) = |y-a|^2 - |y-c|^2, the curve satisfies
    (L - level^2)^2 = 4 level^2 |y-c|^2.  Coefficients are returned for the
    monomials (1, y1, y2, y1^2, y1*y2, y2^2).
    """
    a = np.asarray(x, dtype=float)
    c = np.asarray(x_other, dtype=float)
    r2 = level * level
    # L(y) = 2 y . (c - a) + |a|^2 - |c|^2
    l1 = 2 * (c - a)
    l0 = float(a @ a - c @ c)
    # (L + l0') with constant shifted by -r^2
    k0 = l0 - r2
    # (l1.y + k0)^2 - 4 r^2 (|y|^2 - 2 c.y + |c|^2)
    out = np.zeros(6)
    out[0] = k0 * k0 - 4 * r2 * float(c @ c)
    out[1] = 2 * k0 * l1[0] + 8 * r2 * c[0]
    out[2] = 2 * k0 * l1[1] + 8 * r2 * c[1]
    out[3] = l1[0] ** 2 - 4 * r2
    out[4] = 2 * l1[0] * l1[1]
    out[5] = l1[1] ** 2 - 4 * r2
    return out


def _conic_as_poly_in_y2(coeffs: np.ndarray):
    """View a conic as a quadratic in y2 with y1-polynomial coefficients."""
    c0, c1, c2, c11, c12, c22 = coeffs
    # a2(y1) y2^2 + a1(y1) y2 + a0(y1); each a_k as numpy poly coeffs (high->low)
    a2 = np.array([c22])
    a1 = np.array([c12, c2])
    a0 = np.array([c11, c1, c0])
    return a0, a1, a2


def conic_pair_intersections_oracle(
    x1, xo1, w1, r1, x2, xo2, w2, r2, window: Window, tol: float = 1e-7
) -> np.ndarray:
    """Exact-algebra crossing points of two Euclidean two-focus level sets.

    Eliminates y2 through the Sylvester resultant of the two implicit
    quadrics, then filters candidate roots against the original unsquared
    relations and the window.
    """
    qa = euclidean_conic_coeffs(x1, xo1, r1)
    qb = euclidean_conic_coeffs(x2, xo2, r2)
    a0, a1, a2 = _conic_as_poly_in_y2(qa)
    b0, b1, b2 = _conic_as_poly_in_y2(qb)

    def pm(p, q):
        return np.polymul(p, q)

    def ps(*ps_):
        out = np.zeros(1)
        for p in ps_:
            out = np.polyadd(out, p)
        return out

    # Sylvester determinant of two quadratics in y2:
    # | a2 a1 a0  0 |
    # |  0 a2 a1 a0 |
    # | b2 b1 b0  0 |
    # |  0 b2 b1 b0 |
    # expands to (a2 b0 - a0 b2)^2 - (a2 b1 - a1 b2)(a1 b0 - a0 b1)
    t1 = ps(pm(a2, b0), -pm(a0, b2))
    t2 = ps(pm(a2, b1), -pm(a1, b2))
    t3 = ps(pm(a1, b0), -pm(a0, b1))
    res = ps(pm(t1, t1), -pm(t2, t3))
    res = np.trim_zeros(res, "f")
    if len(res) <= 1:
        return np.empty((0, 2))
    roots = np.roots(res)
    cands = []
    for root in roots:
        if abs(root.imag) > 1e-7:
            continue
        y1 = float(root.real)
        cb2 = np.polyval(b2, y1)
        cb1 = np.polyval(b1, y1)
        cb0 = np.polyval(b0, y1)
        if abs(cb2) < 1e-12:
            if abs(cb1) < 1e-12:
                continue
            y2s = [-cb0 / cb1]
        else:
            disc = cb1 * cb1 - 4 * cb2 * cb0
            if disc < -1e-9:
                continue
            disc = max(disc, 0.0)
            y2s = [(-cb1 + math.sqrt(disc)) / (2 * cb2), (-cb1 - math.sqrt(disc)) / (2 * cb2)]
        for y2 in y2s:
            cands.append((y1, y2))
    out = []
    for y1, y2 in cands:
        p = np.array([y1, y2])
        if not window.contains(p):
            continue
        v1 = np.linalg.norm(p - np.asarray(x1)) + w1 * np.linalg.norm(p - np.asarray(xo1)) - r1
        v2 = np.linalg.norm(p - np.asarray(x2)) + w2 * np.linalg.norm(p - np.asarray(xo2)) - r2
        if abs(v1) < 1e-6 and abs(v2) < 1e-6:
            if all(np.linalg.norm(p - q) > tol for q in out):
                out.append(p)
    return np.asarray(out) if out else np.empty((0, 2))
