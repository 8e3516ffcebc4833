"""Discretized spaces of homogeneous type.

A space is a finite weighted point cloud carrying a quasi-metric: the
computational stand-in for (X, d, mu). Concrete models are uniform grids
on boxes (Euclidean), lattices on the Heisenberg group with the gauge
metric, and quasi-uniform clouds on odd spheres with the nonisotropic
metric |1 - <z,w>|^(1/2). A measure-distance normalization produces
spaces whose balls satisfy mu(B(x,r)) ~ r^gamma.

All operations are pure functions of immutable inputs; reductions run in
deterministic index order so repeated runs reproduce bit for bit.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BudgetExceededError,
    DuplicatePointError,
    FormatError,
    KindMismatchError,
    ResolutionError,
)

EUCLIDEAN = "euclidean"
HEISENBERG = "heisenberg"
SPHERE = "sphere"

METRIC_MEASURE = "measure"

DEFAULT_POINT_BUDGET = 20_000
DEFAULT_ENGULFING_C = 2.0

# Below ~this many points, pairwise extremes are computed exactly; above,
# from a strided row sample (the estimates only steer sampling grids).
_EXACT_PAIRWISE_CAP = 6_000
_NORMALIZE_CAP = 8_192

# Smallest trusted ball radius, in units of the minimum interpoint distance.
RESOLVED_FACTOR = 4.0


# ---------------------------------------------------------------------------
# points and pointwise metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Point:
    """A single point of a model space.

    Euclidean(N): coords = N reals. Heisenberg(n): coords = (x, y, t) with
    x, y of length n. Sphere(n): coords = 2n reals (Re z_1, Im z_1, ...)
    encoding a unit vector of C^n.
    """

    kind: str
    coords: np.ndarray
    n: int = 0

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", coords)
        if self.kind == HEISENBERG:
            if coords.shape != (2 * self.n + 1,):
                raise KindMismatchError(
                    f"Heisenberg({self.n}) point needs {2 * self.n + 1} coords, "
                    f"got {coords.shape}")
        elif self.kind == SPHERE:
            if coords.shape != (2 * self.n,):
                raise KindMismatchError(
                    f"Sphere({self.n}) point needs {2 * self.n} coords, "
                    f"got {coords.shape}")
            if abs(float(np.sum(coords ** 2)) - 1.0) > 1e-12:
                raise KindMismatchError("sphere point is not a unit vector")
        elif self.kind == EUCLIDEAN:
            if coords.ndim != 1 or coords.size == 0:
                raise KindMismatchError("Euclidean point needs a flat coord vector")
        else:
            raise KindMismatchError(f"unknown point kind {self.kind!r}")


def _require_heisenberg(p: Point):
    if p.kind != HEISENBERG:
        raise KindMismatchError(f"expected a Heisenberg point, got {p.kind!r}")


def heisenberg_mul(a: Point, b: Point) -> Point:
    """Group product (z,t)(z',t') = (z+z', t+t'+2 Im<z,z'>)."""
    _require_heisenberg(a)
    _require_heisenberg(b)
    if a.n != b.n:
        raise KindMismatchError("Heisenberg points of different n")
    n = a.n
    xa, ya, ta = a.coords[:n], a.coords[n:2 * n], a.coords[2 * n]
    xb, yb, tb = b.coords[:n], b.coords[n:2 * n], b.coords[2 * n]
    # Im<z, z'> with <z,z'> = sum z_j conj(z'_j)
    im = float(np.dot(ya, xb) - np.dot(xa, yb))
    coords = np.concatenate([xa + xb, ya + yb, [ta + tb + 2.0 * im]])
    return Point(HEISENBERG, coords, n)


def heisenberg_inverse(g: Point) -> Point:
    _require_heisenberg(g)
    return Point(HEISENBERG, -g.coords, g.n)


def heisenberg_norm(g: Point) -> float:
    """Gauge norm ||(x,y,t)|| = (t^2 + (|x|^2+|y|^2)^2)^(1/4)."""
    _require_heisenberg(g)
    n = g.n
    sq = float(np.sum(g.coords[:2 * n] ** 2))
    t = float(g.coords[2 * n])
    return (t * t + sq * sq) ** 0.25


def heisenberg_dilate(c: float, g: Point) -> Point:
    _require_heisenberg(g)
    coords = g.coords.copy()
    coords[:2 * g.n] *= c
    coords[2 * g.n] *= c * c
    return Point(HEISENBERG, coords, g.n)


def _heis_gauge_rows(coords: np.ndarray, n: int, i: int) -> np.ndarray:
    """Symmetrized gauge distance from point i to every row of coords."""
    x = coords[:, :2 * n]
    t = coords[:, 2 * n]
    xi = coords[i, :2 * n]
    ti = coords[i, 2 * n]
    dx = xi[None, :] - x
    sq = np.sum(dx * dx, axis=1)
    # t-component of g_i h^-1: t_i - t - 2 Im<z_i, z>
    im = (coords[i, n:2 * n] @ x[:, :n].T) - (coords[i, :n] @ x[:, n:2 * n].T)
    tc = ti - t - 2.0 * im
    d1 = (tc * tc + sq * sq) ** 0.25
    # h g_i^-1 differs only in the sign of the Im term
    tc2 = t - ti - 2.0 * (-im)
    d2 = (tc2 * tc2 + sq * sq) ** 0.25
    return 0.5 * (d1 + d2)


# ---------------------------------------------------------------------------
# metric descriptor and space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Metric:
    """Quasi-metric descriptor: a base closed-form metric, optionally replaced
    by the measure-distance normalization d_gamma = delta^(1/gamma)."""

    kind: str
    gamma: float | None = None
    base_kind: str | None = None
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class Constants:
    """Structure constants: engulfing c, nominal doubling constant, the
    homogeneity exponent gamma, and the metric smoothness exponent beta.
    Doubling and beta are nominal until re-estimated by doubling_report."""

    c: float
    doubling: float
    gamma: float
    beta: float


@dataclass(frozen=True)
class DiscreteSpace:
    kind: str
    points: np.ndarray          # (N, d) float64
    weights: np.ndarray         # (N,) positive
    metric: Metric
    constants: Constants
    diameter: float
    min_sep: float
    group_n: int = 0            # Heisenberg n or sphere complex dimension
    meta: tuple = ()            # ordered (key, value-string) pairs, for I/O
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        w = np.ascontiguousarray(self.weights, dtype=float)
        if w.ndim != 1 or pts.shape[0] != w.shape[0]:
            raise ValueError("points/weights shape mismatch")
        if not np.all(w > 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be strictly positive and finite")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def total_measure(self) -> float:
        return float(np.sum(self.weights))

    @property
    def resolved_min_radius(self) -> float:
        return RESOLVED_FACTOR * self.min_sep

    def point(self, i: int) -> Point:
        if not 0 <= i < self.n_points:
            raise IndexError(f"point index {i} out of range")
        return Point(self.kind, self.points[i].copy(), self.group_n)

    def fingerprint(self) -> str:
        fp = self._cache.get("fingerprint")
        if fp is None:
            h = hashlib.sha256()
            h.update(self.kind.encode())
            h.update(self.points.tobytes())
            h.update(self.weights.tobytes())
            h.update(self.metric.kind.encode())
            if self.metric.gamma is not None:
                h.update(repr(self.metric.gamma).encode())
            fp = h.hexdigest()
            self._cache["fingerprint"] = fp
        return fp


def _complex_coords(space: DiscreteSpace) -> np.ndarray:
    z = space._cache.get("complex")
    if z is None:
        n = space.group_n
        z = space.points[:, 0:2 * n:2] + 1j * space.points[:, 1:2 * n:2]
        space._cache["complex"] = z
    return z


def _sphere_rows(space: DiscreteSpace, i: int) -> np.ndarray:
    # real-arithmetic evaluation of |1 - <z_i, z>|^(1/2); commutative
    # products keep d(i,j) == d(j,i) bitwise (complex BLAS does not)
    n = space.group_n
    re = space.points[:, 0:2 * n:2]
    im = space.points[:, 1:2 * n:2]
    rr = re @ re[i] + im @ im[i]
    ri = im @ re[i] - re @ im[i]
    return ((1.0 - rr) ** 2 + ri ** 2) ** 0.25


def dist_row(space: DiscreteSpace, i: int) -> np.ndarray:
    """Distances from point i to every point, in index order."""
    m = space.metric
    if m.kind == METRIC_MEASURE:
        return m.matrix[i]
    if m.kind == EUCLIDEAN:
        diff = space.points - space.points[i]
        return np.sqrt(np.sum(diff * diff, axis=1))
    if m.kind == HEISENBERG:
        return _heis_gauge_rows(space.points, space.group_n, i)
    if m.kind == SPHERE:
        return _sphere_rows(space, i)
    raise KindMismatchError(f"unknown metric kind {m.kind!r}")


def quasi_distance(space: DiscreteSpace, i: int, j: int) -> float:
    """d(p_i, p_j) under the space's (possibly normalized) metric."""
    n = space.n_points
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"point index out of range: ({i}, {j})")
    if i == j:
        return 0.0
    return float(dist_row(space, i)[j])


# ---------------------------------------------------------------------------
# balls
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    center_index: int
    center: Point
    radius: float
    member_indices: np.ndarray
    measure: float

    def __post_init__(self):
        idx = np.ascontiguousarray(self.member_indices, dtype=np.intp)
        idx.setflags(write=False)
        object.__setattr__(self, "member_indices", idx)


def ball(space: DiscreteSpace, center_index: int, radius: float) -> Ball:
    """Open ball: members are the stored points with d(center, p) < radius."""
    if radius <= 0:
        raise ValueError("ball radius must be positive")
    row = dist_row(space, center_index)
    members = np.flatnonzero(row < radius)
    measure = float(np.sum(space.weights[members]))
    return Ball(center_index, space.point(center_index), float(radius),
                members, measure)


def ball_measure(space: DiscreteSpace, center_index: int, radius: float) -> float:
    row = dist_row(space, center_index)
    return float(np.sum(space.weights[row < radius]))


def _balls_intersect(a: Ball, b: Ball) -> bool:
    return bool(np.intersect1d(a.member_indices, b.member_indices,
                               assume_unique=True).size)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _check_budget(total: int, budget: int):
    if total > budget:
        raise BudgetExceededError(
            f"construction needs {total} points, budget is {budget}")


def _axis_centers(halfwidth: float, m: int) -> np.ndarray:
    step = 2.0 * halfwidth / m
    return -halfwidth + step * (np.arange(m) + 0.5)


def _grid_points(axes) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.reshape(-1) for g in mesh])


def build_grid_space(dim: int, box_halfwidth: float, points_per_axis: int,
                     budget: int = DEFAULT_POINT_BUDGET) -> DiscreteSpace:
    """Uniform cell-center grid on [-h, h]^dim with Lebesgue cell weights."""
    if dim < 1:
        raise ValueError("dim must be a positive integer")
    if points_per_axis < 3:
        raise ValueError("points_per_axis must be at least 3")
    if box_halfwidth <= 0:
        raise ValueError("box_halfwidth must be positive")
    total = points_per_axis ** dim
    _check_budget(total, budget)
    h = float(box_halfwidth)
    m = int(points_per_axis)
    axes = [_axis_centers(h, m)] * dim
    pts = _grid_points(axes)
    step = 2.0 * h / m
    weights = np.full(total, step ** dim)
    diameter = step * (m - 1) * math.sqrt(dim)
    constants = Constants(c=DEFAULT_ENGULFING_C, doubling=2.0 ** dim,
                          gamma=float(dim), beta=1.0)
    meta = (("builder", "grid"), ("dim", str(dim)),
            ("box_halfwidth", repr(h)), ("points_per_axis", str(m)))
    return DiscreteSpace(EUCLIDEAN, pts, weights, Metric(EUCLIDEAN), constants,
                         diameter=diameter, min_sep=step, meta=meta)


def build_heisenberg_space(n: int, extent: float, points_per_axis: int,
                           budget: int = DEFAULT_POINT_BUDGET) -> DiscreteSpace:
    """Lattice on [-e, e]^(2n) x [-e^2, e^2] with the symmetrized gauge metric.

    Haar measure is Lebesgue measure on R^(2n+1); weights are cell volumes.
    gamma = 2(n+1), the homogeneous dimension.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if points_per_axis < 3:
        raise ValueError("points_per_axis must be at least 3")
    m = int(points_per_axis)
    total = m ** (2 * n + 1)
    _check_budget(total, budget)
    e = float(extent)
    xy_axis = _axis_centers(e, m)
    t_axis = _axis_centers(e * e, m)
    pts = _grid_points([xy_axis] * (2 * n) + [t_axis])
    xy_step = 2.0 * e / m
    t_step = 2.0 * e * e / m
    weights = np.full(total, xy_step ** (2 * n) * t_step)
    gamma = 2.0 * (n + 1)
    constants = Constants(c=DEFAULT_ENGULFING_C, doubling=2.0 ** gamma,
                          gamma=gamma, beta=0.5)
    meta = (("builder", "heisenberg"), ("n", str(n)),
            ("extent", repr(e)), ("points_per_axis", str(m)))
    space = DiscreteSpace(HEISENBERG, pts, weights, Metric(HEISENBERG),
                          constants, diameter=1.0, min_sep=1.0,
                          group_n=n, meta=meta)
    min_sep, diameter = _pairwise_extremes(space)
    return replace(space, min_sep=min_sep, diameter=diameter, _cache={})


def build_sphere_space(n: int, num_points: int, seed: int,
                       budget: int = DEFAULT_POINT_BUDGET) -> DiscreteSpace:
    """Seeded uniform cloud on S^(2n-1) in C^n, metric |1 - <z,w>|^(1/2).

    Equal weights summing to total measure 1. gamma = 2n, the homogeneous
    dimension of the nonisotropic balls.
    """
    if n < 2:
        raise ValueError("sphere spaces need n >= 2")
    if num_points < 100:
        raise ValueError("num_points must be at least 100")
    _check_budget(num_points, budget)
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((num_points, 2 * n))
    norms = np.sqrt(np.sum(raw * raw, axis=1))
    pts = raw / norms[:, None]
    # one exact renormalization pass keeps |sum z^2 - 1| at rounding level
    pts = pts / np.sqrt(np.sum(pts * pts, axis=1))[:, None]
    err = np.abs(np.sum(pts * pts, axis=1) - 1.0)
    if float(err.max()) > 1e-12:
        raise ValueError("sphere point normalization failed")
    weights = np.full(num_points, 1.0 / num_points)
    # nudge one weight by <= 2 ulp so the stored measure sums to 1.0 exactly
    for _ in range(4):
        err = float(np.sum(weights)) - 1.0
        if err == 0.0:
            break
        weights = weights.copy()
        weights[-1] -= err
    gamma = 2.0 * n
    constants = Constants(c=DEFAULT_ENGULFING_C, doubling=2.0 ** gamma,
                          gamma=gamma, beta=0.5)
    meta = (("builder", "sphere"), ("n", str(n)),
            ("num_points", str(num_points)), ("seed", str(seed)))
    space = DiscreteSpace(SPHERE, pts, weights, Metric(SPHERE), constants,
                          diameter=1.0, min_sep=1.0, group_n=n, meta=meta)
    min_sep, diameter = _pairwise_extremes(space)
    return replace(space, min_sep=min_sep, diameter=diameter, _cache={})


def _pairwise_extremes(space: DiscreteSpace) -> tuple[float, float]:
    """(min interpoint distance, diameter); exact for small clouds, from a
    deterministic strided row sample beyond the exact cap."""
    n = space.n_points
    if n <= _EXACT_PAIRWISE_CAP:
        rows = range(n)
    else:
        rows = np.unique(np.linspace(0, n - 1, 512).astype(int))
    lo = math.inf
    hi = 0.0
    for i in rows:
        row = dist_row(space, int(i))
        off = np.delete(row, i)
        lo = min(lo, float(off.min()))
        hi = max(hi, float(off.max()))
    if lo <= 0:
        raise DuplicatePointError("distinct stored points at distance zero")
    return lo, hi


# ---------------------------------------------------------------------------
# measure-distance normalization
# ---------------------------------------------------------------------------

def normalize_metric(space: DiscreteSpace, gamma: float) -> DiscreteSpace:
    """Replace the metric by d_gamma = delta^(1/gamma), where delta(x,y) is
    the larger of the two one-sided ball measures mu(B(x, d(x,y))) and
    mu(B(y, d(x,y))). Balls of the new metric satisfy mu(B(x,r)) ~ r^gamma.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    n = space.n_points
    if n > _NORMALIZE_CAP:
        raise BudgetExceededError(
            f"normalized metric needs a dense {n}x{n} matrix; cap is "
            f"{_NORMALIZE_CAP}")
    w = space.weights
    m = np.empty((n, n))
    for i in range(n):
        row = dist_row(space, i)
        order = np.argsort(row, kind="stable")
        sorted_d = row[order]
        cum = np.concatenate([[0.0], np.cumsum(w[order])])
        # strict ball measure mu(B(x_i, d)) for every target distance d
        m[i] = cum[np.searchsorted(sorted_d, row, side="left")]
        if np.count_nonzero(row == 0.0) > 1:
            raise DuplicatePointError(
                f"point {i} has a duplicate; measure distance degenerates")
    delta = np.maximum(m, m.T)
    np.fill_diagonal(delta, 0.0)
    dmat = delta ** (1.0 / gamma)
    dmat.setflags(write=False)
    base = space.metric.base_kind or space.metric.kind
    metric = Metric(METRIC_MEASURE, gamma=float(gamma), base_kind=base,
                    matrix=dmat)
    off = dmat[~np.eye(n, dtype=bool)]
    constants = replace(space.constants, gamma=float(gamma))
    meta = tuple(kv for kv in space.meta if kv[0] != "normalized_gamma")
    meta += (("normalized_gamma", repr(float(gamma))),)
    return replace(space, metric=metric, constants=constants,
                   min_sep=float(off.min()), diameter=float(off.max()),
                   meta=meta, _cache={})


def tail_measure_bound(space: DiscreteSpace, t: float, s: float,
                       center_indices) -> dict:
    """Summation check of the measure-distance tail bound: for each center,
    sum_{x outside B(x0,t)} mu(B(x,t))^(-s) w(x) <= C * mu(B(x0,t))^(1-s).
    Returns the per-center ratios and their max (the certified constant).
    """
    if s <= 1:
        raise ValueError("the tail bound needs s > 1")
    n = space.n_points
    mb = np.empty(n)
    for i in range(n):
        row = dist_row(space, i)
        mb[i] = float(np.sum(space.weights[row < t]))
    terms = mb ** (-s) * space.weights
    ratios = []
    for x0 in center_indices:
        row = dist_row(space, int(x0))
        outside = row >= t
        total = float(np.sum(terms[outside]))
        rhs = mb[int(x0)] ** (1.0 - s)
        ratios.append(total / rhs)
    ratios = np.asarray(ratios)
    return {"t": t, "s": s, "ratios": ratios, "constant": float(ratios.max())}


# ---------------------------------------------------------------------------
# covering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverResult:
    """Greedy Vitali selection: pairwise-disjoint balls whose 5c-dilates
    cover the input union. Iterates like a list of the selected balls."""

    balls: tuple
    covered: bool
    valence: int
    uncovered_count: int

    def __iter__(self):
        return iter(self.balls)

    def __len__(self):
        return len(self.balls)

    def __getitem__(self, k):
        return self.balls[k]


def vitali_cover(space: DiscreteSpace, balls_in) -> CoverResult:
    """Greedy selection in descending radius order (ties: lower center index).

    A ball is selected iff its member set meets no previously selected ball.
    The 5c-dilates of the selected balls are checked to cover the union of
    the input family; the valence is the max number of dilated balls
    containing any single point.
    """
    balls_list = list(balls_in)
    if not balls_list:
        raise ValueError("vitali_cover needs a nonempty ball family")
    order = sorted(range(len(balls_list)),
                   key=lambda k: (-balls_list[k].radius,
                                  balls_list[k].center_index, k))
    selected = []
    for k in order:
        b = balls_list[k]
        if not any(_balls_intersect(b, s) for s in selected):
            selected.append(b)
    c = space.constants.c
    counts = np.zeros(space.n_points, dtype=int)
    dilated_members = []
    for b in selected:
        d = ball(space, b.center_index, 5.0 * c * b.radius)
        dilated_members.append(d.member_indices)
        counts[d.member_indices] += 1
    union_in = np.unique(np.concatenate([b.member_indices for b in balls_list]))
    union_dil = np.unique(np.concatenate(dilated_members))
    uncovered = np.setdiff1d(union_in, union_dil, assume_unique=True)
    valence = int(counts.max()) if counts.size else 0
    return CoverResult(tuple(selected), covered=(uncovered.size == 0),
                       valence=valence, uncovered_count=int(uncovered.size))


# ---------------------------------------------------------------------------
# sampling grids and structure-constant estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleGrid:
    """Shared radius/center sample used by every sup-over-balls quantity."""

    radii: np.ndarray
    center_indices: np.ndarray

    def __post_init__(self):
        r = np.ascontiguousarray(self.radii, dtype=float)
        c = np.ascontiguousarray(self.center_indices, dtype=np.intp)
        r.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "center_indices", c)


def radius_grid(space: DiscreteSpace, seed: int = 0, jitter: float = 0.08,
                r_max: float | None = None,
                r_min: float | None = None) -> np.ndarray:
    """Dyadic radii diameter*2^-j intersected with the resolved range, with
    a small seeded jitter so radii land off any grid-aligned distances."""
    lo = space.resolved_min_radius if r_min is None else r_min
    hi = space.diameter if r_max is None else r_max
    if hi <= lo:
        raise ResolutionError(
            f"no resolved radii: range [{lo:.3g}, {hi:.3g}] is empty")
    radii = []
    r = hi
    while r >= lo:
        radii.append(r)
        r *= 0.5
    radii = np.asarray(radii[::-1])
    if len(radii) < 3:
        raise ResolutionError("fewer than 3 dyadic radii fit the resolved range")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5ad1]))
    radii = radii * (1.0 + jitter * rng.uniform(-1.0, 1.0, size=radii.shape))
    return np.clip(radii, lo, hi * (1 + jitter))


def sample_centers(space: DiscreteSpace, count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xce17]))
    count = min(count, space.n_points)
    idx = rng.choice(space.n_points, size=count, replace=False)
    return np.sort(idx)


def default_grid(space: DiscreteSpace, num_centers: int = 40, seed: int = 0,
                 r_max: float | None = None) -> SampleGrid:
    return SampleGrid(radius_grid(space, seed=seed, r_max=r_max),
                      sample_centers(space, num_centers, seed=seed))


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    lx = np.log(x)
    ly = np.log(y)
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))


def _measure_profile(space: DiscreteSpace, center: int, radii) -> np.ndarray:
    """mu(B(center, r)) for every r, via one sorted sweep of the row."""
    row = dist_row(space, int(center))
    order = np.argsort(row, kind="stable")
    cum = np.concatenate([[0.0], np.cumsum(space.weights[order])])
    return cum[np.searchsorted(row[order], np.asarray(radii), side="left")]


def growth_fit_window(space: DiscreteSpace) -> tuple[float, float]:
    """Radius window where ball measures follow the growth law: large enough
    that typical balls hold several points, small enough that balls are far
    from swallowing the cloud. Computed from a deterministic strided probe."""
    key = "fit_window"
    if key in space._cache:
        return space._cache[key]
    n = space.n_points
    probes = np.unique(np.linspace(0, n - 1, min(24, n)).astype(int))
    radii = np.geomspace(max(space.min_sep, space.diameter * 1e-4),
                         space.diameter, 48)
    mus = np.vstack([_measure_profile(space, i, radii) for i in probes])
    med = np.median(mus, axis=0)
    wmax = float(np.max(space.weights))
    lo_ok = np.flatnonzero(med >= 5.5 * wmax)
    r_lo = radii[lo_ok[0]] if lo_ok.size else space.resolved_min_radius
    r_lo = max(r_lo, space.resolved_min_radius)
    sat = np.flatnonzero(med >= 0.35 * space.total_measure)
    r_hi = 0.5 * radii[sat[0]] if sat.size else 0.5 * space.diameter
    if r_hi < 2.0 * r_lo:
        r_hi = min(2.0 * r_lo, 0.75 * space.diameter)
    window = (float(r_lo), float(r_hi))
    space._cache[key] = window
    return window


@dataclass(frozen=True)
class DoublingReport:
    doubling_estimate: float     # max sampled mu(B(x,cr))/mu(B(x,r))
    gamma_fit: float             # pooled log-log slope of mu(B(x,r)) vs r
    beta_estimate: float         # fitted metric smoothness exponent in (0,1]
    growth_eps: float            # min over samples of log_c growth per step
    radii: np.ndarray
    center_indices: np.ndarray


def doubling_report(space: DiscreteSpace, sample_count: int,
                    seed: int = 0) -> DoublingReport:
    """Estimate the doubling constant, the ball-growth exponent, the metric
    smoothness exponent, and the lower growth rate, over a seeded grid."""
    if sample_count < 30:
        raise ValueError("sample_count must be at least 30")
    c = space.constants.c
    r_lo, r_hi = growth_fit_window(space)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xd0b1]))
    radii = np.geomspace(r_lo, r_hi, 10)
    radii = radii * (1.0 + 0.05 * rng.uniform(-1, 1, size=radii.shape))
    n_centers = max(10, sample_count // len(radii))
    centers = sample_centers(space, n_centers, seed=seed)

    ratios = []
    log_r = []
    log_mu = []
    growth = []
    wfloor = 4.5 * float(np.max(space.weights))
    for i in centers:
        mu_r = _measure_profile(space, i, radii)
        mu_cr = _measure_profile(space, i, c * radii)
        for r, m1, m2 in zip(radii, mu_r, mu_cr):
            if m1 < wfloor:
                continue
            if c * r <= space.diameter:
                ratios.append(m2 / m1)
            log_r.append(r)
            log_mu.append(m1)
        for j in (1, 2, 3):
            rj = (c ** j) * radii
            keep = rj <= 0.75 * space.diameter
            if not np.any(keep):
                continue
            mu_j = _measure_profile(space, i, rj[keep])
            base = mu_r[keep]
            good = base >= wfloor
            for m1, mj in zip(base[good], mu_j[good]):
                if mj > m1 > 0:
                    growth.append(math.log(mj / m1) / (j * math.log(c)))

    gamma_fit = _loglog_slope(np.asarray(log_r), np.asarray(log_mu))
    beta = _beta_estimate(space, centers, seed)
    report = DoublingReport(
        doubling_estimate=float(np.max(ratios)),
        gamma_fit=gamma_fit,
        beta_estimate=beta,
        growth_eps=float(min(growth)) if growth else 0.0,
        radii=radii,
        center_indices=centers,
    )
    return report


def _beta_estimate(space: DiscreteSpace, centers: np.ndarray,
                   seed: int) -> float:
    """Least-squares Hoelder exponent of |d(x,z)-d(y,z)| against d(x,y)
    over sampled triples with x, y inside a common ball around z."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xbe7a]))
    lo = space.resolved_min_radius
    us, vs = [], []
    for z in centers:
        row = dist_row(space, int(z))
        r = space.diameter / 4.0
        inside = np.flatnonzero((row < r) & (row > 0))
        if inside.size < 4:
            continue
        take = min(12, inside.size)
        xs = rng.choice(inside, size=take, replace=False)
        ys = rng.choice(inside, size=take, replace=False)
        for x, y in zip(xs, ys):
            if x == y:
                continue
            u = abs(row[x] - row[y])
            v = quasi_distance(space, int(x), int(y))
            if u > 0 and lo / 4.0 < v < r:
                us.append(u / r)
                vs.append(v / r)
    if len(us) < 10:
        return space.constants.beta
    us = np.asarray(us)
    vs = np.asarray(vs)
    # the definition is a sup bound, so fit the upper envelope: bin by
    # log separation and regress on per-bin maxima
    lv = np.log(vs)
    edges = np.linspace(lv.min(), lv.max() + 1e-12, 9)
    which = np.digitize(lv, edges) - 1
    bx, by = [], []
    for b in range(8):
        mask = which == b
        if np.any(mask):
            bx.append(0.5 * (edges[b] + edges[b + 1]))
            by.append(np.log(us[mask].max()))
    if len(bx) < 3:
        return space.constants.beta
    bx = np.asarray(bx)
    by = np.asarray(by)
    bx0 = bx - bx.mean()
    slope = float(np.dot(bx0, by - by.mean()) / np.dot(bx0, bx0))
    return float(min(max(slope, 1e-3), 1.0))


def engulfing_check(space: DiscreteSpace, sample_count: int = 200,
                    seed: int = 0) -> dict:
    """Sampled check of the engulfing axiom: intersecting B1, B2 with
    r1 >= r2 implies members(B2) within members(B(x1, c*r1))."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xe24f]))
    c = space.constants.c
    r_lo, r_hi = growth_fit_window(space)
    radii = np.geomspace(r_lo, max(min(r_hi, space.diameter / (2 * c)),
                                   2 * r_lo), 6)
    centers = sample_centers(space, max(8, sample_count // len(radii)),
                             seed=seed)
    checked = 0
    violations = 0
    for x1 in centers:
        for r1 in radii:
            b1 = ball(space, int(x1), float(r1))
            x2 = int(rng.choice(b1.member_indices))
            r2 = float(r1 * rng.uniform(0.2, 1.0))
            b2 = ball(space, x2, r2)
            if not _balls_intersect(b1, b2):
                continue
            big = ball(space, int(x1), c * float(r1))
            checked += 1
            if np.setdiff1d(b2.member_indices, big.member_indices,
                            assume_unique=True).size:
                violations += 1
    return {"checked": checked, "violations": violations,
            "pass": violations == 0}


# ---------------------------------------------------------------------------
# serialization: HOTYPE-SPACE v1
# ---------------------------------------------------------------------------

SPACE_HEADER = "HOTYPE-SPACE v1"


def space_to_text(space: DiscreteSpace) -> str:
    lines = [SPACE_HEADER]
    lines.append(f"kind = {space.kind}")
    lines.append(f"group_n = {space.group_n}")
    lines.append(f"metric_kind = {space.metric.kind}")
    if space.metric.kind == METRIC_MEASURE:
        lines.append(f"metric_base = {space.metric.base_kind}")
        lines.append(f"metric_gamma = {space.metric.gamma!r}")
    cst = space.constants
    lines.append(f"c = {cst.c!r}")
    lines.append(f"doubling = {cst.doubling!r}")
    lines.append(f"gamma = {cst.gamma!r}")
    lines.append(f"beta = {cst.beta!r}")
    lines.append(f"diameter = {space.diameter!r}")
    lines.append(f"min_sep = {space.min_sep!r}")
    for key, val in space.meta:
        lines.append(f"meta.{key} = {val}")
    lines.append(f"n_points = {space.n_points}")
    lines.append(f"coord_dim = {space.points.shape[1]}")
    lines.append("points")
    for i in range(space.n_points):
        coords = " ".join(repr(float(v)) for v in space.points[i])
        lines.append(f"{i} {repr(float(space.weights[i]))} {coords}")
    return "\n".join(lines) + "\n"


def save_space(space: DiscreteSpace, path):
    with open(path, "w") as fh:
        fh.write(space_to_text(space))


def space_from_text(text: str) -> DiscreteSpace:
    lines = text.splitlines()
    if not lines or lines[0].strip() != SPACE_HEADER:
        raise FormatError(f"bad header; expected {SPACE_HEADER!r}")
    kv = {}
    meta = []
    i = 1
    while i < len(lines) and lines[i].strip() != "points":
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key.startswith("meta."):
            meta.append((key[5:], val))
        else:
            kv[key] = val
    if i >= len(lines):
        raise FormatError("missing points block")
    n = int(kv["n_points"])
    dim = int(kv["coord_dim"])
    pts = np.empty((n, dim))
    weights = np.empty(n)
    body = lines[i + 1:i + 1 + n]
    if len(body) < n:
        raise FormatError("truncated points block")
    for row in body:
        fields = row.split()
        j = int(fields[0])
        weights[j] = float(fields[1])
        pts[j] = [float(v) for v in fields[2:2 + dim]]
    constants = Constants(c=float(kv["c"]), doubling=float(kv["doubling"]),
                          gamma=float(kv["gamma"]), beta=float(kv["beta"]))
    if kv["metric_kind"] == METRIC_MEASURE:
        base_metric = Metric(kv.get("metric_base") or kv["kind"])
    else:
        base_metric = Metric(kv["metric_kind"])
    space = DiscreteSpace(kv["kind"], pts, weights, base_metric, constants,
                          diameter=float(kv["diameter"]),
                          min_sep=float(kv["min_sep"]),
                          group_n=int(kv["group_n"]), meta=tuple(meta))
    if kv["metric_kind"] == METRIC_MEASURE:
        # recompute the normalized metric; deterministic, so round-trips
        # reproduce distances bit for bit
        space = normalize_metric(space, float(kv["metric_gamma"]))
    return space


def load_space(path) -> DiscreteSpace:
    with open(path) as fh:
        return space_from_text(fh.read())


def space_hash(space: DiscreteSpace) -> str:
    return hashlib.sha256(space_to_text(space).encode()).hexdigest()
