"""Shared generators and independent oracles for the test suite."""

import numpy as np

from moebiusgeo import QuadrantCurve, HalfplaneCurve


def convex_hull_ccw(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices in ccw order."""
    pts = sorted(map(tuple, points))
    if len(pts) <= 2:
        return np.array(pts)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1])


def _arc_between(hull: np.ndarray, start: np.ndarray, end: np.ndarray) -> np.ndarray:
    """Vertices from start to end following the ccw hull order."""
    idx_start = int(np.argmin(np.linalg.norm(hull - start, axis=1)))
    rolled = np.roll(hull, -idx_start, axis=0)
    idx_end = int(np.argmin(np.linalg.norm(rolled - end, axis=1)))
    return rolled[: idx_end + 1]


def _densify(arc: np.ndarray, per_edge: int) -> np.ndarray:
    if per_edge <= 0:
        return arc
    out = [arc[0]]
    for a, b in zip(arc[:-1], arc[1:]):
        for k in range(1, per_edge + 1):
            out.append(a + (b - a) * k / (per_edge + 1))
        out.append(b)
    return np.array(out)


def random_quadrant_curve(rng, R=1.0, n_interior=8, per_edge=0) -> QuadrantCurve:
    """A random valid segment curve: the outer hull arc of wedge points."""
    pts = []
    while len(pts) < n_interior:
        x, y = rng.uniform(0.0, 1.6 * R, 2)
        if x + y >= R * 1.001 and abs(x - y) <= R * 0.999 and min(x, y) > 1e-3 * R:
            pts.append((x, y))
    cloud = np.vstack([[R, 0.0], [0.0, R], pts])
    hull = convex_hull_ccw(cloud)
    arc = _arc_between(hull, np.array([R, 0.0]), np.array([0.0, R]))
    return QuadrantCurve(R, _densify(arc, per_edge))


def random_halfplane_curve(rng, R=1.0, n_interior=10, per_edge=0) -> HalfplaneCurve:
    """A random valid circle curve through an apex sample at (0, R)."""
    pts = []
    while len(pts) < n_interior:
        x = rng.uniform(-0.999 * R, 0.999 * R)
        y = rng.uniform(0.05 * R, 0.95 * R)
        pts.append((x, y))
    cloud = np.vstack([[R, 0.0], [-R, 0.0], [0.0, R], pts])
    hull = convex_hull_ccw(cloud)
    arc = _arc_between(hull, np.array([R, 0.0]), np.array([-R, 0.0]))
    return HalfplaneCurve(R, _densify(arc, per_edge))


def apex_index(curve: HalfplaneCurve) -> int:
    """Index of the sample at (0, R)."""
    k = int(np.argmin(np.abs(curve.samples[:, 0])))
    assert abs(curve.samples[k, 0]) < 1e-9 * curve.R
    assert abs(curve.samples[k, 1] - curve.R) < 1e-9 * curve.R
    return k


def ptolemy_equality_residuals(D: np.ndarray, quads: np.ndarray):
    """Relative residual of d13 d24 = d12 d34 + d14 d23 per ordered row.

    Independent of the cross-ratio machinery: raw products only.
    """
    i, j, k, l = quads.T
    lhs = D[i, k] * D[j, l]
    rhs = D[i, j] * D[k, l] + D[i, l] * D[j, k]
    scale = np.maximum(np.maximum(lhs, rhs), 1e-300)
    return np.abs(lhs - rhs) / scale


def ordered_quads(n: int) -> np.ndarray:
    import itertools
    return np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), 4)),
        dtype=np.int64,
    ).reshape(-1, 4)


def chord_metric_oracle(radius: float, theta1, theta2):
    """Chord length between two angles on a circle of the given radius."""
    return 2.0 * radius * np.abs(np.sin((np.asarray(theta2) - np.asarray(theta1)) / 2.0))


def brute_force_line_embedding(D: np.ndarray, tol: float):
    """Search all sign patterns for coordinates realizing D, or None."""
    import itertools
    n = len(D)
    for signs in itertools.product((1.0, -1.0), repeat=n - 1):
        coords = np.array([0.0] + [s * D[0, i + 1] for i, s in enumerate(signs)])
        if np.abs(np.abs(coords[:, None] - coords[None, :]) - D).max() <= tol:
            return coords
    return None
