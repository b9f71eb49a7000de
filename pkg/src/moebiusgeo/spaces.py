"""Extended metric spaces, cross-ratio triples, and Ptolemy checks.

An extended metric space is a finite labeled point set with a symmetric
distance matrix.  One point may be designated as the remote point
``omega``: it sits at infinite distance from every other point while the
remaining points carry an ordinary metric.

The cross-ratio triple of an admissible quadruple ``(x, y, z, w)`` is the
projective triple

    ( d(x,y) d(z,w) : d(x,z) d(y,w) : d(x,w) d(y,z) )

normalized onto the standard 2-simplex.  A space is Ptolemy when every
quadruple's triple has entries satisfying the triangle inequality; the
triple sits on the boundary of that region exactly for quadruples of a
metric circle.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

DEFAULT_EPS = 1e-9

# Exhaustive triangle-inequality validation is cubic in the point count;
# above this size a large seeded sample of triples is checked instead.
_FULL_TRIANGLE_LIMIT = 256
_SAMPLED_TRIANGLES = 2_000_000
_TRIANGLE_SAMPLE_SEED = 24251


def _scan_workers() -> int:
    """Worker cap for quadruple scans, from the PTOLEMY_THREADS env var."""
    raw = os.environ.get("PTOLEMY_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class ExtendedMetricSpace:
    """A finite labeled point set with a symmetric extended distance matrix.

    ``dist[i, j]`` is infinite exactly when one of ``i, j`` is the remote
    point ``omega`` and the other is not.  Validation runs eagerly on
    construction: symmetry, zero diagonal, nonnegativity, the infinity
    pattern, and the triangle inequality on the finite part.  Instances
    should be treated as immutable.
    """

    labels: tuple[str, ...]
    dist: np.ndarray
    omega: int | None = None
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        self.labels = tuple(str(x) for x in self.labels)
        n = len(self.labels)
        if n == 0:
            raise ValidationError("a space needs at least one point")
        if len(set(self.labels)) != n:
            raise ValidationError("point labels must be unique")
        D = np.array(self.dist, dtype=float)
        if D.shape != (n, n):
            raise ValidationError(
                f"distance matrix shape {D.shape} does not match {n} labels"
            )
        if np.isnan(D).any():
            raise ValidationError("distance matrix contains NaN")

        finite_mask = np.isfinite(D)
        scale = float(D[finite_mask].max(initial=0.0))
        tol = self.eps * max(scale, 1.0)

        if (D < -tol).any():
            i, j = np.argwhere(D < -tol)[0]
            raise ValidationError(f"negative distance at ({self.labels[i]}, {self.labels[j]})")
        if (np.isfinite(D) != np.isfinite(D.T)).any():
            raise ValidationError("infinity pattern is not symmetric")
        with np.errstate(invalid="ignore"):
            asym = np.abs(D - D.T)
        asym[~(finite_mask & finite_mask.T)] = 0.0
        if asym.max(initial=0.0) > tol:
            raise ValidationError("distance matrix is not symmetric")
        D = np.where(finite_mask, (D + np.where(finite_mask.T, D.T, D)) / 2.0, D)
        np.clip(D, 0.0, None, out=D)

        if np.abs(np.diag(D)).max(initial=0.0) > tol:
            raise ValidationError("diagonal entries must vanish")
        np.fill_diagonal(D, 0.0)

        if self.omega is not None:
            om = int(self.omega)
            if not 0 <= om < n:
                raise ValidationError(f"omega index {om} out of range")
            self.omega = om
            others = [i for i in range(n) if i != om]
            if others and not np.isinf(D[om, others]).all():
                raise ValidationError("omega must be at infinite distance from every other point")
            fin = others
        else:
            fin = list(range(n))
        sub = D[np.ix_(fin, fin)]
        if not np.isfinite(sub).all():
            bad = np.argwhere(~np.isfinite(sub))[0]
            raise ValidationError(
                "infinite distance between finite points "
                f"({self.labels[fin[bad[0]]]}, {self.labels[fin[bad[1]]]})"
            )
        _check_triangle(sub, [self.labels[i] for i in fin], tol)
        self.dist = D

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def finite_indices(self) -> list[int]:
        return [i for i in range(self.n) if i != self.omega]

    @property
    def scale(self) -> float:
        mask = np.isfinite(self.dist)
        return float(self.dist[mask].max(initial=0.0))

    def index(self, point) -> int:
        """Resolve a label or integer index to an index."""
        if isinstance(point, str):
            try:
                return self.labels.index(point)
            except ValueError:
                raise KeyError(f"unknown point label {point!r}") from None
        i = int(point)
        if not 0 <= i < self.n:
            raise KeyError(f"point index {i} out of range")
        return i

    def omega_label(self) -> str | None:
        return None if self.omega is None else self.labels[self.omega]


def _check_triangle(sub: np.ndarray, labels: list[str], tol: float) -> None:
    """Triangle inequality on a finite symmetric matrix, chunked over rows."""
    m = len(labels)
    if m <= 2:
        return
    if m <= _FULL_TRIANGLE_LIMIT:
        block = max(1, (2 ** 22) // (m * m))
        for start in range(0, m, block):
            rows = slice(start, min(start + block, m))
            # through[i, j, k] = d(i, k) + d(k, j)
            through = sub[rows, None, :] + sub.T[None, :, :]
            direct = sub[rows, :, None]
            if (direct > through + tol).any():
                i_, j_, k_ = np.argwhere(direct > through + tol)[0]
                i = start + i_
                raise ValidationError(
                    "triangle inequality fails: "
                    f"d({labels[i]},{labels[j_]}) > d({labels[i]},{labels[k_]}) + d({labels[k_]},{labels[j_]})"
                )
        return
    rng = np.random.default_rng(_TRIANGLE_SAMPLE_SEED)
    idx = rng.integers(0, m, size=(_SAMPLED_TRIANGLES, 3))
    i, j, k = idx.T
    bad = sub[i, j] > sub[i, k] + sub[k, j] + tol
    if bad.any():
        b = int(np.argmax(bad))
        raise ValidationError(
            "triangle inequality fails: "
            f"d({labels[i[b]]},{labels[j[b]]}) > via {labels[k[b]]}"
        )


def space_from_points(points, labels=None, *, p: float = 2.0, add_omega: bool = False,
                      eps: float = DEFAULT_EPS) -> ExtendedMetricSpace:
    """Build a space from coordinate rows under an l^p metric (p=2 or p=1).

    With ``add_omega`` a remote point labeled ``omega`` is appended.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    count = P.shape[0]
    diff = P[:, None, :] - P[None, :, :]
    if p == 2.0:
        D = np.sqrt((diff ** 2).sum(axis=-1))
    elif p == 1.0:
        D = np.abs(diff).sum(axis=-1)
    else:
        raise ValueError("only p=1 and p=2 are supported")
    if labels is None:
        labels = [f"p{i}" for i in range(count)]
    labels = list(labels)
    omega = None
    if add_omega:
        full = np.full((count + 1, count + 1), np.inf)
        full[:count, :count] = D
        full[count, count] = 0.0
        D = full
        labels.append("omega")
        omega = count
    return ExtendedMetricSpace(tuple(labels), D, omega, eps=eps)


@dataclass(frozen=True)
class CrossRatioTriple:
    """A normalized projective triple (a : b : c) with a + b + c = 1."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        e = (self.a, self.b, self.c)
        if min(e) < -1e-12:
            raise ValidationError(f"cross-ratio entries must be nonnegative: {e}")
        if abs(sum(e) - 1.0) > 1e-12:
            raise ValidationError(f"cross-ratio entries must sum to 1: {e}")

    @classmethod
    def from_products(cls, pa: float, pb: float, pc: float) -> "CrossRatioTriple":
        total = pa + pb + pc
        if not math.isfinite(total) or total <= 0.0:
            raise ValidationError("degenerate quadruple: all cross-ratio products vanish")
        return cls(pa / total, pb / total, pc / total)

    @property
    def entries(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])

    def region(self, eps: float = DEFAULT_EPS) -> str:
        """Classify against the triangle-inequality region of the simplex."""
        m = max(self.a, self.b, self.c)
        if m > 0.5 + eps:
            return "outside"
        if m >= 0.5 - eps:
            return "boundary"
        return "interior"

    def deviation(self, other: "CrossRatioTriple") -> float:
        return float(np.abs(self.entries - other.entries).max())


def check_admissible(quad) -> tuple[int, int, int, int]:
    """An admissible quadruple has no entry repeated three or four times."""
    q = tuple(int(i) for i in quad)
    if len(q) != 4:
        raise ValueError("a quadruple needs exactly four points")
    for i in set(q):
        if q.count(i) > 2:
            raise ValueError(f"inadmissible quadruple {q}: point {i} occurs more than twice")
    return q


# For each product slot, the index pairs multiplied together.
_PRODUCT_PAIRS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def crt(space: ExtendedMetricSpace, quad, eps: float | None = None) -> CrossRatioTriple:
    """Cross-ratio triple of a quadruple of point indices or labels.

    The remote point may occur at most twice.  When it occurs once, each
    product drops its infinite factor; when twice, the product pairing the
    two occurrences vanishes and the other two entries are equal.
    """
    q = check_admissible([space.index(x) for x in quad])
    om = space.omega
    D = space.dist
    if om is not None and q.count(om) == 2:
        pos = frozenset(i for i, x in enumerate(q) if x == om)
        prods = [0.0 if frozenset(p1) == pos or frozenset(p2) == pos else 1.0
                 for p1, p2 in _PRODUCT_PAIRS]
        return CrossRatioTriple.from_products(*prods)

    def factor(i, j):
        if q[i] == om or q[j] == om:
            return 1.0
        return D[q[i], q[j]]

    prods = [factor(*p1) * factor(*p2) for p1, p2 in _PRODUCT_PAIRS]
    return CrossRatioTriple.from_products(*prods)


def classify_simplex(triple: CrossRatioTriple, eps: float = DEFAULT_EPS) -> str:
    """Region of a normalized triple: "interior", "boundary", or "outside"."""
    return triple.region(eps)


def _quad_products(D: np.ndarray, omega: int | None, quads: np.ndarray) -> np.ndarray:
    """Products (m, 3) for rows of index quadruples with at most one omega each."""
    q = np.asarray(quads)
    om = -1 if omega is None else omega
    Ds = np.where(np.isfinite(D), D, 1.0)

    def factor(i, j):
        vals = Ds[q[:, i], q[:, j]]
        mask = (q[:, i] == om) | (q[:, j] == om)
        return np.where(mask, 1.0, vals)

    cols = [factor(*p1) * factor(*p2) for p1, p2 in _PRODUCT_PAIRS]
    return np.stack(cols, axis=1)


def _normalized_products(D, omega, quads):
    P = _quad_products(D, omega, quads)
    S = P.sum(axis=1)
    good = S > 0
    N = np.full_like(P, 1.0 / 3.0)
    np.divide(P, S[:, None], out=N, where=good[:, None])
    return N, good


def max_crt_deviation(D1, omega1, D2, omega2, quads, quads2=None) -> tuple[float, int]:
    """Componentwise max deviation of normalized triples over quadruple rows.

    ``quads2`` supplies the rows of indices into the second matrix (e.g.
    mapped through a correspondence); it defaults to ``quads``.  Returns the
    worst deviation and the row index attaining it.  Rows that are
    degenerate on both sides count as deviation 0; rows degenerate on one
    side only count as deviation 1.
    """
    N1, g1 = _normalized_products(D1, omega1, quads)
    N2, g2 = _normalized_products(D2, omega2, quads if quads2 is None else quads2)
    dev = np.abs(N1 - N2).max(axis=1)
    dev[~(g1 & g2)] = 1.0
    dev[~g1 & ~g2] = 0.0
    worst = int(np.argmax(dev)) if len(dev) else 0
    return (float(dev[worst]) if len(dev) else 0.0), worst


@dataclass
class PtolemyReport:
    """Outcome of a full quadruple scan."""

    holds: bool
    worst_quad: tuple[str, ...] | None
    worst_margin: float
    n_checked: int


def _margins(P: np.ndarray) -> np.ndarray:
    S = P.sum(axis=1)
    m = np.full(len(P), -0.5)
    np.divide(P.max(axis=1), S, out=m, where=S > 0)
    return np.where(S > 0, m - 0.5, -0.5)


def _chunked_margins(D, omega, quads) -> np.ndarray:
    workers = _scan_workers()
    if workers <= 1 or len(quads) < 100_000:
        return _margins(_quad_products(D, omega, quads))
    chunks = np.array_split(quads, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda c: _margins(_quad_products(D, omega, c)), chunks))
    return np.concatenate(parts)


def is_ptolemy(space: ExtendedMetricSpace, eps: float = DEFAULT_EPS) -> PtolemyReport:
    """Scan all distinct four-point subsets for the Ptolemy inequality.

    Quadruples with a repeated entry always satisfy the inequality, so only
    distinct subsets are scanned.  Subsets containing the remote point
    reduce to a triangle-inequality check of the remaining triple.
    """
    fin = space.finite_indices
    D = space.dist
    worst_margin = -math.inf
    worst_quad = None
    checked = 0

    if len(fin) >= 4:
        quads = np.fromiter(itertools.chain.from_iterable(itertools.combinations(fin, 4)),
                            dtype=np.int64).reshape(-1, 4)
        margins = _chunked_margins(D, space.omega, quads)
        checked += len(quads)
        k = int(np.argmax(margins))
        if margins[k] > worst_margin:
            worst_margin = float(margins[k])
            worst_quad = tuple(space.labels[i] for i in quads[k])
    if space.omega is not None and len(fin) >= 3:
        trips = np.fromiter(itertools.chain.from_iterable(itertools.combinations(fin, 3)),
                            dtype=np.int64).reshape(-1, 3)
        quads = np.hstack([trips, np.full((len(trips), 1), space.omega, dtype=np.int64)])
        margins = _chunked_margins(D, space.omega, quads)
        checked += len(quads)
        k = int(np.argmax(margins))
        if margins[k] > worst_margin:
            worst_margin = float(margins[k])
            worst_quad = tuple(space.labels[i] for i in quads[k])

    if checked == 0:
        return PtolemyReport(True, None, -0.5, 0)
    return PtolemyReport(worst_margin <= eps, worst_quad, worst_margin, checked)


def is_circle_quadruple(space: ExtendedMetricSpace, quad, eps: float = DEFAULT_EPS) -> bool:
    """True when the quadruple's cross-ratio triple lies on the boundary region."""
    return crt(space, quad).region(eps) == "boundary"


def circle_quadruple_census(space: ExtendedMetricSpace, eps: float = DEFAULT_EPS) -> tuple[int, int]:
    """Count distinct 4-subsets on the boundary region; returns (boundary, total)."""
    fin = space.finite_indices
    subsets = []
    if len(fin) >= 4:
        subsets.extend(itertools.combinations(fin, 4))
    if space.omega is not None and len(fin) >= 3:
        subsets.extend(t + (space.omega,) for t in itertools.combinations(fin, 3))
    if not subsets:
        return 0, 0
    quads = np.array(subsets, dtype=np.int64)
    margins = _chunked_margins(space.dist, space.omega, quads)
    boundary = int(((margins <= eps) & (margins >= -eps)).sum())
    return boundary, len(quads)


def line_embed(space: ExtendedMetricSpace, eps: float = DEFAULT_EPS) -> np.ndarray | None:
    """Coordinates on the real line realizing all distances, if they exist.

    The first point is anchored at 0 and the farthest point from it fixes
    the positive direction; every other coordinate is chosen, up to sign,
    by consistency with the two anchors, then all pairs are verified.
    Returns None when some triple fails triangle equality.
    """
    if space.omega is not None:
        raise ValueError("line embedding requires a space without a remote point")
    D = space.dist
    n = space.n
    coords = np.zeros(n)
    if n == 1:
        return coords
    tol = eps * max(space.scale, 1.0)
    anchor = int(np.argmax(D[0]))
    if D[0, anchor] <= tol:
        return coords if D.max() <= tol else None
    coords[anchor] = D[0, anchor]
    for i in range(1, n):
        if i == anchor:
            continue
        plus, minus = D[0, i], -D[0, i]
        err_plus = abs(abs(plus - coords[anchor]) - D[i, anchor])
        err_minus = abs(abs(minus - coords[anchor]) - D[i, anchor])
        coords[i] = plus if err_plus <= err_minus else minus
    gaps = np.abs(np.abs(coords[:, None] - coords[None, :]) - D)
    if gaps.max() > tol:
        return None
    return coords


def all_triples_collinear(space: ExtendedMetricSpace, eps: float = DEFAULT_EPS) -> bool:
    """True when every triple of finite points attains triangle equality."""
    fin = space.finite_indices
    D = space.dist[np.ix_(fin, fin)]
    tol = eps * max(space.scale, 1.0)
    for i, j, k in itertools.combinations(range(len(fin)), 3):
        a, b, c = sorted((D[i, j], D[i, k], D[j, k]))
        if abs(a + b - c) > tol:
            return False
    return True


def space_to_json_dict(space: ExtendedMetricSpace) -> dict:
    """Serializable dict with "inf" strings on the omega row and column."""
    matrix = [["inf" if math.isinf(v) else float(v) for v in row] for row in space.dist]
    return {"points": list(space.labels), "omega": space.omega_label(), "matrix": matrix}


def _parse_cell(v) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity"):
            return math.inf
        raise ValidationError(f"matrix cell {v!r} is not a number or 'inf'")
    if isinstance(v, (int, float)):
        return float(v)
    raise ValidationError(f"matrix cell {v!r} is not a number or 'inf'")


def space_from_json_dict(data: dict, eps: float = DEFAULT_EPS) -> ExtendedMetricSpace:
    """Inverse of :func:`space_to_json_dict`, with validation."""
    try:
        labels = [str(x) for x in data["points"]]
        omega_label = data.get("omega")
        matrix = data["matrix"]
        D = np.array([[_parse_cell(v) for v in row] for row in matrix], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed distance-matrix JSON: {exc}") from exc
    omega = None
    if omega_label is not None:
        try:
            omega = labels.index(str(omega_label))
        except ValueError:
            raise ValidationError(f"omega label {omega_label!r} is not a point") from None
    return ExtendedMetricSpace(tuple(labels), D, omega, eps=eps)
