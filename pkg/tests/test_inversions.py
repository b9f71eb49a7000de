"""Inversions, bounded metrics, crt equivalence, homothety detection."""

import numpy as np
import pytest

import moebiusgeo as mg
from moebiusgeo.errors import NotPtolemyError

from helpers import apex_index, random_halfplane_curve


def line_space_with_omega(xs):
    return mg.space_from_points(np.asarray(xs, dtype=float)[:, None], add_omega=True)


def random_ptolemy_space(rng, with_omega=False):
    kind = rng.integers(0, 2)
    count = int(rng.integers(5, 9))
    if kind == 0:
        pts = rng.normal(size=(count, 3))
        return mg.space_from_points(pts, add_omega=with_omega)
    g = rng.normal(size=(count, 3))
    g /= np.linalg.norm(g, axis=1)[:, None]
    return mg.space_from_points(g, add_omega=with_omega)


class TestInvertAt:
    def test_line_example(self):
        sp = line_space_with_omega([0.0, 1.0, 2.0])
        inv = mg.invert_at(sp, "p0")
        assert inv.omega == 0
        assert np.isclose(inv.dist[1, 2], 0.5)
        assert np.isclose(inv.dist[1, 3], 1.0)
        assert np.isclose(inv.dist[2, 3], 0.5)
        # triangle equality is preserved along the inverted line
        assert np.isclose(inv.dist[1, 2] + inv.dist[2, 3], inv.dist[1, 3])

    def test_double_inversion_restores(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            sp = random_ptolemy_space(rng, with_omega=True)
            z = sp.labels[int(rng.integers(0, sp.n - 1))]
            inv = mg.invert_at(sp, z)
            back = mg.invert_at(inv, "omega")
            finite = np.isfinite(sp.dist) & (sp.dist > 0)
            rel = np.abs(back.dist[finite] - sp.dist[finite]) / sp.dist[finite]
            assert rel.max() <= 1e-12

    def test_chordal_circle_becomes_line(self):
        curve = mg.chordal_circle_curve(2.0, 8)
        sp = mg.circle_from_curve(curve)
        inv = mg.invert_at(sp, "t0")
        order = [i for i in range(sp.n) if i != 0]
        D = inv.dist
        for a, b, c in zip(order, order[1:], order[2:]):
            assert abs(D[a, b] + D[b, c] - D[a, c]) <= 1e-12

    def test_coincident_point_rejected(self):
        D = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        sp = mg.ExtendedMetricSpace(("a", "b", "c"), D)
        with pytest.raises(ValueError, match="distance 0"):
            mg.invert_at(sp, "a")

    def test_non_ptolemy_detected(self):
        sp = mg.space_from_points([(0, 0), (1, 0), (1, 1), (0, 1)], p=1.0)
        with pytest.raises(NotPtolemyError):
            mg.invert_at(sp, "p0")

    def test_invert_at_omega_is_identity(self):
        sp = line_space_with_omega([0.0, 1.0, 2.0])
        out = mg.invert_at(sp, "omega")
        finite = np.isfinite(sp.dist)
        assert np.array_equal(out.dist[finite], sp.dist[finite])


class TestBoundAt:
    def test_interval_example(self):
        sp = mg.space_from_points(np.array([0.0, 3.0])[:, None])
        out = mg.bound_at(sp, "p0")
        assert np.isclose(out.dist[0, 1], 0.75)

    def test_omega_becomes_finite_at_one(self):
        sp = line_space_with_omega([0.0, 3.0])
        out = mg.bound_at(sp, "p0")
        assert out.omega is None
        assert np.isclose(out.dist[0, 2], 1.0)
        assert np.isclose(out.dist[1, 2], 0.25)

    def test_diameter_at_most_one(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            sp = random_ptolemy_space(rng, with_omega=bool(rng.integers(0, 2)))
            out = mg.bound_at(sp, sp.labels[0])
            assert out.dist.max() <= 1.0 + 1e-12

    def test_bound_at_omega_rejected(self):
        sp = line_space_with_omega([0.0, 1.0])
        with pytest.raises(ValueError):
            mg.bound_at(sp, "omega")


class TestCrtEquivalence:
    def test_identity_zero_deviation(self):
        sp = random_ptolemy_space(np.random.default_rng(3))
        rep = mg.crt_equivalent(mg.PointedCorrespondence.identity(sp, sp))
        assert rep.equivalent and rep.max_deviation == 0.0

    def test_inversion_preserves_crt(self):
        rng = np.random.default_rng(4)
        for _ in range(15):
            sp = random_ptolemy_space(rng, with_omega=bool(rng.integers(0, 2)))
            z = sp.labels[0]
            inv = mg.invert_at(sp, z)
            rep = mg.crt_equivalent(mg.PointedCorrespondence.identity(sp, inv))
            assert rep.max_deviation <= 1e-9

    def test_bound_preserves_crt(self):
        rng = np.random.default_rng(5)
        for _ in range(15):
            sp = random_ptolemy_space(rng, with_omega=bool(rng.integers(0, 2)))
            out = mg.bound_at(sp, sp.labels[1])
            rep = mg.crt_equivalent(mg.PointedCorrespondence.identity(sp, out))
            assert rep.max_deviation <= 1e-9

    def test_perturbation_detected_with_witness(self):
        curve = mg.chordal_circle_curve(2.0, 8)
        sp = mg.circle_from_curve(curve)
        D = sp.dist.copy()
        D[1, 2] *= 1.01
        D[2, 1] = D[1, 2]
        sp2 = mg.ExtendedMetricSpace(sp.labels, D)
        rep = mg.crt_equivalent(mg.PointedCorrespondence.identity(sp, sp2))
        assert not rep.equivalent
        assert rep.witness is not None and set(rep.witness) & {"t1", "t2"}

    def test_nonidentity_mapping(self):
        # relabeled copy under the matching permutation is equivalent
        rng = np.random.default_rng(6)
        sp = random_ptolemy_space(rng)
        perm = rng.permutation(sp.n)
        sp2 = mg.ExtendedMetricSpace(
            tuple(f"x{i}" for i in range(sp.n)), sp.dist[np.ix_(perm, perm)]
        )
        inv = np.argsort(perm)
        mapping = {sp.labels[j]: f"x{int(inv[j])}" for j in range(sp.n)}
        rep = mg.crt_equivalent(mg.PointedCorrespondence(sp, sp2, mapping))
        assert rep.equivalent

    def test_cardinality_mismatch(self):
        sp = random_ptolemy_space(np.random.default_rng(7))
        other = mg.space_from_points([(0, 0), (1, 0), (0, 1)])
        with pytest.raises(mg.ValidationError):
            mg.PointedCorrespondence(sp, other, {lab: lab for lab in sp.labels})


class TestHomothety:
    def test_factor_two(self):
        sp = random_ptolemy_space(np.random.default_rng(8))
        sp2 = mg.ExtendedMetricSpace(sp.labels, 2.0 * sp.dist)
        assert np.isclose(mg.homothety_factor(sp, sp2), 2.0)

    def test_identity_factor_one(self):
        sp = random_ptolemy_space(np.random.default_rng(9))
        assert np.isclose(mg.homothety_factor(sp, sp), 1.0)

    def test_different_omega_gated(self):
        sp = line_space_with_omega([0.0, 1.0, 2.0])
        inv = mg.invert_at(sp, "p0")
        assert mg.homothety_factor(sp, inv) is None

    def test_equivalent_but_not_homothetic(self):
        sp = mg.space_from_points(np.array([0.0, 1.0, 2.0, 5.0])[:, None])
        out = mg.bound_at(sp, "p0")
        assert mg.homothety_factor(sp, out) is None

    def test_too_few_points(self):
        sp = mg.ExtendedMetricSpace(("a",), np.zeros((1, 1)))
        with pytest.raises(ValueError):
            mg.homothety_factor(sp, sp)


class TestCircleInversionInvariant:
    def test_remove_any_point_and_invert_gives_collinear(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            curve = random_halfplane_curve(rng, R=2.0, n_interior=7)
            sp = mg.circle_from_curve(curve)
            apex_index(curve)  # generator sanity: the apex sample exists
            for j in range(sp.n):
                inv = mg.invert_at(sp, j)
                order = [(j + s) % sp.n for s in range(1, sp.n)]
                D = inv.dist
                for a, b, c in zip(order, order[1:], order[2:]):
                    scale = max(D[a, c], 1.0)
                    assert abs(D[a, b] + D[b, c] - D[a, c]) <= 1e-9 * scale
