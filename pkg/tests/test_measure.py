import itertools
import math

import numpy as np
import pytest

import oracles
from boundary_lab.errors import DomainError, ResourceError
from boundary_lab.measure import (CylinderFunction, ahlfors_audit, covering_audit, cylinders,
                                  masses, pairing, ps_mass, random_function, refine,
                                  shadow_measure_audit, shadow_multiplicity, visual_distance)
from boundary_lab.tree import TreeModel, shadow_cylinder


@pytest.mark.parametrize("N, size", [(1, 4), (3, 36), (6, 972)])
def test_cylinder_dims(F2, N, size):
    assert cylinders(F2, N).dim == size


def test_cylinders_cap():
    small = TreeModel.free(2, max_depth=8)
    with pytest.raises(ResourceError):
        cylinders(small, 9)
    with pytest.raises(DomainError):
        cylinders(small, 0)


def test_cylinder_children(F2):
    cx = cylinders(F2, 2)
    for i in range(cx.dim):
        w = cx.word(i)
        kids = [cylinders(F2, 3).word(j) for j in cx.children(i)]
        assert all(k.letters[:2] == w.letters for k in kids)
        assert math.isclose(sum(ps_mass(k) for k in kids), ps_mass(w), rel_tol=1e-15)


@pytest.mark.parametrize("w, m", [("a", 0.25), ("ab", 1 / 12), ("", 1.0)])
def test_ps_mass_examples(F2, w, m):
    assert math.isclose(ps_mass(F2.word(w)), m, rel_tol=1e-15)


def test_masses_sum_to_one():
    for model in (TreeModel.free(2), TreeModel.free(3), TreeModel.parse("free_product:2,2,2,2")):
        for N in range(0, 7):
            assert abs(masses(model, N).sum() - 1) < 1e-12


def test_refine_examples(F2, rng):
    one = CylinderFunction.constant(F2, 1.0, 2)
    assert (refine(one, 5).values == 1).all()
    ia = CylinderFunction.indicator(F2.word("a"))
    r = refine(ia, 3)
    starts_a = [w.startswith("a") for w in oracles.sphere(2, 3)]
    assert (r.values == np.array(starts_a, dtype=float)).all()
    v = random_function(F2, 2, rng)
    assert abs(pairing(v, one) - pairing(refine(v, 5), one)) < 1e-15
    # refine then average back returns v exactly
    assert (refine(v, 5).coarsen(2).values == v.values).all()


def test_pairing_examples(F2, rng):
    one = CylinderFunction.constant(F2)
    ia, ib = (CylinderFunction.indicator(F2.word(x)) for x in "ab")
    assert pairing(one, one) == 1.0
    assert math.isclose(pairing(ia, one), 0.25)
    assert pairing(ia, ib) == 0.0
    v, w = random_function(F2, 2, rng), random_function(F2, 3, rng)
    ov = dict(zip(oracles.sphere(2, 2), v.values))
    ow = dict(zip(oracles.sphere(2, 3), w.values))
    assert math.isclose(pairing(v, w), oracles.pairing_oracle(2, ov, ow), rel_tol=1e-12, abs_tol=1e-14)


def test_value_at_and_arithmetic(F2):
    f = 2 * CylinderFunction.indicator(F2.word("a")) + CylinderFunction.indicator(F2.word("bA"))
    assert f.depth == 2
    assert f.value_at(F2.word("ab")) == 2.0
    assert f.value_at(F2.word("bAb")) == 1.0
    assert math.isclose(f.value_at(F2.word("b")), 1 / 3)
    assert math.isclose((f - f).integral(), 0.0)
    assert math.isclose((f / 2).integral(), f.integral() / 2)


@pytest.mark.parametrize("w1, w2, d", [("a", "b", 1.0), ("ab", "aB", math.exp(-1)),
                                       ("aba", "abA", math.exp(-2))])
def test_visual_distance_examples(F2, w1, w2, d):
    assert math.isclose(visual_distance(F2.word(w1), F2.word(w2)), d, rel_tol=1e-15)


def test_visual_distance_same_cylinder(F2):
    assert visual_distance(F2.word("ab"), F2.word("ab")) is None


def test_ultrametric(F2):
    words = [F2.word(w) for w in oracles.sphere(2, 3)]
    for x, y, z in itertools.combinations(words, 3):
        dxy, dyz, dxz = visual_distance(x, y), visual_distance(y, z), visual_distance(x, z)
        assert dxz <= max(dxy, dyz)


def test_conformal_relation():
    # e^{-eps (g^-1 xi, g^-1 eta)} = e^{(eps/2)(beta_xi + beta_eta)} e^{-eps (xi, eta)}
    eps = 0.7
    for g in ["a", "ab", "Ba"]:
        cells = oracles.sphere(2, len(g) + 3)
        for xi, eta in itertools.combinations(cells[::5], 2):
            if oracles.gromov_str(xi, eta) >= 3:
                continue
            gx = oracles.reduce_str(oracles.inverse_str(g) + xi)
            ge = oracles.reduce_str(oracles.inverse_str(g) + eta)
            lhs = math.exp(-eps * oracles.gromov_str(gx, ge))
            bx, be = oracles.busemann_str(xi, g), oracles.busemann_str(eta, g)
            rhs = math.exp(eps / 2 * (bx + be)) * math.exp(-eps * oracles.gromov_str(xi, eta))
            assert math.isclose(lhs, rhs, rel_tol=1e-12)


def test_ahlfors_examples(F2):
    rep = ahlfors_audit(F2, 6)
    assert rep.passed
    for m, lo, hi in rep.extra["grade"]:
        assert abs(lo - 0.75) < 1e-12 and abs(hi - 0.75) < 1e-12
    grid = rep.rows[0]
    assert 0.25 <= grid.measured_min and grid.measured_max <= 2.25


def test_ahlfors_brute_force_ball():
    # closed ball mass by direct summation over depth-5 cylinders, radius e^{-eps m}
    eps = 0.5
    model = TreeModel.free(2, epsilon=eps)
    cells = oracles.sphere(2, 5)
    D = model.D
    xi = cells[0]
    for m in range(1, 5):
        r = math.exp(-eps * m)
        ball = sum(oracles.mass(2, c) for c in cells
                   if c == xi or math.exp(-eps * oracles.gromov_str(xi, c)) <= r)
        assert math.isclose(ball / r ** D, 0.75, rel_tol=1e-12)


def test_shadow_measure_examples(F2):
    x = F2.word("ab")
    assert math.isclose(ps_mass(shadow_cylinder(x, 1)) * 9, 2.25)
    assert math.isclose(ps_mass(shadow_cylinder(x, 0.5)) * 9, 0.75)
    rep = shadow_measure_audit(F2, 4, 1.0)
    assert rep.passed
    assert rep.extra["spread"] == 0.0


def test_shadow_multiplicity_brute(F2):
    for n, r in [(3, 1.0), (3, 0.1), (4, 2.0)]:
        cells = oracles.sphere(2, n)
        depth = math.ceil(n - r - 1e-12)
        for i, c in enumerate(cells):
            count = sum(1 for g in cells if c.startswith(g[:depth]))
            assert shadow_multiplicity(F2, n, r)[i] == count


def test_covering_examples(F2):
    rep = covering_audit(F2, 3, 1.0)
    assert rep.extra == {"covered": True, "multiplicity": 3}
    assert shadow_multiplicity(F2, 3, 0.1).max() == 1
    with pytest.raises(DomainError):
        covering_audit(F2, 3, 0.5)


def test_random_function_nested(F2):
    a = random_function(F2, 3, np.random.default_rng(7), decay=0.5)
    b = random_function(F2, 4, np.random.default_rng(7), decay=0.5)
    # b is a plus one extra layer drawn after a's layers
    ref = np.random.default_rng(7)
    for n in range(4):
        ref.standard_normal(F2.sphere_size(n))
    layer = ref.standard_normal(F2.sphere_size(4))
    assert np.allclose(b.values - refine(a, 4).values, 0.5 ** 4 * layer, atol=1e-14)
