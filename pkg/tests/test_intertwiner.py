import math

import numpy as np
import pytest

import oracles
from boundary_lab.errors import ParameterError, ResourceError
from boundary_lab.intertwiner import (apply_It, dense_It_matrix, intertwine_audit,
                                      intertwine_residual, kernel_value, l2_spectrum,
                                      pq_norm_probe, riesz, self_energy, sigma,
                                      sigma_constant, sigma_tilde, spectrum_audit)
from boundary_lab.measure import (CylinderFunction, masses, pairing, random_function,
                                  refine)
from boundary_lab.tree import TreeModel

SIGMA_QUARTER = 1.4330127


@pytest.mark.parametrize("t, m, val", [(0.25, 0, 1.0), (0.25, 2, 3.0), (0.4, 1, 3 ** 0.2)])
def test_kernel_value_examples(F2, t, m, val):
    assert math.isclose(kernel_value(F2, t, m), val, rel_tol=1e-15)
    assert math.isclose(kernel_value(F2, 0.4, 1), 1.2457309, abs_tol=5e-8)


@pytest.mark.parametrize("t", [0.0, -0.1, 0.5, 0.7])
def test_t_range_rejected(F2, t):
    with pytest.raises(ParameterError, match=r"t must be in \(0,1/2\)"):
        kernel_value(F2, t, 1)
    with pytest.raises(ParameterError):
        apply_It(t, CylinderFunction.constant(F2))


def test_self_energy_example(F2):
    assert math.isclose(self_energy(F2, 0.25, 1), 4.0980762 / 24, rel_tol=1e-7)
    assert math.isclose(self_energy(F2, 0.25, 1), 0.1707532, abs_tol=5e-8)


@pytest.mark.parametrize("t, m", [(0.25, 1), (0.1, 1), (0.4, 1), (0.25, 2)])
def test_self_energy_vs_brute_force(F2, t, m):
    # the unresolved diagonal of the depth-M pair sum decays geometrically in M,
    # so Aitken on three consecutive depths recovers the limit
    w = oracles.sphere(2, m)[0]
    a, b, c = (oracles.kernel_pair_sum(2, t, w, m + j) for j in (3, 4, 5))
    assert math.isclose(self_energy(F2, t, m), oracles.aitken(a, b, c), rel_tol=1e-10)


def test_sigma_matches_closed_form_and_energies(F2):
    for t in (0.1, 0.25, 0.4):
        s = sigma(F2, t, 4)
        assert np.allclose(s.values, oracles.sigma_closed(t), rtol=1e-12)
        # <I 1, 1> = sum of four self-energies plus cross terms between depth-1 cylinders
        cross = 4 * 3 * 0.25 * 0.25 * kernel_value(F2, t, 0)
        total = 4 * self_energy(F2, t, 1) + cross
        assert abs(total - pairing(s, CylinderFunction.constant(F2))) < 1e-10
    assert math.isclose(sigma_constant(F2, 0.25), SIGMA_QUARTER, abs_tol=5e-8)
    assert abs(sigma(F2, 0.25, 6).values - 1.4330127).max() < 1e-7


def test_hierarchical_matches_dense(F2, rng):
    for t in (0.1, 0.25, 0.4):
        for N in range(0, 6):
            v = random_function(F2, N, rng)
            a = apply_It(t, v).values
            b = apply_It(t, v, method="dense").values
            assert np.abs(a - b).max() < 1e-12
    with pytest.raises(ResourceError):
        dense_It_matrix(F2, 0.25, F2.dense_max_depth + 1)


def test_self_adjoint_and_positive(F2, rng):
    worst = 0.0
    for _ in range(50):
        t = float(rng.uniform(0.05, 0.45))
        v, w = random_function(F2, 4, rng), random_function(F2, 4, rng)
        worst = max(worst, abs(pairing(apply_It(t, v), w) - pairing(v, apply_It(t, w))))
        pos = CylinderFunction(F2, 4, np.abs(v.values))
        assert (apply_It(t, pos).values >= 0).all()
    assert worst < 1e-12


def test_sigma_tilde_examples(F2):
    assert sigma_tilde(0.25, F2.identity()) == 1.0
    assert math.isclose(sigma_tilde(0.25, F2.word("a")), 0.75 + 0.25 * math.sqrt(3), rel_tol=1e-15)
    assert math.isclose(sigma_tilde(0.25, F2.word("a")), 1.1830127, abs_tol=5e-8)
    # geometric tail: sigma - sigma~(n) = (1 / (2 (1 - 3^-1/2)) - 3/4) 3^{-n/2} at t = 1/4
    coef = 0.5 / (1 - 3 ** -0.5) - 0.75
    for n in (4, 10, 12):
        gap = oracles.sigma_closed(0.25) - sigma_tilde(0.25, F2.word("ab" * (n // 2)))
        assert math.isclose(gap, coef * 3 ** (-n / 2), rel_tol=1e-9)
    assert abs(sigma_tilde(0.25, F2.word("ab" * 6)) - SIGMA_QUARTER) < 1e-3
    vals = [sigma_tilde(0.25, F2.word("a" * n)) for n in range(12)]
    assert all(x < y for x, y in zip(vals, vals[1:]))


def test_riesz_examples(F2, rng):
    one = CylinderFunction.constant(F2, 1.0, 3)
    assert (riesz(0.25, one).values == 1.0).all()
    ia = CylinderFunction.indicator(F2.word("a"))
    assert math.isclose(pairing(riesz(0.25, ia), CylinderFunction.constant(F2)), 0.25, rel_tol=1e-13)
    v = random_function(F2, 3, rng)
    assert np.abs(riesz(0.25, 2 * v).values - 2 * riesz(0.25, v).values).max() < 1e-14


def test_intertwine_examples(F2, rng):
    v = CylinderFunction.indicator(F2.word("b"))
    assert intertwine_residual(0.25, F2.identity(), v) == 0.0
    assert intertwine_residual(0.25, F2.word("ab"), refine(v, 4)) < 1e-10
    assert intertwine_residual(0.4, F2.word("a"), random_function(F2, 5, rng)) < 1e-10


def test_intertwine_audit_small(F2):
    rep = intertwine_audit(F2, 0.25, 4, 2, 5)
    assert rep.passed and rep.extra["residual"] < 1e-10
    with pytest.raises(ResourceError):
        intertwine_audit(F2, 0.25, 3, 3, 5)


def test_intertwine_other_models(rng):
    for model in (TreeModel.free(3), TreeModel.parse("free_product:2,2,2")):
        assert intertwine_audit(model, 0.3, 4, 2, 3).passed


def test_spectrum(F2):
    for N in (2, 3, 4):
        ev = l2_spectrum(F2, 0.25, N)
        assert abs(ev[0] - oracles.sigma_closed(0.25)) < 1e-10
        assert (ev > 0).all()
        assert len(ev) == F2.sphere_size(N)
        K = dense_It_matrix(F2, 0.25, N)
        s = np.sqrt(masses(F2, N))
        S = s[:, None] * K / s[None, :]
        assert np.abs(S - S.T).max() < 1e-13
    rep = spectrum_audit(F2, 0.25, [2, 3])
    header, rows = rep.tables["spectrum"]
    assert header == ("t", "N", "index", "eigenvalue")
    assert len(rows) == 12 + 36
    assert set(rep.extra["margins"]) == {2, 3}


def test_pq_probe(F2):
    t = 0.25
    one = pq_norm_probe(F2, t, 3, trials=0)
    # the three deterministic probes alone; the constant gives sigma exactly
    assert one >= oracles.sigma_closed(t) - 1e-12
    a4 = pq_norm_probe(F2, t, 4, trials=30)
    a6 = pq_norm_probe(F2, t, 6, trials=30)
    assert a4 <= a6 * 1.1


def test_two_block_probe_value(F2):
    # on [a]: integral of k over [a] is sigma - nu(outside [a]) * k(0); [A] contributes -1/4
    t = 0.25
    v = CylinderFunction.indicator(F2.word("a")) - CylinderFunction.indicator(F2.word("A"))
    got = apply_It(t, v)
    want = oracles.sigma_closed(t) - 0.75 - 0.25
    assert math.isclose(got.value_at(F2.word("ab")), want, rel_tol=1e-13)
    assert math.isclose(got.value_at(F2.word("Ab")), -want, rel_tol=1e-13)
    assert abs(got.value_at(F2.word("b"))) < 1e-15
