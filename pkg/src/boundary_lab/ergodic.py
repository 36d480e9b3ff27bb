"""Sphere-average convergence experiments.

All sums run over the word sphere S_n with uniform weights 1/|S_n|.  Test
functions on the compactification are cylinder functions extended to group
elements by prefix, so a term of any of these sums depends on gamma only
through a bounded prefix and suffix once n is large enough.  Sums are then
taken class by class: one representative per (prefix, suffix) pair, weighted
by the exact number of reduced words with those ends.  Short spheres are
enumerated directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audit import AuditReport
from .errors import DomainError
from .intertwiner import check_t, riesz, sigma, sigma_tilde
from .measure import CylinderFunction, pairing
from .representation import (GroupAverage, RepParameter, apply_pi, matrix_coefficient,
                             operator_norm, phi_tilde, spherical)
from .tree import (TreeModel, Word, count_with_ends, inverse, sphere_array,
                   word_with_ends, words_array)

CONVERGENCE_COLUMNS = ("experiment", "t", "n", "value", "target", "abs_error")


@dataclass(frozen=True)
class TestFunctionPair:
    """Cylinder functions f, g read on group elements through their prefixes."""

    __test__ = False  # not a pytest class

    f: CylinderFunction
    g: CylinderFunction

    @classmethod
    def ones(cls, model: TreeModel):
        one = CylinderFunction.constant(model)
        return cls(one, one)

    def f_at(self, gamma: Word) -> float:
        return self.f.value_at(gamma)

    def g_at_inverse(self, gamma: Word) -> float:
        return self.g.value_at(inverse(gamma))


def _word(model, row):
    return Word(model, tuple(int(c) for c in row))


def sphere_classes(model: TreeModel, n: int, pre: int, suf: int):
    """Yield (representative, count) covering S_n.

    For n >= pre + suf every reduced word with the representative's first
    ``pre`` and last ``suf`` letters is in the class; below that each sphere
    word is its own class.
    """
    if n < pre + suf:
        for row in sphere_array(model, n):
            yield _word(model, row), 1
        return
    for p in words_array(model, pre):
        for s in words_array(model, suf):
            p_, s_ = [int(c) for c in p], [int(c) for c in s]
            c = count_with_ends(model, n, p_, s_)
            if c:
                yield word_with_ends(model, n, p_, s_), c


def sphere_mean(model: TreeModel, n: int, term, pre: int, suf: int, brute: bool = False) -> float:
    """(1/|S_n|) sum over S_n of term(gamma), for terms determined by (pre, suf) ends."""
    if brute:
        it = ((_word(model, row), 1) for row in sphere_array(model, n))
    else:
        it = sphere_classes(model, n, pre, suf)
    total = 0.0
    for gamma, c in it:
        total += c * term(gamma)
    return total / model.sphere_size(n)


def _table(rep, name, rows):
    rep.tables[name] = (CONVERGENCE_COLUMNS, rows)


# -- equidistribution ------------------------------------------------------------


def equid_value(pair: TestFunctionPair, n: int, brute: bool = False) -> float:
    model = pair.f.model
    return sphere_mean(model, n, lambda x: pair.f_at(x) * pair.g_at_inverse(x),
                       pair.f.depth, pair.g.depth, brute)


def equid_audit(pair: TestFunctionPair, n_max: int, tol: float = 1e-3, mapper=map) -> AuditReport:
    """a_n = mean over S_n of f(gamma) g(gamma^-1) against (int f)(int g)."""
    model = pair.f.model
    target = pair.f.integral() * pair.g.integral()
    ns = list(range(1, n_max + 1))
    vals = list(mapper(lambda n: equid_value(pair, n), ns))
    rows = [("equid", "", n, a, target, abs(a - target)) for n, a in zip(ns, vals)]
    rep = AuditReport("equid_audit", model.name)
    err = abs(vals[-1] - target)
    rep.add({"n_max": n_max, "f_depth": pair.f.depth, "g_depth": pair.g.depth},
            err, err, 0.0, tol)
    _table(rep, "convergence", rows)
    rep.extra.update(values=vals, target=target, errors=[r[5] for r in rows])
    return rep


# -- twisted sphere averages ----------------------------------------------------


def bm_value(t: float, pair: TestFunctionPair, v: CylinderFunction, w: CylinderFunction,
             n: int, brute: bool = False) -> float:
    """b_n = mean over S_n of f(gamma) g(gamma^-1) <pi_t(gamma) v, w> / phi_t(gamma)."""
    model = v.model
    rp = RepParameter(t)
    pre = max(pair.f.depth, w.depth)
    suf = max(pair.g.depth, v.depth)
    phi = spherical(rp, _word(model, words_array(model, n)[0]) if n else model.identity())

    def term(x):
        fg = pair.f_at(x) * pair.g_at_inverse(x)
        if fg == 0.0:
            return 0.0
        return fg * matrix_coefficient(rp, x, v, w)

    return sphere_mean(model, n, term, pre, suf, brute) / phi


def bm_target(t: float, pair: TestFunctionPair, v: CylinderFunction, w: CylinderFunction) -> float:
    Rv = riesz(t, v)
    return pairing(pair.g * Rv, CylinderFunction.constant(v.model)) * pairing(pair.f, w)


def bm_audit(t: float, pair: TestFunctionPair, v: CylinderFunction, w: CylinderFunction,
             n_max: int, tol: float = 0.01, mapper=map) -> AuditReport:
    check_t(t)
    target = bm_target(t, pair, v, w)
    ns = list(range(0, n_max + 1))
    vals = list(mapper(lambda n: bm_value(t, pair, v, w, n), ns))
    rows = [("bm", t, n, b, target, abs(b - target)) for n, b in zip(ns, vals)]
    rep = AuditReport("bm_audit", v.model.name)
    err = abs(vals[-1] - target)
    rep.add({"t": t, "n_max": n_max, "v_depth": v.depth, "w_depth": w.depth}, err, err, 0.0, tol)
    _table(rep, "convergence", rows)
    rep.extra.update(values=vals, target=target, errors=[r[5] for r in rows])
    return rep


# -- radial RD -------------------------------------------------------------------


def rd_value(model: TreeModel, t: float, r: float, n: int) -> tuple[float, float]:
    """(||pi_t(f_n)||_{r->r}, phi_tilde_t(n)) for the uniform sphere average f_n.

    r = 1 and r = inf are exact (positive operator, constant row and column
    sums).  r = 2 is the norm on depth-1 inputs, a lower bound.
    """
    norm = operator_norm(RepParameter(t), GroupAverage.sphere_lazy(model, n), r, input_depth=1)
    return norm, phi_tilde(model, t, n)[1]


def rd_schur_bound(model: TreeModel, t: float, n: int) -> float:
    """sqrt(||T 1||_inf ||T* 1||_inf), an upper bound for the L^2 norm of T = pi_t(f_n)."""
    f = GroupAverage.sphere_lazy(model, n)
    a = operator_norm(RepParameter(t), f, math.inf)
    b = operator_norm(RepParameter(-t), f, math.inf)
    return math.sqrt(a * b)


def rd_audit(model: TreeModel, t: float, r: float, n_max: int, ceiling: float = 10.0,
             mapper=map) -> AuditReport:
    """c_n = ||pi_t(f_n)||_{r->r} / phi_tilde_t(n) for 0 <= n <= n_max."""
    RepParameter(t)
    if r not in (1, 2) and not math.isinf(r):
        raise DomainError("rd_audit supports r in {1, 2, inf}")
    ns = list(range(0, n_max + 1))
    res = list(mapper(lambda n: rd_value(model, t, r, n), ns))
    c = np.array([a / b for a, b in res])
    rep = AuditReport("rd_audit", model.name)
    rep.add({"t": t, "r": r, "n_max": n_max, "item": "sup_c"}, c.min(), c.max(), 0.0, ceiling)
    rows = [("rd", t, n, ci, "", "") for n, ci in zip(ns, c)]
    if r == 2:
        upper = np.array(list(mapper(lambda n: rd_schur_bound(model, t, n), ns)))
        gap = float(np.max((np.array([a for a, _ in res]) - upper) / upper))
        rep.add({"t": t, "r": r, "n_max": n_max, "item": "lower_minus_schur_rel"}, gap, gap,
                -math.inf, 1e-12)
        rep.extra["schur_upper"] = upper
    if r == 1:
        dual = np.array([a / b for a, b in mapper(lambda n: rd_value(model, -t, math.inf, n), ns)])
        resid = float(np.abs(c - dual).max())
        rep.add({"t": t, "r": r, "n_max": n_max, "item": "duality_residual"}, resid, resid, 0.0, 1e-10)
        rep.extra["duality_residual"] = resid
    _table(rep, "convergence", rows)
    rep.extra.update(c=c, sup=float(c.max()))
    return rep


# -- cyclic vectors --------------------------------------------------------------


def cyclic_pairing(t: float, target: CylinderFunction, w: CylinderFunction, n: int,
                   brute: bool = False) -> float:
    """<f_n, w> with f_n = mean over S_n of target(gamma) pi_t(gamma) 1 / phi_t(gamma)."""
    model = target.model
    pair = TestFunctionPair(target, CylinderFunction.constant(model))
    return bm_value(t, pair, CylinderFunction.constant(model), w, n, brute)


def cyclic_vector(t: float, target: CylinderFunction, n: int) -> CylinderFunction:
    """The approximant f_n itself, as a depth-n cylinder function (explicit sum)."""
    check_t(t)
    model = target.model
    rp = RepParameter(t)
    one = CylinderFunction.constant(model)
    words = sphere_array(model, n)
    phi = spherical(rp, _word(model, words[0]) if n else model.identity())
    acc = np.zeros(model.sphere_size(n))
    for row in words:
        x = _word(model, row)
        c = target.value_at(x)
        if c:
            acc += c * apply_pi(rp, x, one).values
    return CylinderFunction(model, n, acc / (len(words) * phi))


def cyclic_approx(t: float, target: CylinderFunction, w_tests, n_max: int,
                  tol: float = 0.02, mapper=map) -> AuditReport:
    check_t(t)
    rep = AuditReport("cyclic_approx", target.model.name)
    rows = []
    ns = list(range(1, n_max + 1))
    for j, w in enumerate(w_tests):
        goal = pairing(target, w)
        vals = list(mapper(lambda n: cyclic_pairing(t, target, w, n), ns))
        rows.extend((f"cyclic[{j}]", t, n, x, goal, abs(x - goal)) for n, x in zip(ns, vals))
        err = abs(vals[-1] - goal)
        rep.add({"t": t, "n_max": n_max, "test": j}, err, err, 0.0, tol)
    _table(rep, "convergence", rows)
    return rep


def dual_pairing(t: float, w: CylinderFunction, v: CylinderFunction, n: int,
                 brute: bool = False) -> float:
    """<v, w_n> with w_n = mean of sigma~_t(gamma^-1) pi_-t(gamma^-1) w / phi_t(gamma).

    By the adjoint identity each term equals sigma~_t(gamma^-1) <pi_t(gamma) v, w>.
    """
    model = v.model
    st = sigma_tilde(t, _word(model, words_array(model, n)[0]) if n else model.identity())
    return st * bm_value(t, TestFunctionPair.ones(model), v, w, n, brute)


def dual_limit_audit(t: float, w: CylinderFunction, v_tests, n_max: int, tol: float = 0.02,
                     mapper=map) -> AuditReport:
    check_t(t)
    model = w.model
    one = CylinderFunction.constant(model)
    s = sigma(model, t, 0)
    rep = AuditReport("dual_limit_audit", model.name)
    rows = []
    ns = list(range(1, n_max + 1))
    for j, v in enumerate(v_tests):
        goal = pairing(one, w) * pairing(v, s)
        vals = list(mapper(lambda n: dual_pairing(t, w, v, n), ns))
        rows.extend((f"dual[{j}]", t, n, x, goal, abs(x - goal)) for n, x in zip(ns, vals))
        err = abs(vals[-1] - goal)
        rep.add({"t": t, "n_max": n_max, "test": j}, err, err, 0.0, tol)
    _table(rep, "convergence", rows)
    return rep
