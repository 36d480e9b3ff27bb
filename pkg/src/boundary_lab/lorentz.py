"""Lorentz norms of cylinder functions and the weak-type Schur test for I_t.

Every cylinder function has a step-function decreasing rearrangement, so
Lorentz norms are finite sums of power antiderivatives:

    ||f||_{p,q}^q = C * sum_i L_i^q (p/q) (B_i^{q/p} - B_{i-1}^{q/p})
    ||f||_{p,inf} = max_i L_i B_i^{1/p}

with levels L_1 > L_2 > ... and cumulative masses B_i.  The default
normalization C = q/p makes ||f||_{p,p} = ||f||_p and ||1||_{p,q} = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audit import AuditReport
from .errors import DomainError, ParameterError
from .intertwiner import (It_values, check_t, common_prefix_matrix, kernel_value,
                          row_self_energy)
from .measure import CylinderFunction, level_mass, masses, random_function
from .representation import RepParameter
from .tree import TreeModel


@dataclass(frozen=True)
class RearrangementProfile:
    """Right-continuous decreasing step function f*(tau) = levels[i] on [B_i, B_{i+1}).

    ``breakpoints`` has one more entry than ``levels`` and runs from 0 to the
    total mass.
    """

    breakpoints: np.ndarray
    levels: np.ndarray

    def value(self, tau):
        tau = np.asarray(tau, dtype=float)
        i = np.searchsorted(self.breakpoints, tau, side="right") - 1
        out = np.where(i < len(self.levels), self.levels[np.minimum(i, len(self.levels) - 1)], 0.0)
        return out if out.ndim else float(out)

    def distribution(self, s):
        """nu(|f| > s) read off the profile."""
        k = int(np.sum(self.levels > s))
        return float(self.breakpoints[k])


def rearrangement(f: CylinderFunction | np.ndarray, weights=None) -> RearrangementProfile:
    if isinstance(f, CylinderFunction):
        values, weights = f.values, f.masses
    else:
        values = np.asarray(f, dtype=float)
    a = np.abs(values)
    order = np.argsort(-a, kind="stable")
    a, w = a[order], np.asarray(weights, dtype=float)[order]
    # merge equal levels so breakpoints are strictly increasing
    levels, first = np.unique(-a, return_index=True)
    cum = np.concatenate([[0.0], np.cumsum(w)])
    ends = np.append(first[1:], len(a))
    return RearrangementProfile(np.concatenate([[0.0], cum[ends]]), -levels)


def _check_exponents(p, q):
    if not 1 < p < math.inf:
        raise ParameterError(f"Lorentz exponent p must be in (1, inf), got {p}")
    if not q >= 1:
        raise ParameterError(f"Lorentz exponent q must be in [1, inf], got {q}")


def lorentz_norm(f, p: float, q: float, weights=None, prefactor: str = "q/p") -> float:
    """||f||_{L^{p,q}} in closed form over the rearrangement steps.

    ``prefactor`` selects the normalization constant in front of the q-th
    power integral: "q/p" (default, so that ||f||_{p,p} = ||f||_p) or "p/q".
    """
    _check_exponents(p, q)
    prof = f if isinstance(f, RearrangementProfile) else rearrangement(f, weights)
    L, B = prof.levels, prof.breakpoints
    if math.isinf(q):
        return float(np.max(L * B[1:] ** (1 / p), initial=0.0))
    if prefactor == "q/p":
        C = q / p
    elif prefactor == "p/q":
        C = p / q
    else:
        raise ParameterError(f"unknown prefactor {prefactor!r}")
    e = q / p
    s = np.sum(L ** q * (B[1:] ** e - B[:-1] ** e)) * (p / q) * C
    return float(s ** (1 / q))


def lorentz_columns(V: np.ndarray, weights: np.ndarray, p: float, q: float) -> np.ndarray:
    """Lorentz norm of every column of V (q = p reduces to the weighted L^p norm)."""
    if q == p:
        return (np.abs(V) ** p * weights[:, None]).sum(axis=0) ** (1 / p)
    return np.array([lorentz_norm(V[:, j], p, q, weights) for j in range(V.shape[1])])


# -- weak-type Schur test ------------------------------------------------------


def kernel_exponent(t: float) -> float:
    """r = 1/(1-2t), the weak-type exponent of the intertwiner kernel."""
    check_t(t)
    return 1.0 / (1.0 - 2.0 * t)


def kernel_rows(model: TreeModel, t: float, N: int) -> np.ndarray:
    """Depth-N kernel rows as functions of eta: row i is k(xi_i, .) averaged on cylinders.

    Off-diagonal entries are exact kernel values; the own cylinder carries the
    average s_N / nu_N of the kernel over it.
    """
    cp = common_prefix_matrix(model, N)
    K = kernel_value(model, t, cp)
    np.fill_diagonal(K, row_self_energy(model, t, N) / level_mass(model, N))
    return K


def kernel_weak_norms(model: TreeModel, t: float, N: int) -> np.ndarray:
    """A_xi = ||k(xi, .)||_{L^{r,inf}} for every depth-N cylinder xi."""
    r = kernel_exponent(t)
    K = kernel_rows(model, t, N)
    srt = -np.sort(-K, axis=1)
    # equal masses: the sup over each tie block is reached at its right end
    tau = level_mass(model, N) * np.arange(1, K.shape[1] + 1)
    return (srt * tau[None, :] ** (1 / r)).max(axis=1)


def true_kernel_weak_norm(model: TreeModel, t: float) -> float:
    """Weak L^r norm of the undiscretized kernel: max(1, (g/b)^{1-2t})."""
    check_t(t)
    return max(1.0, (model.g / model.b) ** (1 - 2 * t))


def kernel_weak_audit(model: TreeModel, t: float, N: int) -> AuditReport:
    A = kernel_weak_norms(model, t, N)
    rep = AuditReport("kernel_weak_audit", model.name)
    rep.add({"t": t, "N": N, "item": "A"}, A.min(), A.max(), 0.0, math.inf)
    rep.add({"t": t, "N": N, "item": "homogeneity"}, A.max() - A.min(), A.max() - A.min(), 0.0, 1e-12)
    rep.extra.update(A=float(A.max()), spread=float(A.max() - A.min()),
                     true_A=true_kernel_weak_norm(model, t))
    return rep


def schur_ratios(model: TreeModel, t: float, N: int, V: np.ndarray, s=None, A=None) -> np.ndarray:
    """||I_t v||_{q,s} / (A ||v||_{p,s}) per column; s=None uses plain L^q and L^p."""
    rp = RepParameter(t)
    if A is None:
        A = float(kernel_weak_norms(model, t, N).max())
    W = It_values(model, t, V, N)
    w = masses(model, N)
    num = lorentz_columns(W, w, rp.q, rp.q if s is None else s)
    den = lorentz_columns(V, w, rp.p, rp.p if s is None else s)
    return num / (A * den)


def schur_audit(model: TreeModel, t: float, N: int, trials: int, s=None, seed: int = 0,
                decay: float = 0.5) -> AuditReport:
    """Max Schur-test ratio over random multiscale v (per-trial seeds [seed, trial])."""
    check_t(t)
    rp = RepParameter(t)
    r = kernel_exponent(t)
    resid = abs(1 / rp.p + 1 / r - 1 - 1 / rp.q)
    if resid > 1e-12:
        raise AssertionError("exponent relation 1/p + 1/r = 1 + 1/q violated")
    A = float(kernel_weak_norms(model, t, N).max())
    V = np.stack([random_function(model, N, np.random.default_rng([seed, i]), decay).values
                  for i in range(trials)], axis=1)
    ratios = schur_ratios(model, t, N, V, s, A)
    one = schur_ratios(model, t, N, np.ones((masses(model, N).size, 1)), s, A)[0]
    rep = AuditReport("schur_audit", model.name)
    params = {"t": t, "N": N, "trials": trials, "s": "lebesgue" if s is None else s}
    rep.add({**params, "item": "exponent_residual"}, resid, resid, 0.0, 1e-12)
    rep.add({**params, "item": "max_ratio"}, ratios.min(), ratios.max(), 0.0, math.inf)
    rep.extra.update(A=A, max_ratio=float(ratios.max()), constant_ratio=float(one))
    return rep


def embedding_audit(model: TreeModel, p: float, q1: float, q2: float, N: int, trials: int,
                    seed: int = 0) -> AuditReport:
    """Measured C in ||v||_{p,q2} <= C ||v||_{p,q1} for q1 < q2 over random v."""
    if not q1 < q2:
        raise DomainError("embedding audit needs q1 < q2")
    w = masses(model, N)
    ratios = []
    for i in range(trials):
        v = random_function(model, N, np.random.default_rng([seed, i])).values
        ratios.append(lorentz_norm(v, p, q2, w) / lorentz_norm(v, p, q1, w))
    ratios = np.array(ratios)
    rep = AuditReport("embedding_audit", model.name)
    rep.add({"p": p, "q1": q1, "q2": q2, "N": N, "trials": trials}, ratios.min(), ratios.max(), 0.0, math.inf)
    rep.extra["C"] = float(ratios.max())
    return rep
