"""The intertwiner I_t, the functions sigma_t and sigma~_t, and the Riesz operator.

I_t v(xi) = integral of v(eta) d(xi, eta)^{-(1-2t)D} d nu(eta), whose kernel on a
tree is ``exp((1-2t) Q m)`` with m the common-prefix length of xi and eta; the
visual parameter epsilon cancels.  For a depth-N cylinder function the
result is again a depth-N cylinder function: off-diagonal cylinder pairs
contribute exact kernel values, and the own cylinder contributes the row
self-energy

    s_N = integral over [w] of k(xi, eta) d nu(eta)   (xi in [w], |w| = N)
        = (g - 1) / b * g^{-2tN} / (1 - g^{-2t})       (N >= 1)

which is the same for every xi in [w].
"""

from __future__ import annotations

import math

import numpy as np

from .audit import AuditReport
from .errors import ParameterError, ResourceError
from .measure import (CylinderFunction, check_depth, dim, level_mass, masses,
                      random_function)
from .representation import RepParameter, pi_values
from .tree import TreeModel, Word, words_array


def check_t(t):
    if not 0 < t < 0.5:
        raise ParameterError(f"t must be in (0,1/2) for the intertwiner, got {t}")


def kernel_value(model: TreeModel, t: float, m) -> float:
    """Kernel value on cylinder pairs with common-prefix length exactly m."""
    check_t(t)
    return np.exp((1 - 2 * t) * model.Q * np.asarray(m, dtype=float)) if np.ndim(m) else \
        math.exp((1 - 2 * t) * model.Q * m)


def row_self_energy(model: TreeModel, t: float, N: int) -> float:
    """Integral of the kernel over the own depth-N cylinder, for a point inside it."""
    check_t(t)
    g, b = model.g, model.b
    tail = (g - 1) / b * g ** (-2 * t * max(N, 1)) / (-math.expm1(-2 * t * model.Q))
    if N >= 1:
        return tail
    return (1 - 1 / b) + tail


def self_energy(model: TreeModel, t: float, m: int) -> float:
    """E_m(t): double integral of the kernel over [w] x [w] for |w| = m."""
    return level_mass(model, m) * row_self_energy(model, t, m)


def sigma_constant(model: TreeModel, t: float) -> float:
    """sigma_t = I_t(1), constant on homogeneous trees."""
    return row_self_energy(model, t, 0)


def It_values(model: TreeModel, t: float, V: np.ndarray, N: int) -> np.ndarray:
    """Hierarchical I_t on depth-N values (axis 0), O(dim) work.

    Upward pass: A_m = mass-weighted sums over depth-m cylinders.  Downward
    pass: I_t v = sum_{m<N} k(m) (A_m - A_{m+1}) + s_N v, regrouped as a
    telescoping accumulation from the root.
    """
    check_t(t)
    check_depth(model, N)
    if N == 0:
        return row_self_energy(model, t, 0) * V
    k = kernel_value(model, t, np.arange(N))
    w = masses(model, N)
    A = [V * (w if V.ndim == 1 else w[:, None])]
    for m in range(N - 1, -1, -1):
        f = model.b if m == 0 else model.g
        A.append(A[-1].reshape((-1, f) + A[-1].shape[1:]).sum(axis=1))
    A = A[::-1]  # A[m] lives at depth m
    acc = k[0] * A[0]
    for m in range(1, N):
        f = model.b if m == 1 else model.g
        acc = np.repeat(acc, f, axis=0) + (k[m] - k[m - 1]) * A[m]
    f = model.b if N == 1 else model.g
    acc = np.repeat(acc, f, axis=0) - k[N - 1] * A[N]
    return acc + row_self_energy(model, t, N) * V


def common_prefix_matrix(model: TreeModel, N: int) -> np.ndarray:
    """cp[i, j] = common-prefix length of depth-N cylinders i and j."""
    idx = np.arange(dim(model, N))
    cp = np.zeros((idx.size, idx.size), dtype=np.int16)
    for m in range(1, N + 1):
        anc = idx // (dim(model, N) // dim(model, m))
        cp += anc[:, None] == anc[None, :]
    return cp


def dense_It_matrix(model: TreeModel, t: float, N: int) -> np.ndarray:
    """Dense matrix of I_t on depth-N coefficient vectors (cross-validation path)."""
    check_t(t)
    if N > model.dense_max_depth:
        raise ResourceError(f"dense intertwiner gated to N <= {model.dense_max_depth}",
                            cap="dense_max_depth", value=N)
    cp = common_prefix_matrix(model, N)
    K = kernel_value(model, t, cp) * masses(model, N)[None, :]
    np.fill_diagonal(K, row_self_energy(model, t, N))
    return K


def apply_It(t: float, v: CylinderFunction, method: str = "hierarchical") -> CylinderFunction:
    if method == "hierarchical":
        vals = It_values(v.model, t, v.values, v.depth)
    elif method == "dense":
        vals = dense_It_matrix(v.model, t, v.depth) @ v.values
    else:
        raise ValueError(f"unknown method {method!r}")
    return CylinderFunction(v.model, v.depth, vals)


def sigma(model: TreeModel, t: float, N: int = 0) -> CylinderFunction:
    """sigma_t = I_t(1) as a depth-N cylinder function."""
    return apply_It(t, CylinderFunction.constant(model, 1.0, N))


def sigma_tilde(t: float, x: Word) -> float:
    """Integral of exp((1-2t) Q (x, eta)_o) d nu(eta), summed over prefix levels of x."""
    check_t(t)
    model = x.model
    n = len(x)
    total = 0.0
    for m in range(n):
        total += kernel_value(model, t, m) * (level_mass(model, m) - level_mass(model, m + 1))
    return total + kernel_value(model, t, n) * level_mass(model, n)


def riesz(t: float, v: CylinderFunction) -> CylinderFunction:
    """R_t v = I_t v / sigma_t."""
    Iv = It_values(v.model, t, v.values, v.depth)
    s = It_values(v.model, t, np.ones_like(v.values), v.depth)
    return CylinderFunction(v.model, v.depth, Iv / s)


def intertwine_residual(t: float, g: Word, v: CylinderFunction) -> float:
    """|| I_t pi_t(g) v - pi_-t(g) I_t v ||_q at depth v.depth + |g|."""
    check_t(t)
    model = v.model
    N, n = v.depth, len(g)
    lhs = It_values(model, t, pi_values(model, t, g.letters, v.values, N), N + n)
    rhs = pi_values(model, -t, g.letters, It_values(model, t, v.values, N), N)
    q = RepParameter(t).q
    diff = np.abs(lhs - rhs)
    w = masses(model, N + n)
    if diff.ndim == 1:
        return float(np.dot(diff ** q, w) ** (1 / q))
    return float((((diff ** q) * w[:, None]).sum(axis=0) ** (1 / q)).max())


def intertwine_audit(model: TreeModel, t: float, N: int, max_len: int, trials: int,
                     seed: int = 0, tol: float = 1e-10) -> AuditReport:
    """Max intertwining residual over all |g| <= max_len and random v.

    Each v is drawn at depth N - |g| so that every identity is checked at the
    common depth N.
    """
    check_t(t)
    if N - max_len < 1:
        raise ResourceError(f"depth budget N={N} too small for |g| <= {max_len}",
                            cap="N", value=N)
    rng = np.random.default_rng([seed, int(round(t * 1e6))])
    worst = 0.0
    count = 0
    for n in range(max_len + 1):
        depth = N - n
        V = rng.standard_normal((dim(model, depth), trials))
        for row in words_array(model, n):
            g = Word(model, tuple(int(c) for c in row))
            worst = max(worst, _batch_residual(model, t, g, V, depth))
            count += 1
    rep = AuditReport("intertwine_audit", model.name)
    rep.add({"t": t, "N": N, "max_len": max_len, "trials": trials, "elements": count},
            0.0, worst, 0.0, tol)
    rep.extra["residual"] = worst
    return rep


def _batch_residual(model, t, g, V, N):
    n = len(g)
    lhs = It_values(model, t, pi_values(model, t, g.letters, V, N), N + n)
    rhs = pi_values(model, -t, g.letters, It_values(model, t, V, N), N)
    q = RepParameter(t).q
    w = masses(model, N + n)
    return float((((np.abs(lhs - rhs) ** q) * w[:, None]).sum(axis=0) ** (1 / q)).max())


def l2_spectrum(model: TreeModel, t: float, N: int) -> np.ndarray:
    """Eigenvalues of I_t on depth-N functions in L^2(nu), descending by |lambda|."""
    K = dense_It_matrix(model, t, N)
    s = np.sqrt(masses(model, N))
    S = s[:, None] * K / s[None, :]
    S = 0.5 * (S + S.T)
    ev = np.linalg.eigvalsh(S)
    return ev[np.argsort(-np.abs(ev), kind="stable")]


def spectrum_audit(model: TreeModel, t: float, depths) -> AuditReport:
    rep = AuditReport("l2_spectrum", model.name)
    rows = []
    margins = {}
    for N in depths:
        ev = l2_spectrum(model, t, N)
        rows.extend((t, N, i, float(x)) for i, x in enumerate(ev))
        margins[N] = float(np.abs(ev).min())
        top = float(ev[0])
        rep.add({"t": t, "N": N, "item": "min_abs_eigenvalue"}, margins[N], margins[N], 0.0)
        rep.add({"t": t, "N": N, "item": "top_eigenvalue"}, top, top)
    rep.tables["spectrum"] = (("t", "N", "index", "eigenvalue"), rows)
    rep.extra["margins"] = margins
    return rep


def _pq_ratios(model, t, V, N):
    rp = RepParameter(t)
    W = It_values(model, t, V, N)
    w = masses(model, N)[:, None]
    num = ((np.abs(W) ** rp.q) * w).sum(axis=0) ** (1 / rp.q)
    den = ((np.abs(V) ** rp.p) * w).sum(axis=0) ** (1 / rp.p)
    return num / den


def pq_norm_probe(model: TreeModel, t: float, N: int, trials: int, seed: int = 0,
                  decay: float = 0.5) -> float:
    """Lower bound on ||I_t||_{L^p -> L^q} from random and deterministic probes.

    Deterministic probes: the constant, 1_[a] - 1_[b] for the first two letters,
    and the indicator of the first depth-N cylinder.
    """
    check_t(t)
    cols = [np.ones(dim(model, N))]
    two = np.zeros(dim(model, N))
    block = dim(model, N) // model.b
    two[:block], two[block:2 * block] = 1.0, -1.0
    cols.append(two)
    ind = np.zeros(dim(model, N))
    ind[0] = 1.0
    cols.append(ind)
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        cols.append(random_function(model, N, rng, decay).values)
    return float(_pq_ratios(model, t, np.stack(cols, axis=1), N).max())
