"""The boundary representations pi_t on cylinder functions.

``pi_t(g) v (xi) = (dg_* nu / d nu)(xi)^(1/2 + t) v(g^-1 xi)`` with the
Radon-Nikodym derivative ``exp(Q beta_xi(o, g o))``.  On a tree, beta only
depends on the common-prefix length m of xi and g (it equals 2m - |g|), and
g^-1 maps the cylinder [g_1..g_m x ...] onto [g_|g|^-1 .. g_(m+1)^-1 x ...].
Applying pi_t(g) to a depth-N function is therefore an exact gather onto
depth N + |g|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .audit import AuditReport
from .errors import DomainError, ParameterError
from .measure import (CylinderFunction, check_depth, dim, level_mass, masses,
                      refine_values)
from .tree import (TreeModel, Word, busemann, index_of, indices_of, inverse,
                   sphere_array, successors, word_at, words_array)


@dataclass(frozen=True)
class RepParameter:
    """The parameter t of pi_t with its exponents 1/p = 1/2 + t, 1/q = 1/2 - t."""

    t: float

    def __post_init__(self):
        if not -0.5 <= self.t <= 0.5:
            raise ParameterError(f"t must lie in [-1/2, 1/2], got {self.t}")

    @property
    def p(self):
        s = 0.5 + self.t
        return math.inf if s == 0 else 1.0 / s

    @property
    def q(self):
        s = 0.5 - self.t
        return math.inf if s == 0 else 1.0 / s

    @property
    def dual(self):
        return RepParameter(-self.t)


def _weight(exponent: float, mass: float) -> float:
    # log-domain product once the exponent leaves the comfortable double range
    if abs(exponent) > 300:
        return math.exp(exponent + math.log(mass))
    return math.exp(exponent) * mass


def rn_derivative(g: Word, w: Word) -> float:
    """Radon-Nikodym derivative d(g_* nu)/d nu on the cylinder [w]."""
    return math.exp(g.model.Q * busemann(w, g))


# -- exact action on cylinder functions ---------------------------------------


def pi_values(model: TreeModel, t: float, g: Sequence[int], values: np.ndarray, N: int) -> np.ndarray:
    """pi_t(g) applied to depth-N values (axis 0); result lives at depth N + |g|."""
    g = tuple(g)
    n = len(g)
    if n == 0:
        return values
    N2 = N + n
    check_depth(model, N2)
    W = words_array(model, N2)
    m = np.cumprod(W[:, :n] == np.array(g, dtype=W.dtype), axis=1).sum(axis=1)
    inv = model.inv
    src = np.empty(W.shape[0], dtype=np.int64)
    for k in range(n + 1):
        sel = np.nonzero(m == k)[0]
        if sel.size == 0:
            continue
        head = np.array([inv[c] for c in reversed(g[k:])], dtype=W.dtype)
        if len(head) >= N:
            src[sel] = index_of(model, head[:N].tolist())
        else:
            tail = W[sel, k:k + N - len(head)]
            letters = np.concatenate([np.broadcast_to(head, (sel.size, len(head))), tail], axis=1)
            src[sel] = indices_of(model, letters)
    scale = np.exp((0.5 + t) * model.Q * (2 * m - n))
    out = values[src]
    if out.ndim == 1:
        return scale * out
    return scale[:, None] * out


def apply_pi(rp: RepParameter, g: Word, v: CylinderFunction) -> CylinderFunction:
    if g.model != v.model:
        raise DomainError("group element and function from different models")
    vals = pi_values(v.model, rp.t, g.letters, v.values, v.depth)
    return CylinderFunction(v.model, v.depth + len(g), vals)


def matrix_coefficient(rp: RepParameter, g: Word, v: CylinderFunction, w: CylinderFunction) -> float:
    """<pi_t(g) v, w> by exact summation over an adaptive cylinder partition.

    The boundary is split by the common-prefix length m with g; each piece is
    refined only until w and v o g^-1 are constant on it, so the cost is
    O(|g| g^depth) instead of the dimension at depth |v| + |g|.
    """
    model = v.model
    if g.model != model or w.model != model:
        raise DomainError("mixed models in matrix coefficient")
    G = g.letters
    n = len(G)
    a = (0.5 + rp.t) * model.Q
    dv, dw = v.depth, w.depth
    vv, wv = v.values, w.values
    inv = model.inv

    def piece(u, s):
        # integral over xi in [u] of v(g^-1 xi) w(xi), with g^-1 [u] = [s]
        if len(u) >= dw and len(s) >= dv:
            return (vv[index_of(model, s[:dv])] * wv[index_of(model, u[:dw])],
                    level_mass(model, len(u)))
        acc = 0.0
        mass = 0.0
        for x in successors(model, u[-1] if u else None):
            val, mm = piece(u + [x], s + [x])
            acc += val * mm
            mass += mm
        return acc / mass, mass

    total = 0.0
    for k in range(n):
        head = [int(inv[c]) for c in reversed(G[k:])]
        prev = G[k - 1] if k else None
        for x in successors(model, prev):
            if x == G[k]:
                continue
            val, mass = piece(list(G[:k]) + [x], head + [x])
            total += val * _weight(a * (2 * k - n), mass)
    val, mass = piece(list(G), [])
    total += val * _weight(a * n, mass)
    return total


def spherical(rp: RepParameter, g: Word) -> float:
    """phi_t(g) = <pi_t(g) 1, 1>."""
    one = CylinderFunction.constant(g.model)
    return matrix_coefficient(rp, g, one, one)


def omega(model: TreeModel, t: float, x):
    """2 sinh(t Q x) / (e^{2 t Q} - 1), continuously extended by x at t = 0."""
    x = np.asarray(x, dtype=float)
    if t == 0:
        return x * 1.0
    Q = model.Q
    return 2.0 * np.sinh(t * Q * x) / np.expm1(2.0 * t * Q)


def phi_tilde(model: TreeModel, t: float, x):
    """Return (omega_|t|(x), e^{-Qx/2} (1 + omega_|t|(x)))."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("phi_tilde is defined for x >= 0")
    om = omega(model, abs(t), x)
    pt = np.exp(-0.5 * model.Q * x) * (1.0 + om)
    if pt.ndim == 0:
        return float(om), float(pt)
    return om, pt


def _row_word(model, row):
    return Word(model, tuple(int(c) for c in row))


def _sphere_sample(model, n, limit):
    words = sphere_array(model, n)
    if len(words) <= limit:
        return words
    pick = np.linspace(0, len(words) - 1, limit).round().astype(int)
    return words[np.unique(pick)]


def hch_audit(model: TreeModel, t: float, n_max: int, ceiling: float = 10.0,
              radial_limit: int = 1000, radial_tol: float = 1e-13) -> AuditReport:
    """phi_t(gamma) / phi_tilde_t(n) over spheres 1 <= n <= n_max, one row per n.

    A row holds the min and max of the ratio over the sphere (the whole sphere
    when it has at most ``radial_limit`` elements, else an evenly spaced
    deterministic sample).  Its admissible interval is
    [max_ratio / ceiling, min(min_ratio * ceiling, row_min + radial_tol)], so
    every row passes iff the global max/min stays below ``ceiling`` and each
    sphere is radial to ``radial_tol``.
    """
    rp = RepParameter(t)
    profile, per_n = [], []
    for n in range(1, n_max + 1):
        _, pt = phi_tilde(model, t, n)
        phis = np.array([spherical(rp, _row_word(model, row))
                         for row in _sphere_sample(model, n, radial_limit)])
        per_n.append((n, phis.min() / pt, phis.max() / pt, phis.max() - phis.min()))
        profile.append((t, n, float(phis[0]), pt, float(phis[0] / pt)))
    lo = min(r[1] for r in per_n)
    hi = max(r[2] for r in per_n)
    rep = AuditReport("hch_audit", model.name)
    for n, a, b, _ in per_n:
        rep.add({"t": t, "n": n}, a, b, hi / ceiling, min(lo * ceiling, a + radial_tol))
    rep.tables["spherical_profile"] = (("t", "n", "phi", "phi_tilde", "ratio"), profile)
    rep.extra.update(ratios=np.array([r[4] for r in profile]), spreads=[r[3] for r in per_n],
                     interval=(lo, hi), max_over_min=hi / lo)
    return rep


# -- group algebra ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupAverage:
    """A finitely supported weight function f on the group, acting as sum f(g) pi_t(g).

    ``radius`` is set for uniform sphere averages; those are applied through the
    sphere recursion lambda_1 lambda_n = lambda_(n+1) + c lambda_(n-1).
    """

    support: tuple
    weights: np.ndarray
    radius: int | None = None
    C: float | None = None

    @property
    def model(self):
        return self.support[0].model

    @classmethod
    def dirac(cls, g: Word):
        return cls((g,), np.ones(1))

    @classmethod
    def sphere(cls, model: TreeModel, n: int):
        words = tuple(_row_word(model, row) for row in sphere_array(model, n))
        size = len(words)
        return cls(words, np.full(size, 1.0 / size), radius=n, C=1.0)

    @classmethod
    def sphere_lazy(cls, model: TreeModel, n: int):
        """Uniform sphere average without materializing its support."""
        return cls((model.identity(),) if n == 0 else (word_at(model, n, 0),),
                   np.ones(1), radius=n, C=1.0)

    def check(self):
        """The reflected average g -> f(g^-1)."""
        if self.radius is not None:
            return self
        return GroupAverage(tuple(inverse(g) for g in self.support), self.weights.copy())

    @property
    def span(self):
        return self.radius if self.radius is not None else max(len(g) for g in self.support)


def _sphere_sum(model: TreeModel, t: float, V: np.ndarray, N: int, n: int) -> np.ndarray:
    """Unnormalized sum over the sphere of radius n of pi_t(gamma) V; depth N + n."""
    if n == 0:
        return V
    letters = [(c,) for c in range(model.b)]

    def lam1(X, depth):
        return sum(pi_values(model, t, c, X, depth) for c in letters)

    prev, cur = V, lam1(V, N)
    for k in range(1, n):
        c = model.b if k == 1 else model.g
        nxt = lam1(cur, N + k) - c * refine_values(model, prev, N + k - 1, N + k + 1)
        prev, cur = cur, nxt
    return cur


def average_values(model: TreeModel, t: float, f: GroupAverage, V: np.ndarray, N: int) -> np.ndarray:
    """pi_t(f) applied to depth-N values; result at depth N + f.span."""
    if f.radius is not None:
        return _sphere_sum(model, t, V, N, f.radius) / model.sphere_size(f.radius)
    span = f.span
    out = None
    for g, wt in zip(f.support, f.weights):
        part = pi_values(model, t, g.letters, V, N)
        part = refine_values(model, part, N + len(g), N + span)
        out = wt * part if out is None else out + wt * part
    return out


def apply_average(rp: RepParameter, f: GroupAverage, v: CylinderFunction) -> CylinderFunction:
    vals = average_values(v.model, rp.t, f, v.values, v.depth)
    return CylinderFunction(v.model, v.depth + f.span, vals)


def operator_norm(rp: RepParameter, f: GroupAverage, r: float, input_depth: int = 1) -> float:
    """Norm of pi_t(f) on L^r restricted to depth-``input_depth`` cylinder functions.

    The matrix from depth-``input_depth`` to depth ``input_depth + span`` is
    weighted by cylinder masses.  For nonnegative f the r = 1 and r = inf
    values are the exact operator norms as soon as the relevant row/column
    sums are constant on input cylinders; r = 2 is the largest singular value
    of the weighted matrix.
    """
    model = f.model
    if r not in (1, 2) and not math.isinf(r):
        raise ParameterError("operator_norm supports r in {1, 2, inf}; use sampled probes otherwise")
    n_in = dim(model, input_depth)
    M = average_values(model, rp.t, f, np.eye(n_in), input_depth)
    m_in = masses(model, input_depth)
    m_out = masses(model, input_depth + f.span)
    if math.isinf(r):
        return float(np.abs(M).sum(axis=1).max())
    if r == 1:
        return float(((np.abs(M) * m_out[:, None]).sum(axis=0) / m_in).max())
    A = np.sqrt(m_out)[:, None] * M / np.sqrt(m_in)[None, :]
    return float(math.sqrt(np.linalg.eigvalsh(A.T @ A).max()))


def pi_bound(model: TreeModel, t: float, length: int, r: float) -> float:
    if math.isinf(r):
        return math.exp(abs(0.5 + t) * model.Q * length)
    return math.exp(abs(r * (0.5 + t) - 1) * model.Q * length / r)


def pi_norm(rp: RepParameter, g: Word, r: float, trials: int = 64, seed: int = 0) -> float:
    """||pi_t(g)||_{r->r}: exact for r in {1, 2, inf}, a sampled lower bound otherwise."""
    depth = len(g) + 1
    if r in (1, 2) or math.isinf(r):
        return operator_norm(rp, GroupAverage.dirac(g), r, input_depth=depth)
    model = g.model
    n_in = dim(model, depth)
    rng = np.random.default_rng(seed)
    V = np.concatenate([np.eye(n_in), rng.standard_normal((n_in, trials))], axis=1)
    out = pi_values(model, rp.t, g.letters, V, depth)
    m_in, m_out = masses(model, depth), masses(model, depth + len(g))
    num = (np.abs(out) ** r * m_out[:, None]).sum(axis=0) ** (1 / r)
    den = (np.abs(V) ** r * m_in[:, None]).sum(axis=0) ** (1 / r)
    return float((num / den).max())


def pi_bound_audit(rp: RepParameter, g: Word, r: float) -> AuditReport:
    """Measured ||pi_t(g)||_{r->r} against exp(|r(1/2+t) - 1| Q |g| / r) (exp((1/2+t) Q |g|) at r = inf)."""
    model = g.model
    measured = pi_norm(rp, g, r)
    bound = pi_bound(model, rp.t, len(g), r)
    rep = AuditReport("pi_bound_audit", model.name)
    rep.add({"t": rp.t, "g": str(g), "r": r}, measured, measured, 0.0, bound * (1 + 1e-12))
    rep.extra.update(measured=measured, bound=bound)
    return rep
