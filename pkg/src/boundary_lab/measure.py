"""Cylinder discretization of the boundary and the Patterson-Sullivan measure.

The boundary of a tree model is the space of infinite reduced words.  The
depth-N cylinders (one per reduced word of length N) partition it, and the
Patterson-Sullivan probability gives each of them mass ``1 / (b g^(N-1))``.
Functions that are constant on depth-N cylinders form an exact finite
dimensional subspace of every L^p; ``CylinderFunction`` stores one value per
cylinder in enumeration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audit import AuditReport
from .errors import DomainError, ResourceError
from .tree import (TreeModel, Word, common_prefix, index_of, shadow_cylinder,
                   sphere_array, word_at, words_array)


def level_mass(model: TreeModel, m: int) -> float:
    """Mass of any depth-m cylinder."""
    if m == 0:
        return 1.0
    return 1.0 / (model.b * model.g ** (m - 1))


def ps_mass(w: Word) -> float:
    """Patterson-Sullivan mass of the cylinder [w]; the empty word is the whole boundary."""
    return level_mass(w.model, len(w))


def dim(model: TreeModel, N: int) -> int:
    return model.sphere_size(N)


def check_depth(model: TreeModel, N: int):
    if N < 0:
        raise DomainError("depth must be nonnegative")
    if N > model.max_depth:
        raise ResourceError(
            f"cylinder depth {N} exceeds max_depth={model.max_depth} "
            f"(dimension {dim(model, N)})", cap="max_depth", value=N)


@lru_cache(maxsize=64)
def masses(model: TreeModel, N: int) -> np.ndarray:
    check_depth(model, N)
    out = np.full(dim(model, N), level_mass(model, N))
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class CylinderComplex:
    """The depth-N cylinders with their enumeration index."""

    model: TreeModel
    depth: int

    @property
    def dim(self):
        return dim(self.model, self.depth)

    @property
    def words(self) -> np.ndarray:
        return words_array(self.model, self.depth)

    @property
    def masses(self) -> np.ndarray:
        return masses(self.model, self.depth)

    def index(self, w: Word) -> int:
        if len(w) != self.depth:
            raise DomainError(f"word {w} is not a depth-{self.depth} cylinder")
        self.model._check(w)
        return index_of(self.model, w.letters)

    def word(self, i: int) -> Word:
        return word_at(self.model, self.depth, i)

    def children(self, i: int) -> range:
        f = self.model.b if self.depth == 0 else self.model.g
        return range(i * f, (i + 1) * f)


def cylinders(model: TreeModel, N: int) -> CylinderComplex:
    if N < 1:
        raise DomainError("cylinder complexes start at depth 1")
    check_depth(model, N)
    return CylinderComplex(model, N)


def block_factor(model: TreeModel, N: int, N2: int) -> int:
    """Number of depth-N2 descendants of a depth-N cylinder."""
    return dim(model, N2) // dim(model, N)


@dataclass(frozen=True, eq=False)
class CylinderFunction:
    """A function on the boundary that is constant on depth-N cylinders."""

    model: TreeModel
    depth: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (dim(self.model, self.depth),):
            raise DomainError(
                f"expected {dim(self.model, self.depth)} values at depth {self.depth}, "
                f"got shape {vals.shape}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, model, c=1.0, depth=0):
        return cls(model, depth, np.full(dim(model, depth), float(c)))

    @classmethod
    def indicator(cls, w: Word, depth=None):
        model = w.model
        depth = len(w) if depth is None else depth
        if depth < len(w):
            raise DomainError("indicator depth below the cylinder's own depth")
        vals = np.zeros(dim(model, depth))
        f = block_factor(model, len(w), depth)
        i = index_of(model, w.letters)
        vals[i * f:(i + 1) * f] = 1.0
        return cls(model, depth, vals)

    @property
    def masses(self):
        return masses(self.model, self.depth)

    def refine(self, N2):
        return refine(self, N2)

    def coarsen(self, N2):
        """Conditional expectation onto depth-N2 cylinders (N2 <= depth)."""
        if N2 > self.depth:
            raise DomainError("coarsen target deeper than the function")
        f = block_factor(self.model, N2, self.depth)
        blocks = self.values.reshape(-1, f)
        # equal masses at one depth: a plain mean, exact on constant blocks
        lo = blocks.min(axis=1)
        vals = np.where(lo == blocks.max(axis=1), lo, blocks.mean(axis=1))
        return CylinderFunction(self.model, N2, vals)

    def integral(self):
        return float(np.dot(self.values, self.masses))

    def norm(self, r=2.0):
        return lp_norm(self.values, self.masses, r)

    def _binary(self, other, op):
        if isinstance(other, CylinderFunction):
            if other.model != self.model:
                raise DomainError("cylinder functions from different models")
            N = max(self.depth, other.depth)
            return CylinderFunction(self.model, N, op(refine(self, N).values, refine(other, N).values))
        return CylinderFunction(self.model, self.depth, op(self.values, float(other)))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __neg__(self):
        return CylinderFunction(self.model, self.depth, -self.values)

    def value_at(self, w: Word) -> float:
        """Value on the cylinder [w] (|w| >= depth), or its average if [w] is coarser."""
        if len(w) >= self.depth:
            return float(self.values[index_of(self.model, w.letters[: self.depth])])
        f = block_factor(self.model, len(w), self.depth)
        i = index_of(self.model, w.letters)
        return float(self.values[i * f:(i + 1) * f].mean())


def lp_norm(values, weights, r):
    a = np.abs(values)
    if math.isinf(r):
        return float(a.max())
    return float(np.dot(a ** r, weights) ** (1.0 / r))


def refine_values(model: TreeModel, values: np.ndarray, N: int, N2: int) -> np.ndarray:
    """Repeat each depth-N value over its depth-N2 descendants (axis 0)."""
    if N2 < N:
        raise DomainError("refine target shallower than the function")
    check_depth(model, N2)
    if N2 == N:
        return values
    return np.repeat(values, block_factor(model, N, N2), axis=0)


def refine(v: CylinderFunction, N2: int) -> CylinderFunction:
    return CylinderFunction(v.model, N2, refine_values(v.model, v.values, v.depth, N2))


def pairing(v: CylinderFunction, w: CylinderFunction) -> float:
    """Integral of v w against the Patterson-Sullivan measure."""
    if v.model != w.model:
        raise DomainError("cylinder functions from different models")
    N = max(v.depth, w.depth)
    a = refine_values(v.model, v.values, v.depth, N)
    b = refine_values(v.model, w.values, w.depth, N)
    return float(np.dot(a * b, masses(v.model, N)))


def visual_distance(w1: Word, w2: Word):
    """exp(-epsilon * (xi, eta)_o) for xi in [w1], eta in [w2].

    Returns ``None`` when one cylinder contains the other: the distance is then
    not constant on the pair and the caller must refine.
    """
    if w1.model != w2.model:
        raise DomainError("cylinders from different models")
    m = common_prefix(w1.letters, w2.letters)
    if m >= min(len(w1), len(w2)):
        return None
    return math.exp(-w1.model.epsilon * m)


def prefix_indices(model: TreeModel, N: int, m: int) -> np.ndarray:
    """Depth-m ancestor index of every depth-N cylinder."""
    return np.arange(dim(model, N)) // block_factor(model, m, N)


# -- audits ------------------------------------------------------------------


def ahlfors_audit(model: TreeModel, N: int, steps: int = 8) -> AuditReport:
    """Closed-ball masses against r^D for every depth-N cylinder and a radius grid.

    Radii are ``exp(-epsilon (m - j/steps))`` for 1 <= m <= N and 0 <= j < steps;
    ``j = 0`` are the grade radii.  Radii above the diameter 1 are excluded.
    """
    check_depth(model, N)
    eps, D = model.epsilon, model.D
    mass_N = masses(model, N)
    ratios, grade = [], []
    for m in range(1, N + 1):
        block = block_factor(model, m, N)
        ball = mass_N.reshape(-1, block).sum(axis=1)  # closed ball = ancestor cylinder
        ball = np.repeat(ball, block)
        for j in range(steps):
            level = m - j / steps
            r = math.exp(-eps * level)
            if r > 1.0:
                continue
            rho = ball / r ** D
            ratios.append((rho.min(), rho.max()))
            if j == 0:
                grade.append((m, rho.min(), rho.max()))
    lo = min(a for a, _ in ratios)
    hi = max(b for _, b in ratios)
    rep = AuditReport("ahlfors_audit", model.name)
    rep.add({"N": N, "epsilon": eps, "radii": "grid"}, lo, hi, 1.0 / model.b, model.g ** 2 / model.b)
    g_lo = min(x[1] for x in grade)
    g_hi = max(x[2] for x in grade)
    target = model.g / model.b
    rep.add({"N": N, "epsilon": eps, "radii": "grade"}, g_lo, g_hi, target - 1e-12, target + 1e-12)
    rep.extra["grade"] = grade
    return rep


def shadow_measure_audit(model: TreeModel, n: int, r: float) -> AuditReport:
    """nu(O_r(o, gamma o)) e^{Q |gamma|} over the sphere of radius n."""
    if r <= 0:
        raise DomainError("shadow radius must be positive")
    vals = []
    for row in sphere_array(model, n):
        x = Word(model, tuple(int(c) for c in row))
        vals.append(level_mass(model, len(shadow_cylinder(x, r))) if len(x) else 1.0)
    vals = np.array(vals) * math.exp(model.Q * n)
    rep = AuditReport("shadow_measure_audit", model.name)
    rep.add({"n": n, "r": r}, vals.min(), vals.max(), 1.0 / model.g,
            float(model.g ** (math.ceil(r) + 1)))
    rep.extra["spread"] = float(vals.max() - vals.min())
    return rep


def shadow_multiplicity(model: TreeModel, n: int, r: float) -> np.ndarray:
    """For each depth-n cylinder, the number of sphere-n shadows containing it."""
    if n == 0:
        return np.ones(1, dtype=np.int64)
    words = sphere_array(model, n)
    depth = len(shadow_cylinder(Word(model, tuple(int(c) for c in words[0])), r))
    anc = prefix_indices(model, n, depth)
    counts = np.bincount(anc, minlength=dim(model, depth))
    # sphere words are exactly the depth-n cylinders, in the same order
    return counts[anc]


def covering_audit(model: TreeModel, n: int, r: float) -> AuditReport:
    """Covering of the boundary by sphere-n shadows and its multiplicity."""
    if r < 1:
        raise DomainError("covering audit requires r >= 1")
    mult = shadow_multiplicity(model, n, r)
    covered = bool(mult.min() >= 1)
    rep = AuditReport("covering_audit", model.name)
    rep.add({"n": n, "r": r, "item": "covered"}, float(covered), float(covered), 1.0, 1.0)
    rep.add({"n": n, "r": r, "item": "multiplicity"}, int(mult.min()), int(mult.max()))
    rep.extra.update(covered=covered, multiplicity=int(mult.max()))
    return rep


def random_function(model: TreeModel, N: int, rng, decay: float | None = None) -> CylinderFunction:
    """A random signed depth-N cylinder function.

    With ``decay=None`` the values are iid standard normal.  Otherwise the
    function is the multiscale sum of iid normal depth-j layers scaled by
    ``decay**j`` for j = 0..N; draws are consumed layer by layer, so the same
    generator state yields nested functions for increasing N.
    """
    if decay is None:
        return CylinderFunction(model, N, rng.standard_normal(dim(model, N)))
    vals = np.zeros(dim(model, N))
    for j in range(N + 1):
        layer = rng.standard_normal(dim(model, j))
        vals += decay ** j * np.repeat(layer, block_factor(model, j, N))
    return CylinderFunction(model, N, vals)
