"""Word calculus on tree models of hyperbolic groups.

Two families are supported, both acting simply transitively on a regular tree:

* ``free:k``              the free group F_k, letters ``a A b B ...`` (upper case = inverse);
* ``free_product:2,2,2``  a free product of K >= 3 copies of Z/2, letters ``a b c ...``
  (every letter is its own inverse).

In both cases a word is reduced iff no letter is followed by its inverse, there
are ``b`` letters, every letter has ``g = b - 1`` admissible successors and the
word sphere of radius n >= 1 has ``b * g**(n-1)`` elements.  The Cayley graph is
a tree, so the hyperbolicity constant, the rough-geodesic constant and the
upper-Gromov constant all vanish.

Reduced words double as cylinder addresses on the boundary.  Depth-N words are
enumerated length-then-lexicographically, which coincides with the mixed-radix
index ``r_1 g^(N-1) + r_2 g^(N-2) + ... + r_N`` where ``r_1`` is the rank of the
first letter and ``r_i`` the rank of the i-th letter among the successors of the
(i-1)-th.  All array code relies on that identity: the depth-m prefix of the
depth-N word with index ``i`` has index ``i // g**(N-m)``.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, RefinementRequired, ResourceError

# tree models: hyperbolicity, rough-geodesic and upper-Gromov constants
DELTA = 0.0
C_X = 0.0
M_UPPER = 0.0


@dataclass(frozen=True)
class TreeModel:
    """A free group or a free product of Z/2's acting on its Cayley tree."""

    kind: str
    rank: int
    epsilon: float = 1.0
    max_depth: int = 13
    dense_max_depth: int = 7
    max_sphere_size: int = 3_000_000

    def __post_init__(self):
        if self.kind == "free":
            if self.rank < 2:
                raise DomainError("free groups need rank >= 2 (non-elementary)")
        elif self.kind == "free_product":
            if self.rank < 3:
                raise DomainError("free products of Z/2 need at least 3 factors")
        else:
            raise DomainError(f"unknown model kind {self.kind!r}")
        if not 0 < self.epsilon <= 1:
            raise DomainError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.rank > 13:
            raise DomainError("at most 13 generators (single-character letters)")

    @classmethod
    def free(cls, k, **kw):
        return cls("free", k, **kw)

    @classmethod
    def free_product(cls, orders, **kw):
        orders = list(orders)
        if any(o != 2 for o in orders):
            raise DomainError(
                "only free products of Z/2 act on their Cayley tree; "
                f"got factor orders {orders}")
        return cls("free_product", len(orders), **kw)

    @classmethod
    def parse(cls, text, **kw):
        """Parse ``free:2`` or ``free_product:2,2,2``."""
        kind, _, arg = text.strip().partition(":")
        kind = kind.strip()
        try:
            if kind == "free":
                return cls.free(int(arg), **kw)
            if kind == "free_product":
                return cls.free_product([int(a) for a in arg.split(",")], **kw)
        except ValueError as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"cannot parse model {text!r}") from exc
        raise DomainError(f"unknown model {text!r}")

    @property
    def name(self):
        if self.kind == "free":
            return f"free:{self.rank}"
        return "free_product:" + ",".join(["2"] * self.rank)

    @cached_property
    def symbols(self) -> tuple[str, ...]:
        low = string.ascii_lowercase[: self.rank]
        if self.kind == "free":
            return tuple(s for c in low for s in (c, c.upper()))
        return tuple(low)

    @cached_property
    def inv(self) -> np.ndarray:
        if self.kind == "free":
            inv = np.arange(self.b) ^ 1
        else:
            inv = np.arange(self.b)
        inv.flags.writeable = False
        return inv

    @cached_property
    def _code(self):
        return {s: i for i, s in enumerate(self.symbols)}

    @property
    def b(self) -> int:
        """Number of letters (= size of the unit sphere)."""
        return 2 * self.rank if self.kind == "free" else self.rank

    @property
    def g(self) -> int:
        """Number of admissible successors of a letter (branching factor)."""
        return self.b - 1

    @property
    def Q(self) -> float:
        """Critical exponent log g."""
        return math.log(self.g)

    @property
    def D(self) -> float:
        """Dimension of the Patterson-Sullivan measure for the visual metric."""
        return self.Q / self.epsilon

    def sphere_size(self, n):
        return 1 if n == 0 else self.b * self.g ** (n - 1)

    # -- words ---------------------------------------------------------------

    def codes(self, letters) -> list[int]:
        if isinstance(letters, Word):
            self._check(letters)
            return list(letters.letters)
        out = []
        for s in letters:
            if isinstance(s, (int, np.integer)):
                if not 0 <= s < self.b:
                    raise DomainError(f"letter code {s} outside alphabet of {self.name}")
                out.append(int(s))
            elif s in self._code:
                out.append(self._code[s])
            else:
                raise DomainError(f"unknown letter {s!r} for model {self.name}")
        return out

    def word(self, letters="") -> "Word":
        """Reduce a raw letter sequence (string or codes) to a Word."""
        return reduce(self, letters)

    def identity(self) -> "Word":
        return Word(self, ())

    def _check(self, w):
        if w.model != self:
            raise DomainError(f"word from {w.model.name} used with {self.name}")

    def successor_rank(self, prev, letter):
        j = self.inv[prev]
        return letter - (letter > j)

    def successor_letter(self, prev, rank):
        j = self.inv[prev]
        return rank + (rank >= j)


@dataclass(frozen=True)
class Word:
    """A reduced word; also used as the address of a boundary cylinder."""

    model: TreeModel = field(repr=False)
    letters: tuple[int, ...]

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return "".join(self.model.symbols[c] for c in self.letters)

    def __repr__(self):
        return f"Word({str(self)!r})"

    def __mul__(self, other):
        return multiply(self, other)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.model, self.letters[item])
        return self.letters[item]

    def inverse(self):
        return inverse(self)

    def is_prefix_of(self, other):
        return other.letters[: len(self)] == self.letters


def reduce(model: TreeModel, letters) -> Word:
    """Free reduction by a single left-to-right stack pass."""
    stack: list[int] = []
    inv = model.inv
    for c in model.codes(letters):
        if stack and inv[stack[-1]] == c:
            stack.pop()
        else:
            stack.append(c)
    return Word(model, tuple(stack))


def multiply(g: Word, h: Word) -> Word:
    if g.model != h.model:
        raise DomainError(f"cannot multiply words of {g.model.name} and {h.model.name}")
    return reduce(g.model, g.letters + h.letters)


def inverse(g: Word) -> Word:
    inv = g.model.inv
    return Word(g.model, tuple(int(inv[c]) for c in reversed(g.letters)))


def common_prefix(x: Sequence[int], y: Sequence[int]) -> int:
    m = 0
    for a, b in zip(x, y):
        if a != b:
            break
        m += 1
    return m


def gromov(x: Word, y: Word) -> int:
    """Gromov product (x, y)_o = (|x| + |y| - |x^-1 y|) / 2 at the identity."""
    d = len(multiply(inverse(x), y))
    twice = len(x) + len(y) - d
    assert twice % 2 == 0
    return twice // 2


def busemann(w: Word, g: Word) -> int:
    """beta_xi(o, g o) for every xi in the cylinder [w].

    The value is -|g| + 2 (xi, g)_o, constant on [w] once |w| > |g|.
    """
    if len(w) <= len(g):
        raise RefinementRequired(
            f"cylinder depth {len(w)} too coarse for |g| = {len(g)}", len(g) + 1)
    return -len(g) + 2 * common_prefix(w.letters, g.letters)


def shadow_cylinder(x: Word, r: float) -> Word:
    """Cylinder equal to the shadow O_r(o, x o); the empty word means the whole boundary."""
    if r <= 0:
        raise DomainError("shadow radius must be positive")
    if r >= len(x):
        return x.model.identity()
    depth = math.ceil(len(x) - r - 1e-12)
    return x[:depth]


# -- enumeration -------------------------------------------------------------


@lru_cache(maxsize=64)
def words_array(model: TreeModel, N: int) -> np.ndarray:
    """All reduced words of length N, one row each, in enumeration order."""
    if N < 0:
        raise DomainError("depth must be nonnegative")
    size = model.sphere_size(N)
    if size > model.max_sphere_size:
        raise ResourceError(
            f"sphere of radius {N} has {size} elements, above max_sphere_size="
            f"{model.max_sphere_size}", cap="max_sphere_size", value=size)
    if N == 0:
        out = np.zeros((1, 0), dtype=np.int8)
        out.flags.writeable = False
        return out
    arr = np.arange(model.b, dtype=np.int8)[:, None]
    ranks = np.arange(model.g, dtype=np.int8)
    for _ in range(1, N):
        last = arr[:, -1]
        nxt = ranks[None, :] + (ranks[None, :] >= model.inv[last][:, None])
        arr = np.concatenate(
            [np.repeat(arr, model.g, axis=0), nxt.reshape(-1, 1).astype(np.int8)], axis=1)
    arr.flags.writeable = False
    return arr


_PRIMED: dict = {}


def prime_sphere(model: TreeModel, n: int, arr: np.ndarray):
    """Install a precomputed sphere (e.g. loaded from the disk cache)."""
    _PRIMED[(model.kind, model.rank, n)] = arr


def sphere_array(model: TreeModel, n: int) -> np.ndarray:
    arr = _PRIMED.get((model.kind, model.rank, n))
    if arr is not None:
        return arr
    return words_array(model, n)


def sphere_band(model: TreeModel, n: int, R: float = 1.0) -> list[Word]:
    """All group elements with n R <= |gamma| < (n+1) R, length-then-lexicographic."""
    if n < 0:
        raise DomainError("band index must be nonnegative")
    if R <= 0:
        raise DomainError("band width R must be positive")
    lo = math.ceil(n * R - 1e-12)
    hi = math.ceil((n + 1) * R - 1e-12)
    lengths = range(lo, hi)
    total = sum(model.sphere_size(L) for L in lengths)
    if total > model.max_sphere_size:
        raise ResourceError(
            f"band {n} (R={R}) has {total} elements, above max_sphere_size="
            f"{model.max_sphere_size}", cap="max_sphere_size", value=total)
    out = []
    for L in lengths:
        out.extend(Word(model, tuple(int(c) for c in row)) for row in sphere_array(model, L))
    return out


def indices_of(model: TreeModel, arr: np.ndarray) -> np.ndarray:
    """Mixed-radix enumeration index of each row of a (M, N) letter array."""
    arr = np.asarray(arr)
    M, N = arr.shape
    if N == 0:
        return np.zeros(M, dtype=np.int64)
    idx = arr[:, 0].astype(np.int64)
    g = model.g
    inv = model.inv
    for i in range(1, N):
        prev = arr[:, i - 1]
        cur = arr[:, i].astype(np.int64)
        idx = idx * g + cur - (cur > inv[prev])
    return idx


def index_of(model: TreeModel, letters: Iterable[int]) -> int:
    letters = list(letters)
    if not letters:
        return 0
    idx = letters[0]
    for prev, cur in zip(letters, letters[1:]):
        idx = idx * model.g + model.successor_rank(prev, cur)
    return int(idx)


def word_at(model: TreeModel, N: int, index: int) -> Word:
    if N == 0:
        return model.identity()
    digits = []
    for _ in range(N - 1):
        index, r = divmod(index, model.g)
        digits.append(r)
    first = index
    if not 0 <= first < model.b:
        raise DomainError("index outside the depth-N complex")
    letters = [first]
    for r in reversed(digits):
        letters.append(int(model.successor_letter(letters[-1], r)))
    return Word(model, tuple(letters))


def successors(model: TreeModel, prev: int | None) -> list[int]:
    """Admissible next letters after ``prev`` (all letters at the root)."""
    if prev is None:
        return list(range(model.b))
    j = int(model.inv[prev])
    return [c for c in range(model.b) if c != j]


# -- counting reduced words with fixed ends ------------------------------------


def count_with_ends(model: TreeModel, n: int, prefix: Sequence[int], suffix: Sequence[int]) -> int:
    """Number of reduced words of length n starting with ``prefix`` and ending with ``suffix``.

    Requires n >= len(prefix) + len(suffix); uses a last-letter transfer count.
    """
    a, c = len(prefix), len(suffix)
    if n < a + c:
        raise DomainError("prefix and suffix overlap")
    b, inv = model.b, model.inv
    free_len = n - c
    if free_len == 0:
        return 1
    if a == 0:
        counts = np.ones(b, dtype=object)
        length = 1
    else:
        counts = np.zeros(b, dtype=object)
        counts[prefix[-1]] = 1
        length = a
    for _ in range(length, free_len):
        total = counts.sum()
        counts = np.array([total - counts[inv[y]] for y in range(b)], dtype=object)
    total = counts.sum()
    if c == 0:
        return int(total)
    return int(total - counts[inv[suffix[0]]])


def word_with_ends(model: TreeModel, n: int, prefix: Sequence[int], suffix: Sequence[int]) -> Word:
    """Some reduced word of length n with the given prefix and suffix."""
    inv = model.inv
    letters = list(prefix)
    middle = n - len(prefix) - len(suffix)
    for i in range(middle):
        banned = set()
        if letters:
            banned.add(int(inv[letters[-1]]))
        if i == middle - 1 and suffix:
            banned.add(int(inv[suffix[0]]))
        letters.append(min(set(range(model.b)) - banned))
    letters.extend(suffix)
    w = Word(model, tuple(letters))
    if reduce(model, letters).letters != w.letters:
        raise DomainError("prefix and suffix cannot be joined into a reduced word")
    return w
