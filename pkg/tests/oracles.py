"""Independent reference computations on F_k, written on plain strings.

Nothing here imports the package: words are str, inverses are case swaps,
cylinders are enumerated with itertools, and every boundary integral is a
uniform sum over deep cylinders.
"""

import itertools
import math

import numpy as np


def letters(k):
    out = []
    for c in "abcdefghijklm"[:k]:
        out += [c, c.upper()]
    return out


def inv_letter(c):
    return c.swapcase()


def reduce_str(w):
    out = []
    for c in w:
        if out and out[-1] == c.swapcase():
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def inverse_str(w):
    return "".join(c.swapcase() for c in reversed(w))


def is_reduced(w):
    return all(a != b.swapcase() for a, b in zip(w, w[1:]))


def sphere(k, n):
    """Reduced words of length n, length-then-lexicographic in the a A b B ... order."""
    return ["".join(p) for p in itertools.product(letters(k), repeat=n) if is_reduced("".join(p))]


def gromov_str(x, y):
    return (len(x) + len(y) - len(reduce_str(inverse_str(x) + y))) // 2


def mass(k, w):
    if not w:
        return 1.0
    return 1.0 / (2 * k * (2 * k - 1) ** (len(w) - 1))


def busemann_str(xi, g):
    """beta_xi(o, g o) = |xi_m| - |g^-1 xi_m| for a long enough prefix xi_m."""
    return len(xi) - len(reduce_str(inverse_str(g) + xi))


def pi_oracle(k, t, g, vals, N):
    """(pi_t(g) v) on depth N + |g| cylinders; vals maps depth-N words to values."""
    Q = math.log(2 * k - 1)
    out = {}
    for xi in sphere(k, N + len(g)):
        src = reduce_str(inverse_str(g) + xi)[:N]
        rn = math.exp(Q * busemann_str(xi, g))
        out[xi] = rn ** (0.5 + t) * vals[src]
    return out


def integral(k, vals):
    return sum(v * mass(k, w) for w, v in vals.items())


def lp(k, vals, r):
    if math.isinf(r):
        return max(abs(v) for v in vals.values())
    return sum(abs(v) ** r * mass(k, w) for w, v in vals.items()) ** (1 / r)


def refine_oracle(k, vals, N2):
    N = len(next(iter(vals)))
    return {w: vals[w[:N]] for w in sphere(k, N2)}


def pairing_oracle(k, v, w):
    N = max(len(next(iter(v))), len(next(iter(w))))
    v2, w2 = refine_oracle(k, v, N), refine_oracle(k, w, N)
    return sum(v2[x] * w2[x] * mass(k, x) for x in v2)


def spherical_uniform(k, t, g):
    """phi_t(g) by summation at depth |g| + 1 (pi_t(g) 1 paired with 1)."""
    one = {"": 1.0}
    return integral(k, pi_oracle(k, t, g, one, 0))


def phi0_closed(n):
    """phi_0(n) on F_2."""
    return (1 + n / 2) * 3 ** (-n / 2)


def sigma_closed(t):
    """sigma_t on F_2 as a geometric series: 3/4 + (1/2) 3^{-2t} / (1 - 3^{-2t})."""
    x = 3 ** (-2 * t)
    return 0.75 + 0.5 * x / (1 - x)


def kernel_pair_sum(k, t, w, M):
    """Sum of k(xi, eta) nu nu over pairs of distinct depth-M subcells of [w]."""
    Q = math.log(2 * k - 1)
    cells = [x for x in sphere(k, M) if x.startswith(w)]
    m = mass(k, cells[0])
    s = 0.0
    for x, y in itertools.product(cells, repeat=2):
        if x != y:
            s += math.exp((1 - 2 * t) * Q * gromov_str(x, y)) * m * m
    return s


def aitken(a, b, c):
    return c - (c - b) ** 2 / ((c - b) - (b - a))


def sphere_transfer_count(n, first, last):
    """Reduced words of length n in F_2 with given first and last letters (matrix power)."""
    L = letters(2)
    A = np.array([[0 if y == x.swapcase() else 1 for y in L] for x in L], dtype=object)
    P = np.identity(4, dtype=object)
    for _ in range(n - 1):
        P = P.dot(A)
    return int(P[L.index(first), L.index(last)])


def lorentz_by_distribution(values, weights, p, q):
    """||f||_{p,q} from the distribution function lambda(s) = nu(|f| > s).

    q * int s^{q-1} lambda(s)^{q/p} ds, integrated exactly between consecutive
    distinct levels; q = inf gives sup_s s lambda(s)^{1/p}.
    """
    a = np.abs(np.asarray(values, dtype=float))
    w = np.asarray(weights, dtype=float)
    levels = sorted(set(a.tolist()) | {0.0}, reverse=True)
    if math.isinf(q):
        best = 0.0
        for i in range(len(levels) - 1):
            # on (levels[i+1], levels[i]) lambda equals nu(|f| >= levels[i])
            best = max(best, levels[i] * w[a >= levels[i]].sum() ** (1 / p))
        return best
    total = 0.0
    for i in range(len(levels) - 1):
        hi, lo = levels[i], levels[i + 1]
        total += (hi ** q - lo ** q) * w[a >= hi].sum() ** (q / p)
    return total ** (1 / q)
