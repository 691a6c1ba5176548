"""Dyadic cubes, the directional Haar system, and conditional expectations.

The ``L^inf``-normalized Haar function attached to a cube ``Q`` and a
nonzero sign pattern ``eps`` is the tensor product of 1-D Haar functions
(where ``eps_i = 1``) and indicators (where ``eps_i = 0``).  Coefficients
are stored in the expansion normalization ``u_Q = <u, h_Q> / |Q|``, so a
function decomposes as ``u = mean + sum u_Q h_Q``.

Analysis and synthesis run as an O(N log N) pyramid over scales; the
brute-force pairing against explicit basis functions is kept in the test
suite as an oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .grid import GridFunction

__all__ = [
    "DyadicCube",
    "SignPattern",
    "HaarCoefficients",
    "all_sign_patterns",
    "haar_function",
    "haar_analysis",
    "haar_synthesis",
    "conditional_expectation",
    "scale_coefficients",
    "single_scale_synthesis",
]


@dataclass(frozen=True)
class DyadicCube:
    """Cube ``prod_i [k_i 2^-j, (k_i+1) 2^-j)`` at scale ``j`` on the torus."""

    j: int
    k: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(int(c) for c in self.k))
        if self.j < 0:
            raise ValueError(f"negative cube scale {self.j}")
        if not all(0 <= c < 2**self.j for c in self.k):
            raise ValueError(f"cube coords {self.k} out of range at scale {self.j}")

    @property
    def n(self) -> int:
        return len(self.k)

    @property
    def sidelength(self) -> float:
        return 2.0**-self.j

    @property
    def measure(self) -> float:
        return 2.0 ** (-self.j * self.n)

    def ancestor(self, lam: int) -> "DyadicCube":
        """The cube ``2^lam`` levels coarser containing this one."""
        if lam > self.j:
            raise ValueError("no ancestor above scale 0")
        return DyadicCube(self.j - lam, tuple(c >> lam for c in self.k))


@dataclass(frozen=True)
class SignPattern:
    """Element of ``{0,1}^n``; nonzero patterns select Haar directions."""

    eps: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(int(b) for b in self.eps))
        if not all(b in (0, 1) for b in self.eps):
            raise ValueError(f"sign pattern bits must be 0/1, got {self.eps}")

    @property
    def n(self) -> int:
        return len(self.eps)

    @property
    def is_zero(self) -> bool:
        return not any(self.eps)


def all_sign_patterns(n: int) -> list[SignPattern]:
    """The 2^n - 1 nonzero patterns, in lexicographic order."""
    return [
        SignPattern(eps)
        for eps in itertools.product((0, 1), repeat=n)
        if any(eps)
    ]


def _as_pattern(eps) -> SignPattern:
    return eps if isinstance(eps, SignPattern) else SignPattern(tuple(eps))


def haar_function(Q: DyadicCube, eps, J: int) -> GridFunction:
    """Sample ``h_Q^(eps)`` on the ``2^J`` grid; support is exactly ``Q``."""
    eps = _as_pattern(eps)
    if eps.is_zero:
        raise ValueError("sign pattern must be nonzero for a Haar function")
    if eps.n != Q.n:
        raise ValueError("sign pattern dimension does not match cube")
    if Q.j >= J:
        raise ValueError(f"unresolvable scale: j={Q.j} needs J > {Q.j}, got {J}")
    N = 2**J
    cells = 2 ** (J - Q.j)
    axes = []
    for i in range(Q.n):
        line = np.zeros(N)
        start = Q.k[i] * cells
        if eps.eps[i] == 0:
            line[start : start + cells] = 1.0
        else:
            half = cells // 2
            line[start : start + half] = 1.0
            line[start + half : start + cells] = -1.0
        axes.append(line)
    vals = axes[0]
    for line in axes[1:]:
        vals = np.multiply.outer(vals, line)
    return GridFunction(Q.n, J, vals)


class HaarCoefficients:
    """Sparse view of the Haar spectrum, stored densely per scale.

    ``levels[j][eps] `` is an array of shape ``(2^j,)*n`` holding the
    expansion coefficients ``u_Q = <u, h_Q^(eps)> / |Q|`` for all cubes at
    scale ``j``; ``mean`` is the coefficient of the constant function.
    """

    def __init__(self, n: int, J: int, scale_range: tuple[int, int] | None = None,
                 includes_mean: bool = True):
        self.n = n
        self.J = J
        self.scale_range = scale_range if scale_range is not None else (0, J)
        self.includes_mean = includes_mean
        self.mean = 0.0
        self.levels: dict[int, dict[tuple[int, ...], np.ndarray]] = {}

    def _check_scale(self, j: int):
        lo, hi = self.scale_range
        if not lo <= j < hi:
            raise ValueError(f"scale {j} outside scale_range {self.scale_range}")

    def level(self, j: int, eps) -> np.ndarray:
        """Dense coefficient array at scale ``j`` for one pattern (zeros if absent)."""
        eps = _as_pattern(eps)
        self._check_scale(j)
        lev = self.levels.setdefault(j, {})
        if eps.eps not in lev:
            lev[eps.eps] = np.zeros((2**j,) * self.n)
        return lev[eps.eps]

    def set_level(self, j: int, eps, values: np.ndarray):
        eps = _as_pattern(eps)
        self._check_scale(j)
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (2**j,) * self.n:
            raise ValueError("coefficient array shape mismatch")
        self.levels.setdefault(j, {})[eps.eps] = values

    def get(self, Q: DyadicCube, eps) -> float:
        eps = _as_pattern(eps)
        lev = self.levels.get(Q.j)
        if lev is None or eps.eps not in lev:
            return 0.0
        return float(lev[eps.eps][Q.k])

    def items(self, tol: float = 0.0):
        """Yield ``((cube, pattern), value)`` for entries with ``|value| > tol``."""
        for j in sorted(self.levels):
            for eps in sorted(self.levels[j]):
                arr = self.levels[j][eps]
                for idx in np.argwhere(np.abs(arr) > tol):
                    k = tuple(int(c) for c in idx)
                    yield (DyadicCube(j, k), SignPattern(eps)), float(arr[k])

    def copy(self) -> "HaarCoefficients":
        out = HaarCoefficients(self.n, self.J, self.scale_range, self.includes_mean)
        out.mean = self.mean
        out.levels = {j: {e: a.copy() for e, a in lev.items()}
                      for j, lev in self.levels.items()}
        return out

    def norm2_sq(self) -> float:
        """Parseval sum ``mean^2 + sum u_Q^2 |Q|`` over stored entries."""
        total = self.mean**2 if self.includes_mean else 0.0
        for j, lev in self.levels.items():
            w = 2.0 ** (-j * self.n)
            for arr in lev.values():
                total += w * float(np.sum(arr**2))
        return total

    def write_csv(self, path):
        """Columns: j, k_1..k_n, eps_1..eps_n, value (mean as scale -1 row)."""
        with open(path, "w") as fh:
            cols = (["j"] + [f"k_{i+1}" for i in range(self.n)]
                    + [f"eps_{i+1}" for i in range(self.n)] + ["value"])
            fh.write(",".join(cols) + "\n")
            if self.includes_mean:
                zeros = ",".join(["0"] * (2 * self.n))
                fh.write(f"-1,{zeros},{self.mean!r}\n")
            for j in sorted(self.levels):
                for eps in sorted(self.levels[j]):
                    arr = self.levels[j][eps]
                    for idx in np.ndindex(arr.shape):
                        val = arr[idx]
                        if val != 0.0:
                            fh.write(
                                ",".join(str(c) for c in (j, *idx, *eps))
                                + f",{val!r}\n"
                            )

    @classmethod
    def read_csv(cls, path, n: int, J: int) -> "HaarCoefficients":
        out = cls(n, J)
        with open(path) as fh:
            fh.readline()
            for line in fh:
                parts = line.strip().split(",")
                j = int(parts[0])
                if j == -1:
                    out.mean = float(parts[-1])
                    continue
                k = tuple(int(x) for x in parts[1 : 1 + n])
                eps = tuple(int(x) for x in parts[1 + n : 1 + 2 * n])
                arr = out.level(j, SignPattern(eps))
                arr[k] = float(parts[-1])
        return out


def _corner_views(a: np.ndarray, n: int):
    """Views of ``a`` restricted to each child corner ``s in {0,1}^n``."""
    for s in itertools.product((0, 1), repeat=n):
        yield s, a[tuple(slice(c, None, 2) for c in s)]


def _block_mean(a: np.ndarray, n: int, factor: int) -> np.ndarray:
    """Mean over ``factor``-sized blocks along each of the n leading axes."""
    if factor == 1:
        return a
    m = a.shape[0] // factor
    shape = []
    for _ in range(n):
        shape.extend((m, factor))
    a = a.reshape(shape)
    for ax in range(n):
        a = a.mean(axis=ax + 1)
    return a


def haar_analysis(u: GridFunction) -> HaarCoefficients:
    """Full Haar spectrum of ``u`` via the pyramid scheme.

    Exact inverse of :func:`haar_synthesis`; coefficients carry the
    ``|Q|^{-1}`` expansion normalization.
    """
    if u.d != 1:
        raise ValueError("haar analysis supports scalar functions only")
    n, J = u.n, u.J
    out = HaarCoefficients(n, J)
    means = u.values
    for j in range(J - 1, -1, -1):
        corners = list(_corner_views(means, n))
        lev = {}
        for eps in itertools.product((0, 1), repeat=n):
            acc = None
            for s, view in corners:
                sign = (-1) ** sum(si * ei for si, ei in zip(s, eps))
                acc = sign * view if acc is None else acc + sign * view
            acc = acc / 2**n
            if any(eps):
                lev[eps] = acc
            else:
                means = acc
        out.levels[j] = lev
    out.mean = float(means.reshape(()))
    return out


def haar_synthesis(c: HaarCoefficients, n: int, J: int) -> GridFunction:
    """Reconstruct ``mean + sum u_Q h_Q^(eps)`` on the ``2^J`` grid."""
    if c.n != n:
        raise ValueError("dimension mismatch")
    if c.levels and max(c.levels) >= J:
        raise ValueError(
            f"unresolvable scale: coefficients at j={max(c.levels)} need J > {max(c.levels)}"
        )
    field = np.full((1,) * n, c.mean if c.includes_mean else 0.0)
    for j in range(J):
        nxt = np.empty((2 ** (j + 1),) * n)
        lev = c.levels.get(j, {})
        for s in itertools.product((0, 1), repeat=n):
            block = field.copy()
            for eps, arr in lev.items():
                sign = (-1) ** sum(si * ei for si, ei in zip(s, eps))
                block = block + sign * arr
            nxt[tuple(slice(si, None, 2) for si in s)] = block
        field = nxt
    return GridFunction(n, J, field)


def scale_coefficients(u: GridFunction, j: int, eps) -> np.ndarray:
    """Coefficients ``<u, h_Q^(eps)>/|Q|`` for all ``Q`` at one scale ``j``."""
    eps = _as_pattern(eps)
    if eps.is_zero:
        raise ValueError("sign pattern must be nonzero")
    if not 0 <= j < u.J:
        raise ValueError(f"unresolvable scale: j={j} at J={u.J}")
    n = u.n
    child_means = _block_mean(u.values, n, 2 ** (u.J - j - 1))
    acc = np.zeros((2**j,) * n)
    for s, view in _corner_views(child_means, n):
        sign = (-1) ** sum(si * ei for si, ei in zip(s, eps.eps))
        acc += sign * view
    return acc / 2**n


def single_scale_synthesis(coeffs: np.ndarray, j: int, eps, n: int, J: int) -> GridFunction:
    """Sample ``sum_{Q at scale j} c_Q h_Q^(eps)`` on the ``2^J`` grid."""
    eps = _as_pattern(eps)
    if eps.is_zero:
        raise ValueError("sign pattern must be nonzero")
    if j >= J:
        raise ValueError(f"unresolvable scale: j={j} at J={J}")
    child = np.empty((2 ** (j + 1),) * n)
    for s in itertools.product((0, 1), repeat=n):
        sign = (-1) ** sum(si * ei for si, ei in zip(s, eps.eps))
        child[tuple(slice(si, None, 2) for si in s)] = sign * coeffs
    reps = 2 ** (J - j - 1)
    vals = child
    for ax in range(n):
        vals = np.repeat(vals, reps, axis=ax)
    return GridFunction(n, J, vals)


def conditional_expectation(u: GridFunction, j: int) -> GridFunction:
    """Projection onto functions constant on scale-``j`` cubes (cell averages)."""
    if not 0 <= j <= u.J:
        raise ValueError(f"scale {j} out of range [0, {u.J}]")
    if j == u.J:
        return u
    if u.d != 1:
        raise ValueError("conditional expectation supports scalar functions only")
    factor = 2 ** (u.J - j)
    means = _block_mean(u.values, u.n, factor)
    vals = means
    for ax in range(u.n):
        vals = np.repeat(vals, factor, axis=ax)
    return u.with_values(vals)
