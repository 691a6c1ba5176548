"""Sampled functions on the dyadic grid over the n-torus.

A :class:`GridFunction` holds samples of a function on ``[0,1)^n`` at
resolution ``2^J`` per axis (cell-indexed, left endpoints).  It is the
discrete stand-in for a p-integrable function with values in ``R^d``
equipped with an ``l^q`` norm.  All randomness used anywhere in the
package flows through :class:`ProbeSpec` seeds, so repeated runs are
byte-identical.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "GridFunction",
    "ProbeSpec",
    "lp_norm",
    "inner_product",
    "generate_probe",
    "grid_coordinates",
    "write_binary",
    "read_binary",
    "write_csv",
    "read_csv",
]


@dataclass(frozen=True)
class GridFunction:
    """Dense samples on the dyadic grid of the n-torus.

    ``values`` has shape ``(2^J,) * n`` for scalar functions and
    ``(2^J,) * n + (d,)`` for d-component ones.  Cell ``k`` represents the
    point ``k * 2^-J`` (equivalently the cell ``[k 2^-J, (k+1) 2^-J)``).
    """

    n: int
    J: int
    values: np.ndarray
    d: int = 1
    q: float = 2.0

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"invalid function: dimension n={self.n} unsupported")
        if self.J < 0:
            raise ValueError("invalid function: negative resolution")
        if self.d < 1:
            raise ValueError("invalid function: value_dim must be >= 1")
        if not (self.q >= 1.0):
            raise ValueError("invalid function: value exponent q must be >= 1")
        expected = (2**self.J,) * self.n + ((self.d,) if self.d > 1 else ())
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != expected:
            raise ValueError(
                f"invalid function: samples shape {vals.shape}, expected {expected}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("invalid function: non-finite samples")
        vals = np.ascontiguousarray(vals)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    # -- arithmetic (shapes must match; results stay immutable) ----------
    def _check_compatible(self, other: "GridFunction"):
        if (self.n, self.J, self.d) != (other.n, other.J, other.d):
            raise ValueError(
                f"shape mismatch: ({self.n},{self.J},{self.d}) vs "
                f"({other.n},{other.J},{other.d})"
            )

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c: float) -> "GridFunction":
        return self.with_values(self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return self.with_values(-self.values)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.n, self.J, values, d=self.d, q=self.q)

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-self.J * self.n)

    def pointwise_value_norm(self) -> np.ndarray:
        """``|u(x)|_q`` per grid cell (identity for scalars)."""
        if self.d == 1:
            return np.abs(self.values)
        if np.isinf(self.q):
            return np.max(np.abs(self.values), axis=-1)
        return np.sum(np.abs(self.values) ** self.q, axis=-1) ** (1.0 / self.q)


def zero_function(n: int, J: int, d: int = 1, q: float = 2.0) -> GridFunction:
    shape = (2**J,) * n + ((d,) if d > 1 else ())
    return GridFunction(n, J, np.zeros(shape), d=d, q=q)


def constant_function(n: int, J: int, c: float) -> GridFunction:
    return GridFunction(n, J, np.full((2**J,) * n, float(c)))


def grid_coordinates(n: int, J: int) -> list[np.ndarray]:
    """Broadcastable coordinate arrays ``x_1 .. x_n`` (left cell endpoints)."""
    N = 2**J
    t = np.arange(N) / N
    return [t.reshape((1,) * i + (N,) + (1,) * (n - 1 - i)) for i in range(n)]


def lp_norm(u: GridFunction, p: float) -> float:
    """Discrete ``L^p`` norm, ``(2^{-Jn} sum_x |u(x)|_q^p)^{1/p}``."""
    if not np.isfinite(p) or p <= 1.0:
        raise ValueError(f"p must be finite and > 1, got {p}")
    if not np.all(np.isfinite(u.values)):
        raise ValueError("invalid function: non-finite samples")
    mags = u.pointwise_value_norm()
    return float((u.cell_volume * np.sum(mags ** p)) ** (1.0 / p))


def inner_product(u: GridFunction, v: GridFunction) -> float:
    """Bilinear pairing ``2^{-Jn} sum_x u(x).v(x)`` (componentwise for d>1)."""
    u._check_compatible(v)
    return float(u.cell_volume * np.sum(u.values * v.values))


# ---------------------------------------------------------------------------
# probes
# ---------------------------------------------------------------------------

PROBE_KINDS = (
    "white-noise",
    "single-haar",
    "scale-rademacher",
    "anisotropic-lowfreq",
    "ring-supported",
)


@dataclass(frozen=True)
class ProbeSpec:
    """Seeded recipe for a reproducible probe function.

    The seed fully determines the samples: the same spec always yields
    bitwise-identical arrays.
    """

    kind: str
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PROBE_KINDS:
            raise ValueError(f"unknown probe kind {self.kind!r}")

    def probe_id(self) -> str:
        items = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.kind}[{items}]#{self.seed}"


def generate_probe(spec: ProbeSpec, n: int, J: int) -> GridFunction:
    """Materialize a probe on the ``(n, J)`` grid."""
    rng = np.random.default_rng(spec.seed)
    p = spec.params
    if spec.kind == "white-noise":
        return GridFunction(n, J, rng.standard_normal((2**J,) * n))

    if spec.kind == "single-haar":
        from . import dyadic

        cube = dyadic.DyadicCube(p["j"], tuple(p["k"]))
        eps = dyadic.SignPattern(tuple(p["eps"]))
        return dyadic.haar_function(cube, eps, J)

    if spec.kind == "scale-rademacher":
        from . import dyadic

        j = p["scale"]
        eps = dyadic.SignPattern(tuple(p["eps"]))
        if not 0 <= j < J:
            raise ValueError(f"cube outside grid range: scale {j} at J={J}")
        signs = rng.choice([-1.0, 1.0], size=(2**j,) * n)
        return dyadic.single_scale_synthesis(signs, j, eps, n, J)

    if spec.kind == "anisotropic-lowfreq":
        # Smooth band-limited field oscillating slowly along axis i0 and at
        # frequency ~k_perp transversally; the small k_i0 component keeps it
        # off the k_{i0}=0 plane.  Band-limited in closed form, so the same
        # spec denotes the same function at every resolution J.
        i0 = p["i0"]
        k_perp = p["k_perp"]
        if not 1 <= i0 <= n:
            raise ValueError(f"axis i0={i0} out of range for n={n}")
        coords = grid_coordinates(n, J)
        vals = np.zeros((2**J,) * n)
        n_modes = p.get("n_modes", 4)
        for _ in range(n_modes):
            freq = [0] * n
            freq[i0 - 1] = int(rng.choice([-1, 1]))
            for ax in range(n):
                if ax != i0 - 1:
                    freq[ax] = int(rng.integers(max(1, k_perp // 2), k_perp + 1))
            phase = rng.uniform(0, 2 * np.pi)
            amp = rng.uniform(0.5, 1.0)
            arg = 2 * np.pi * sum(f * x for f, x in zip(freq, coords))
            vals = vals + amp * np.cos(arg + phase)
        return GridFunction(n, J, vals)

    if spec.kind == "ring-supported":
        from . import dyadic, ring

        j = p["scale"]
        lam = p["lam"]
        eps = dyadic.SignPattern(tuple(p["eps"]))
        if j + lam > J - 1:
            raise ValueError(f"cube outside grid range: scale {j}+{lam} at J={J}")
        k = tuple(int(c) for c in rng.integers(0, 2**j, size=n))
        dom = ring.ring_cover(
            dyadic.DyadicCube(j, k), eps, lam, J, face_mode=p.get("face_mode", "slab-left-e1")
        )
        return ring.ring_block(dom, J)

    raise ValueError(f"unknown probe kind {spec.kind!r}")


def windowed(u: GridFunction, lo: float = 0.25, hi: float = 0.75) -> GridFunction:
    """Restrict a probe to the centered box ``[lo, hi)^n`` (hard cutoff)."""
    coords = grid_coordinates(u.n, u.J)
    mask = np.ones((2**u.J,) * u.n, dtype=bool)
    for x in coords:
        mask &= (x >= lo) & (x < hi)
    vals = u.values * mask if u.d == 1 else u.values * mask[..., None]
    return u.with_values(vals)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def write_binary(u: GridFunction, path) -> None:
    """Flat binary: header (n, J, d as LE u32, q as LE f64), then f64 samples."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<III", u.n, u.J, u.d))
        fh.write(struct.pack("<d", u.q))
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_binary(path) -> GridFunction:
    with open(path, "rb") as fh:
        n, J, d = struct.unpack("<III", fh.read(12))
        (q,) = struct.unpack("<d", fh.read(8))
        count = (2**J) ** n * d
        vals = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
    shape = (2**J,) * n + ((d,) if d > 1 else ())
    return GridFunction(n, J, vals.reshape(shape).astype(np.float64), d=d, q=q)


def write_csv(u: GridFunction, path) -> None:
    """One row per cell and component: k_1..k_n, component, value."""
    N = 2**u.J
    with open(path, "w") as fh:
        cols = [f"k_{i+1}" for i in range(u.n)] + ["component", "value"]
        fh.write(",".join(cols) + "\n")
        flat = u.values.reshape((-1, u.d) if u.d > 1 else (-1, 1))
        for lin, row in enumerate(flat):
            idx = np.unravel_index(lin, (N,) * u.n)
            for c, val in enumerate(row):
                fh.write(",".join(str(i) for i in idx) + f",{c},{val!r}\n")


def read_csv(path, n: int, J: int, d: int = 1, q: float = 2.0) -> GridFunction:
    N = 2**J
    shape = (N,) * n + ((d,) if d > 1 else ())
    vals = np.zeros((N,) * n + (d,))
    with open(path) as fh:
        header = fh.readline()
        assert header.startswith("k_1")
        for line in fh:
            parts = line.strip().split(",")
            idx = tuple(int(x) for x in parts[:n])
            c = int(parts[n])
            vals[idx + (c,)] = float(parts[n + 1])
    return GridFunction(n, J, vals.reshape(shape), d=d, q=q)
