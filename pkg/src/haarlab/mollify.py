"""Mollified Littlewood-Paley layers built from a two-bump mollifier.

The 1-D profile is ``beta = a1 phi((t-c1)/w) + a2 phi((t-c2)/w)`` with
``phi(t) = exp(-1/(1-t^2))``; the weights solve the 2x2 moment system so
that ``int beta = 1`` and ``int t beta(t) dt = 0``.  The n-dimensional
bump is the tensor product, the band-pass kernel is
``d(x) = 2^n b(2x) - b(x)`` and its dyadic rescalings ``d_s`` drive the
layer decomposition ``Delta_s u = u * d_s``.

Two discretization rules keep the vanishing-moment mechanism exact on
the grid rather than merely up to quadrature error:

* the bump weights are re-solved on every sampling lattice, so sampled
  kernels have discrete mass 1 and discrete first moment 0 exactly;
* kernels at scales coarser than the torus (``s < 0``) are periodized,
  which makes the negative-layer aggregate an exact telescoping limit.

A margin of 3 dyadic levels is kept between mollifier scale and grid
scale (at least 8 sample points per support axis); scales violating it
are dropped from layer sums and logged.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dyadic import (
    DyadicCube,
    HaarCoefficients,
    _as_pattern,
    haar_analysis,
    haar_function,
    haar_synthesis,
    scale_coefficients,
    single_scale_synthesis,
)
from .grid import GridFunction, inner_product

__all__ = [
    "MollifierSpec",
    "build_mollifier",
    "default_mollifier",
    "sample_bump",
    "sample_band_kernel",
    "delta_layer",
    "mollified_haar",
    "mollified_haar_negative",
    "layer_projection",
    "layer_projection_adjoint",
    "negative_layer_projection",
    "negative_layer_projection_adjoint",
    "admissible_layer_scales",
    "coefficient_scan",
    "kernel_expansion_check",
    "KernelCheck",
    "abc_split",
    "MARGIN",
    "MIN_KERNEL_SCALE",
]

logger = logging.getLogger(__name__)

MARGIN = 3
MIN_KERNEL_SCALE = -8


def _bump(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=np.float64)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti * ti))
    return out


@dataclass(frozen=True)
class MollifierSpec:
    """Two-bump profile with vanishing zeroth-excess and first moments."""

    centers: tuple[float, float] = (0.3, 0.7)
    width: float = 0.25
    resolution: int = 4096
    weights: tuple[float, float] = (0.0, 0.0)
    moment_residuals: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        c1, c2 = self.centers
        w = self.width
        if not (0.0 < c1 - w and c2 + w < 1.0 and c1 != c2):
            raise ValueError("bump supports must sit inside (0,1) with c1 != c2")

    def key(self) -> tuple:
        return (self.centers, self.width)

    def profile(self, t: np.ndarray) -> np.ndarray:
        a1, a2 = self.weights
        c1, c2 = self.centers
        return a1 * _bump((np.asarray(t, dtype=float) - c1) / self.width) + \
            a2 * _bump((np.asarray(t, dtype=float) - c2) / self.width)

    def profile_samples(self) -> np.ndarray:
        return self.profile(np.arange(self.resolution) / self.resolution)


@lru_cache(maxsize=None)
def _axis_profile(points: int, centers: tuple, width: float) -> np.ndarray:
    """Samples of ``beta`` at ``i/points`` with weights solved on that lattice.

    The returned samples satisfy ``mean(beta) = 1`` and
    ``mean(u beta(u)) = 0`` exactly, which after rescaling gives sampled
    kernels with exact discrete mass and vanishing discrete first moment
    at every dyadic scale.
    """
    u = np.arange(points) / points
    c1, c2 = centers
    phi1 = _bump((u - c1) / width)
    phi2 = _bump((u - c2) / width)
    m = np.array([[phi1.mean(), phi2.mean()],
                  [(u * phi1).mean(), (u * phi2).mean()]])
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) < 1e-30:
        raise ValueError("singular moment system (bump centers coincide?)")
    a = np.linalg.solve(m, np.array([1.0, 0.0]))
    return a[0] * phi1 + a[1] * phi2


def build_mollifier(resolution: int = 4096, centers: tuple[float, float] = (0.3, 0.7),
                    width: float = 0.25) -> MollifierSpec:
    """Construct the profile and report its moment residuals."""
    if resolution < 2**12:
        raise ValueError("resolution must be a power of two >= 2^12")
    if resolution & (resolution - 1):
        raise ValueError("resolution must be a power of two >= 2^12")
    beta = _axis_profile(resolution, centers, width)
    u = np.arange(resolution) / resolution
    res0 = float(beta.mean() - 1.0)
    res1 = float((u * beta).mean())
    a1, a2 = _solve_weights(resolution, centers, width)
    return MollifierSpec(centers, width, resolution, (a1, a2), (res0, res1))


def _solve_weights(points: int, centers: tuple, width: float) -> tuple[float, float]:
    u = np.arange(points) / points
    c1, c2 = centers
    phi1 = _bump((u - c1) / width)
    phi2 = _bump((u - c2) / width)
    m = np.array([[phi1.mean(), phi2.mean()],
                  [(u * phi1).mean(), (u * phi2).mean()]])
    a = np.linalg.solve(m, np.array([1.0, 0.0]))
    return float(a[0]), float(a[1])


@lru_cache(maxsize=1)
def default_mollifier() -> MollifierSpec:
    return build_mollifier()


def _spec(spec: MollifierSpec | None) -> MollifierSpec:
    return spec if spec is not None else default_mollifier()


@lru_cache(maxsize=None)
def _axis_samples(key: tuple, s: int, J: int) -> np.ndarray:
    """Grid samples of ``2^s beta(2^s t)`` on ``2^J`` cells, periodized for s<0."""
    centers, width = key
    points = 2 ** (J - s)
    beta = _axis_profile(points, centers, width)
    scaled = (2.0**s) * beta
    N = 2**J
    if s >= 0:
        out = np.zeros(N)
        out[:points] = scaled
        return out
    return scaled.reshape(-1, N).sum(axis=0)


def sample_bump(spec: MollifierSpec | None, s: int, n: int, J: int) -> np.ndarray:
    """Sampled ``b_s`` (tensor product of scaled axis profiles).

    Needs at least two samples per support axis; the 8-point margin for
    operator kernels is enforced where the kernels are consumed.
    """
    spec = _spec(spec)
    if s > J - 1:
        raise ValueError(
            f"under-resolved mollifier: scale {s} needs J >= {s + 1}"
        )
    if s < MIN_KERNEL_SCALE:
        raise ValueError(f"kernel scale {s} below periodization guard")
    axis = _axis_samples(spec.key(), s, J)
    vals = axis
    for _ in range(n - 1):
        vals = np.multiply.outer(vals, axis)
    return vals


def sample_band_kernel(spec: MollifierSpec | None, s: int, n: int, J: int) -> np.ndarray:
    """Sampled ``d_s = b_{s+1} - b_s``; discrete integral is exactly zero."""
    if s > J - MARGIN:
        raise ValueError(
            f"under-resolved mollifier: scale {s} needs J >= {s + MARGIN}"
        )
    return sample_bump(spec, s + 1, n, J) - sample_bump(spec, s, n, J)


@lru_cache(maxsize=None)
def _kernel_fft(key: tuple, kind: str, s: int, n: int, J: int):
    spec = MollifierSpec(key[0], key[1])
    if kind == "b":
        vals = sample_bump(spec, s, n, J)
    else:
        vals = sample_band_kernel(spec, s, n, J)
    fft = np.fft.rfftn(vals)
    fft.flags.writeable = False
    return fft


def _convolve_kernel(values: np.ndarray, spec: MollifierSpec, kind: str, s: int,
                     J: int, reflected: bool = False) -> np.ndarray:
    """Continuum convolution ``values * kernel`` (Riemann-weighted circular)."""
    n = values.ndim
    kf = _kernel_fft(spec.key(), kind, s, n, J)
    kf = np.conj(kf) if reflected else kf
    U = np.fft.rfftn(values)
    return np.fft.irfftn(U * kf, s=values.shape, axes=range(values.ndim)) * 2.0 ** (-J * n)


def admissible_layer_scales(J: int, l: int) -> list[int]:
    """Cube scales j whose mollifier scale ``j + l`` is resolvable."""
    return [j for j in range(J)
            if MIN_KERNEL_SCALE <= j + l <= J - MARGIN]


def delta_layer(u: GridFunction, l: int, spec: MollifierSpec | None = None) -> GridFunction:
    """Band-pass layer ``Delta_l u = u * d_l`` by FFT convolution."""
    spec = _spec(spec)
    if l > u.J - MARGIN:
        raise ValueError(
            f"under-resolved mollifier: layer {l} needs J >= {l + MARGIN}"
        )
    if l < MIN_KERNEL_SCALE:
        raise ValueError(f"kernel scale {l} below periodization guard")
    return u.with_values(_convolve_kernel(u.values, spec, "d", l, u.J))


def mollified_haar(Q: DyadicCube, eps, l: int, J: int,
                   spec: MollifierSpec | None = None) -> GridFunction:
    """``f_{Q,l} = Delta_{j+l} h_Q^(eps)`` (zero mean, localized near D(Q))."""
    spec = _spec(spec)
    s = Q.j + l
    if s > J - MARGIN or s < MIN_KERNEL_SCALE:
        raise ValueError(
            f"under-resolved mollifier: scale {Q.j}+{l} out of range at J={J}"
        )
    h = haar_function(Q, eps, J)
    return h.with_values(_convolve_kernel(h.values, spec, "d", s, J))


def mollified_haar_negative(Q: DyadicCube, eps, J: int,
                            spec: MollifierSpec | None = None) -> GridFunction:
    """Aggregate of all negative layers for one cube.

    On the torus the telescoping sum of ``Delta_{j+l} h_Q`` over ``l < 0``
    converges to ``h_Q * b_j`` (the constant limit of the periodized
    coarse bumps pairs to zero against the mean-free ``h_Q``).
    """
    spec = _spec(spec)
    if Q.j > J - MARGIN:
        raise ValueError(
            f"under-resolved mollifier: scale {Q.j} needs J >= {Q.j + MARGIN}"
        )
    h = haar_function(Q, eps, J)
    return h.with_values(_convolve_kernel(h.values, spec, "b", Q.j, J))


def _layer_scales_or_warn(J: int, l: int, what: str) -> list[int]:
    scales = admissible_layer_scales(J, l)
    dropped = [j for j in range(J) if j not in scales]
    if dropped:
        logger.debug("%s l=%d at J=%d dropped scales %s", what, l, J, dropped)
    return scales


def layer_projection(u: GridFunction, eps, l: int,
                     spec: MollifierSpec | None = None,
                     scales: list[int] | None = None) -> GridFunction:
    """Layer operator ``P_l u = sum_Q <u, f_{Q,l}> h_Q / |Q|``.

    Computed per scale: correlate ``u`` with the reflected kernel, then
    read scale-j Haar coefficients of the result.  Non-resolvable scales
    are dropped (logged at debug level); ``scales`` restricts the sum
    further, e.g. to compare layer sums over a common scale window.
    """
    spec = _spec(spec)
    eps = _as_pattern(eps)
    n, J = u.n, u.J
    out = HaarCoefficients(n, J)
    admissible = _layer_scales_or_warn(J, l, "layer_projection")
    if scales is not None:
        admissible = [j for j in admissible if j in set(scales)]
    for j in admissible:
        w = _convolve_kernel(u.values, spec, "d", j + l, J, reflected=True)
        out.set_level(j, eps, scale_coefficients(u.with_values(w), j, eps))
    return haar_synthesis(out, n, J)


def layer_projection_adjoint(v: GridFunction, eps, l: int,
                             spec: MollifierSpec | None = None) -> GridFunction:
    """Adjoint ``P_l^* v = sum_Q <v, h_Q> f_{Q,l} / |Q|`` (h and f swapped)."""
    spec = _spec(spec)
    eps = _as_pattern(eps)
    n, J = v.n, v.J
    acc = np.zeros_like(v.values)
    for j in admissible_layer_scales(J, l):
        coeffs = scale_coefficients(v, j, eps)
        g = single_scale_synthesis(coeffs, j, eps, n, J)
        acc += _convolve_kernel(g.values, spec, "d", j + l, J)
    return v.with_values(acc)


def negative_layer_projection(u: GridFunction, eps,
                              spec: MollifierSpec | None = None) -> GridFunction:
    """Aggregated negative-layer operator using ``f_Q = h_Q * b_j`` per scale."""
    spec = _spec(spec)
    eps = _as_pattern(eps)
    n, J = u.n, u.J
    out = HaarCoefficients(n, J)
    for j in _layer_scales_or_warn(J, 0, "negative_layer_projection"):
        w = _convolve_kernel(u.values, spec, "b", j, J, reflected=True)
        out.set_level(j, eps, scale_coefficients(u.with_values(w), j, eps))
    return haar_synthesis(out, n, J)


def negative_layer_projection_adjoint(v: GridFunction, eps,
                                      spec: MollifierSpec | None = None) -> GridFunction:
    spec = _spec(spec)
    eps = _as_pattern(eps)
    n, J = v.n, v.J
    acc = np.zeros_like(v.values)
    for j in admissible_layer_scales(J, 0):
        coeffs = scale_coefficients(v, j, eps)
        g = single_scale_synthesis(coeffs, j, eps, n, J)
        acc += _convolve_kernel(g.values, spec, "b", j, J)
    return v.with_values(acc)


# ---------------------------------------------------------------------------
# coefficient regimes
# ---------------------------------------------------------------------------

def _support_box_fits_child(j_Q: int, kernel_scale: int, j_M: int) -> bool:
    """True when the support box of ``f`` (base cube at origin padded by one
    kernel width) sits inside the first child of the scale-``j_M`` cube at
    the origin, forcing the pairing against ``h_M`` to vanish."""
    extent = 2.0**-j_Q + 2.0**-kernel_scale
    return extent <= 2.0 ** -(j_M + 1)


def _base_positions(j_Q: int, n: int) -> dict[str, tuple[int, ...]]:
    """Representative base cubes: one at the origin (whose pairings with
    coarser cubes vanish by containment) and one hugging the midline of
    the torus, where the coefficient power laws are attained."""
    positions = {"origin": (0,) * n}
    if j_Q >= 1:
        positions["straddle"] = (2 ** (j_Q - 1) - 1,) * n
    return positions


def coefficient_scan(eps, l: int, J: int, spec: MollifierSpec | None = None,
                     base_scales: list[int] | None = None,
                     aggregate_negative: bool = False) -> list[dict]:
    """Measure ``max_M |<f_{Q,l}, h_M>|`` grouped by the diameter ratio.

    One row per (base scale, target scale): the measured maximum over all
    positions and sign patterns of ``M`` and over the representative base
    positions, the regime label, the predicted power law for that regime
    (constant-free), and the exactly-vanishing pairing where the support
    of ``f`` sits inside a single dyadic child of ``M``.
    """
    spec = _spec(spec)
    eps = _as_pattern(eps)
    n = eps.n
    rows: list[dict] = []
    if base_scales is None:
        base_scales = [j for j in range(J)
                       if MIN_KERNEL_SCALE <= j + (0 if aggregate_negative else l)
                       <= J - MARGIN]
    for j_Q in base_scales:
        per_scale: dict[int, float] = {}
        vanish_at: dict[int, float] = {}
        kernel_scale = j_Q if aggregate_negative else j_Q + l
        for tag, k in _base_positions(j_Q, n).items():
            Q = DyadicCube(j_Q, k)
            if aggregate_negative:
                f = mollified_haar_negative(Q, eps, J, spec)
            else:
                f = mollified_haar(Q, eps, l, J, spec)
            coeffs = haar_analysis(f)
            for j_M in range(J):
                lev = coeffs.levels.get(j_M, {})
                if not lev:
                    continue
                measure_M = 2.0 ** (-j_M * n)
                val = max(float(np.max(np.abs(a))) for a in lev.values()) * measure_M
                per_scale[j_M] = max(per_scale.get(j_M, 0.0), val)
                if tag == "origin" and _support_box_fits_child(j_Q, kernel_scale, j_M):
                    origin = (0,) * n
                    vanish_at[j_M] = max(
                        abs(float(a[origin])) for a in lev.values()
                    ) * measure_M
        diam_Q = np.sqrt(n) * 2.0**-j_Q
        for j_M, measured in sorted(per_scale.items()):
            measure_M = 2.0 ** (-j_M * n)
            diam_M = np.sqrt(n) * 2.0**-j_M
            lam_rel = j_M - j_Q
            if aggregate_negative:
                if j_M >= j_Q:
                    regime, predicted = "neg-case-1", diam_M ** (n + 1) / diam_Q
                else:
                    regime, predicted = "neg-case-2", 2.0 ** (-j_Q * n)
            else:
                if lam_rel <= 0:
                    regime, predicted = "case-1", 2.0**-l * 2.0 ** (-j_Q * n)
                elif lam_rel <= l:
                    regime, predicted = "case-2", 2.0**-l * diam_Q * diam_M ** (n - 1)
                else:
                    regime, predicted = "case-3", 2.0**l * (diam_M / diam_Q) * measure_M
            row = {
                "regime": regime, "l": l, "j_Q": j_Q, "j_M": j_M,
                "lam": lam_rel, "measured": measured, "predicted": predicted,
            }
            if j_M in vanish_at:
                row["vanishing_max"] = vanish_at[j_M]
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# kernel expansion identity
# ---------------------------------------------------------------------------

@dataclass
class KernelCheck:
    max_matrix_discrepancy: float
    apply_discrepancy: float
    operator_discrepancy: float


def _haar_basis_matrix(n: int, J: int) -> tuple[np.ndarray, np.ndarray]:
    """All Haar basis functions as rows, plus their measures."""
    from .dyadic import all_sign_patterns

    rows = []
    measures = []
    for j in range(J):
        for eps in all_sign_patterns(n):
            for k in itertools.product(range(2**j), repeat=n):
                h = haar_function(DyadicCube(j, k), eps, J)
                rows.append(h.values.ravel())
                measures.append(2.0 ** (-j * n))
    return np.array(rows), np.array(measures)


def kernel_expansion_check(u: GridFunction, eps, l: int, Jsmall: int,
                           spec: MollifierSpec | None = None) -> KernelCheck:
    """Compare the direct kernel of ``P_l`` with its double Haar expansion.

    ``K1(x,y) = sum_Q h_Q(x) f_{Q,l}(y) / |Q|`` is assembled from the
    mollified functions; ``K2`` re-expands every ``f_{Q,l}`` against the
    explicitly sampled Haar basis (brute force, no pyramid).  Degenerate
    layers with no resolvable scale yield two zero matrices.
    """
    spec = _spec(spec)
    eps = _as_pattern(eps)
    if Jsmall > 5:
        raise ValueError("kernel too dense: Jsmall must be <= 5")
    if u.J != Jsmall:
        raise ValueError("probe must live on the kernel grid")
    n = u.n
    N = (2**Jsmall) ** n
    vol = 2.0 ** (-Jsmall * n)
    basis, measures = _haar_basis_matrix(n, Jsmall)
    K1 = np.zeros((N, N))
    K2 = np.zeros((N, N))
    for j in admissible_layer_scales(Jsmall, l):
        inv_measure = 2.0 ** (j * n)
        for k in itertools.product(range(2**j), repeat=n):
            Q = DyadicCube(j, k)
            h = haar_function(Q, eps, Jsmall).values.ravel()
            f = mollified_haar(Q, eps, l, Jsmall, spec).values.ravel()
            K1 += inv_measure * np.outer(h, f)
            pairings = basis @ f * vol
            f_tilde = basis.T @ (pairings / measures) + f.mean()
            K2 += inv_measure * np.outer(h, f_tilde)
    max_disc = float(np.max(np.abs(K1 - K2))) if N else 0.0
    uu = u.values.ravel()
    apply1 = vol * (K1 @ uu)
    apply2 = vol * (K2 @ uu)
    direct = layer_projection(u, eps, l, spec).values.ravel()
    return KernelCheck(
        max_matrix_discrepancy=max_disc,
        apply_discrepancy=float(np.max(np.abs(apply1 - apply2))),
        operator_discrepancy=float(np.max(np.abs(apply1 - direct))),
    )


def abc_split(u: GridFunction, eps, l: int,
              spec: MollifierSpec | None = None) -> dict[str, GridFunction]:
    """Partition ``P_l u`` by the diameter regimes of the coefficient sum.

    Returns the three operators' contributions keyed "A", "B", "C"
    (larger/ intermediate/ smaller partner cubes); their sum re-assembles
    ``P_l u`` exactly since it is one sum re-bucketed.
    """
    spec = _spec(spec)
    eps = _as_pattern(eps)
    if l < 0:
        raise ValueError("regime split applies to l >= 0")
    n, J = u.n, u.J
    if J > 6:
        raise ValueError("regime split is a dense check; use J <= 6")
    U = haar_analysis(u)
    parts = {name: HaarCoefficients(n, J) for name in ("A", "B", "C")}
    for j_Q in admissible_layer_scales(J, l):
        target = {name: parts[name].level(j_Q, eps) for name in parts}
        for k in itertools.product(range(2**j_Q), repeat=n):
            Q = DyadicCube(j_Q, k)
            f = mollified_haar(Q, eps, l, J, spec)
            fc = haar_analysis(f)
            sums = {"A": 0.0, "B": 0.0, "C": 0.0}
            for j_M, lev in fc.levels.items():
                measure_M = 2.0 ** (-j_M * n)
                pair_total = 0.0
                for e, arr in lev.items():
                    Ulev = U.levels.get(j_M, {})
                    if e in Ulev:
                        # <u, f> restricted to scale j_M: sum U_M <h_M, f>
                        pair_total += float(np.sum(Ulev[e] * arr)) * measure_M
                lam_rel = j_M - j_Q
                name = "A" if lam_rel <= 0 else ("B" if lam_rel <= l else "C")
                sums[name] += pair_total
            inv_measure = 2.0 ** (j_Q * n)
            for name in parts:
                target[name][k] = sums[name] * inv_measure
    return {name: haar_synthesis(parts[name], n, J) for name in parts}
