"""Ring domains, their Haar blocks, and the ring-domain operators.

A ring domain at parameter ``lam`` covers the discontinuity set of
``h_Q`` by dyadic cubes ``E`` of diameter ``2^-lam diam(Q)``.  The
operator ``S_lam`` replaces each Haar coefficient of ``u`` by the block
``g_{Q,lam} = sum_E h_E``; the shifted variants ``S_lam^m`` translate
the blocks by ``m`` cover-cube sidelengths along the first axis.

Two cover modes exist.  ``full`` realizes the geometric definition
(every cube meeting the distance neighborhood of the discontinuity set,
with distance constant 1) and is used for cardinality and measure
checks.  ``slab-left-e1`` materializes the face-aligned component as the
leftmost slab of ``Q``, which tiles ``Q`` exactly under the ``2^lam``
shifts; all norm experiments run in slab mode.
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
    SignPattern,
    _as_pattern,
    haar_analysis,
    haar_function,
    haar_synthesis,
)
from .grid import GridFunction

__all__ = [
    "RingDomain",
    "ring_cover",
    "ring_block",
    "ring_operator",
    "ring_operator_adjoint",
    "shifted_ring_operator",
    "tiling_identity_check",
    "TilingCheck",
    "admissible_ring_scales",
]

logger = logging.getLogger(__name__)

FACE_MODES = ("full", "slab-left-e1")


@dataclass(frozen=True)
class RingDomain:
    """Cover of the discontinuity neighborhood of ``h_Q^(eps)``."""

    base: DyadicCube
    eps: SignPattern
    lam: int
    cover: tuple[DyadicCube, ...]
    face_mode: str

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.face_mode not in FACE_MODES:
            raise ValueError(f"unknown face mode {self.face_mode!r}")
        s = self.base.j + self.lam
        if any(E.j != s for E in self.cover):
            raise ValueError("cover cube at wrong scale")
        if len(set(self.cover)) != len(self.cover):
            raise ValueError("cover cubes not pairwise distinct")
        if self.face_mode == "slab-left-e1":
            base_e1 = self.base.k[0] << self.lam
            if any(E.k[0] != base_e1 for E in self.cover):
                raise ValueError("slab cover must sit at first-axis offset 0")


def _torus_gap(lo1: float, hi1: float, lo2: float, hi2: float) -> float:
    """Distance between two intervals on the unit torus."""
    best = np.inf
    for shift in (-1.0, 0.0, 1.0):
        a, b = lo1 + shift, hi1 + shift
        if b < lo2:
            gap = lo2 - b
        elif hi2 < a:
            gap = a - hi2
        else:
            gap = 0.0
        best = min(best, gap)
    return best


def _discontinuity_rectangles(Q: DyadicCube, eps: SignPattern):
    """Axis-aligned pieces of ``D(Q)``: the faces of ``Q`` plus the
    midplanes in every direction ``i`` with ``eps_i = 1``."""
    side = Q.sidelength
    lo = [c * side for c in Q.k]
    hi = [l + side for l in lo]
    rects = []
    for a in range(Q.n):
        planes = [lo[a], hi[a]]
        if eps.eps[a] == 1:
            planes.append(lo[a] + side / 2)
        extent = [(lo[i], hi[i]) for i in range(Q.n)]
        for c in planes:
            rects.append((a, c, extent))
    return rects


def _cube_rect_distance(e_lo, e_hi, rect) -> float:
    a, c, extent = rect
    sq = 0.0
    for i in range(len(e_lo)):
        if i == a:
            gap = _torus_gap(e_lo[i], e_hi[i], c, c)
        else:
            gap = _torus_gap(e_lo[i], e_hi[i], extent[i][0], extent[i][1])
        sq += gap * gap
    return float(np.sqrt(sq))


@lru_cache(maxsize=None)
def _cover_offsets(n: int, j: int, lam: int, eps_bits: tuple, J: int,
                   face_mode: str) -> tuple[tuple[int, ...], ...]:
    """Cover-cube offsets relative to the base corner ``k << lam``.

    Translation invariance on the torus makes the offset pattern
    independent of the base cube position; offsets are reduced modulo
    ``2^(j+lam)`` and deduplicated.
    """
    s = j + lam
    if face_mode == "slab-left-e1":
        return tuple(
            (0, *t) for t in itertools.product(range(2**lam), repeat=n - 1)
        )
    eps = SignPattern(eps_bits)
    Q = DyadicCube(j, (0,) * n)
    threshold = 2.0**-lam * np.sqrt(n) * Q.sidelength
    rects = _discontinuity_rectangles(Q, eps)
    side_e = 2.0**-s
    pad = int(np.ceil(threshold / side_e)) + 1
    ranges = [range(-pad, 2**lam + pad) for _ in range(n)]
    offsets = []
    seen = set()
    for e in itertools.product(*ranges):
        e_lo = [c * side_e for c in e]
        e_hi = [l + side_e for l in e_lo]
        if min(_cube_rect_distance(e_lo, e_hi, r) for r in rects) <= threshold:
            wrapped = tuple(c % 2**s for c in e)
            if wrapped not in seen:
                seen.add(wrapped)
                offsets.append(wrapped)
    return tuple(sorted(offsets))


def ring_cover(Q: DyadicCube, eps, lam: int, J: int,
               face_mode: str = "slab-left-e1") -> RingDomain:
    """Cover cubes at scale ``j(Q)+lam`` for the ring domain of ``h_Q^(eps)``."""
    eps = _as_pattern(eps)
    if eps.is_zero:
        raise ValueError("sign pattern must be nonzero")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    s = Q.j + lam
    if s > J - 1:
        raise ValueError(f"unresolvable scale: j+lam={s} needs J > {s}, got {J}")
    offsets = _cover_offsets(Q.n, Q.j, lam, eps.eps, J, face_mode)
    base = tuple(c << lam for c in Q.k)
    cover = tuple(
        DyadicCube(s, tuple((b + o) % 2**s for b, o in zip(base, off)))
        for off in offsets
    )
    return RingDomain(Q, eps, lam, cover, face_mode)


def ring_block(dom: RingDomain, J: int) -> GridFunction:
    """``g_{Q,lam} = sum_{E in cover} h_E^(eps)`` sampled on the grid."""
    vals = None
    for E in dom.cover:
        h = haar_function(E, dom.eps, J)
        vals = h.values.copy() if vals is None else vals + h.values
    if vals is None:
        vals = np.zeros((2**J,) * dom.base.n)
    return GridFunction(dom.base.n, J, vals)


def admissible_ring_scales(J: int, lam: int) -> list[int]:
    """Cube scales whose cover scale ``j+lam`` is still resolvable."""
    return [j for j in range(J) if j + lam <= J - 1]


def _upsample_repeat(arr: np.ndarray, lam: int, axes) -> np.ndarray:
    for ax in axes:
        arr = np.repeat(arr, 2**lam, axis=ax)
    return arr


def ring_operator(u: GridFunction, eps, lam: int,
                  face_mode: str = "slab-left-e1", m: int = 0) -> GridFunction:
    """``S_lam^m u = sum_Q u_Q T_{m e1} g_{Q,lam}`` over resolvable cubes.

    The coefficient ``u_Q`` is read from sign pattern ``eps``; cubes with
    ``j + lam > J - 1`` are dropped (logged).  The output blocks carry
    the same generic pattern ``eps``.
    """
    eps = _as_pattern(eps)
    if eps.is_zero:
        raise ValueError("sign pattern must be nonzero")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if not 0 <= m <= 2**lam - 1:
        raise ValueError(f"shift m={m} out of range [0, 2^lam - 1]")
    n, J = u.n, u.J
    coeffs = haar_analysis(u)
    out = HaarCoefficients(n, J)
    scales = admissible_ring_scales(J, lam)
    dropped = [j for j in range(J) if j not in scales]
    if dropped:
        logger.debug("ring_operator lam=%d dropped scales %s at J=%d", lam, dropped, J)
    for j in scales:
        lev = coeffs.levels.get(j, {})
        if eps.eps not in lev:
            continue
        U = lev[eps.eps]
        s = j + lam
        tgt = out.level(s, eps)
        if face_mode == "slab-left-e1":
            block = _upsample_repeat(U, lam, range(1, n))
            idx = [slice(None)] * n
            idx[0] = slice(m, None, 2**lam)
            tgt[tuple(idx)] += block
        else:
            offsets = _cover_offsets(n, j, lam, eps.eps, J, face_mode)
            base = np.zeros((2**s,) * n)
            base[(slice(None, None, 2**lam),) * n] = U
            for off in offsets:
                shift = ((off[0] + m) % 2**s,) + tuple(o % 2**s for o in off[1:])
                tgt += np.roll(base, shift=shift, axis=tuple(range(n)))
    return haar_synthesis(out, n, J)


def ring_operator_adjoint(v: GridFunction, eps, lam: int,
                          face_mode: str = "slab-left-e1", m: int = 0) -> GridFunction:
    """Adjoint of :func:`ring_operator` with respect to the L^2 pairing."""
    eps = _as_pattern(eps)
    n, J = v.n, v.J
    coeffs = haar_analysis(v)
    out = HaarCoefficients(n, J)
    # in expansion coordinates the adjoint carries the measure ratio |E|/|Q|
    weight = 2.0 ** (-lam * n)
    for j in admissible_ring_scales(J, lam):
        s = j + lam
        lev = coeffs.levels.get(s, {})
        if eps.eps not in lev:
            continue
        V = lev[eps.eps]
        if face_mode == "slab-left-e1":
            idx = [slice(None)] * n
            idx[0] = slice(m, None, 2**lam)
            acc = V[tuple(idx)]
            for ax in range(1, n):
                shape = acc.shape[:ax] + (2**j, 2**lam) + acc.shape[ax + 1:]
                acc = acc.reshape(shape).sum(axis=ax + 1)
        else:
            acc = np.zeros((2**j,) * n)
            offsets = _cover_offsets(n, j, lam, eps.eps, J, face_mode)
            for off in offsets:
                shift = tuple(-(off[0] + m) if ax == 0 else -off[ax]
                              for ax in range(n))
                rolled = np.roll(V, shift=shift, axis=tuple(range(n)))
                acc += rolled[(slice(None, None, 2**lam),) * n]
        out.set_level(j, eps, acc * weight)
    return haar_synthesis(out, n, J)


def shifted_ring_operator(u: GridFunction, eps, lam: int, m: int,
                          face_mode: str = "slab-left-e1") -> GridFunction:
    """``S_lam^m u``: every cover cube moves by ``m`` of its sidelengths
    along the first axis (``T_{m e1}`` acting on the output spectrum)."""
    return ring_operator(u, eps, lam, face_mode=face_mode, m=m)


@dataclass
class TilingCheck:
    """Result of summing all ``2^lam`` shifted ring operators."""

    multipliers: HaarCoefficients
    residual: float
    max_unimodularity_deviation: float


def tiling_identity_check(u: GridFunction, eps, lam: int) -> TilingCheck:
    """Verify that ``sum_m S_lam^m u`` is a unimodular Haar multiplier of u.

    In slab mode the shifted supports tile each cube exactly, so for
    every input coefficient ``u_Q != 0`` the output coefficients on the
    ``2^{lam(n-1)} * 2^lam`` cubes inside ``Q`` must all have modulus
    ``|u_Q|``.  Returns the per-cube mean multiplier, the residual of the
    reconstructed multiplier model, and the worst modulus deviation.
    """
    eps = _as_pattern(eps)
    n, J = u.n, u.J
    v = None
    for m in range(2**lam):
        term = shifted_ring_operator(u, eps, lam, m, face_mode="slab-left-e1")
        v = term if v is None else v + term
    coeffs_u = haar_analysis(u)
    coeffs_v = haar_analysis(v)
    model = HaarCoefficients(n, J)
    multipliers = HaarCoefficients(n, J)
    max_dev = 0.0
    scale_u = max(
        (float(np.max(np.abs(a))) for lev in coeffs_u.levels.values()
         for a in lev.values()),
        default=0.0,
    )
    tol = 1e-12 * max(scale_u, 1.0)
    for j in admissible_ring_scales(J, lam):
        lev = coeffs_u.levels.get(j, {})
        if eps.eps not in lev:
            continue
        U = lev[eps.eps]
        s = j + lam
        V = coeffs_v.level(s, eps)
        shape = []
        for _ in range(n):
            shape.extend((2**j, 2**lam))
        perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
        blocked = V.reshape(shape).transpose(perm)  # (coarse idx..., fine idx...)
        mask = np.abs(U) > tol
        if not np.any(mask):
            continue
        ratios = blocked[mask] / U[mask][(...,) + (None,) * n]
        dev = float(np.max(np.abs(np.abs(ratios) - 1.0)))
        max_dev = max(max_dev, dev)
        mean_ratio = ratios.reshape(ratios.shape[0], -1).mean(axis=1)
        mult = np.zeros_like(U)
        mult[mask] = mean_ratio
        multipliers.set_level(j, eps, mult)
        unimod = np.zeros_like(ratios)
        nz = np.abs(ratios) > 0
        unimod[nz] = ratios[nz] / np.abs(ratios[nz])
        model_block = np.zeros_like(blocked)
        model_block[mask] = U[mask][(...,) + (None,) * n] * unimod
        inv = np.argsort(perm)
        model.set_level(s, eps, model_block.transpose(inv).reshape(V.shape))
    # residual via Parseval on the coefficient difference
    res_sq = coeffs_v.mean**2
    for j, lev in coeffs_v.levels.items():
        w = 2.0 ** (-j * n)
        for e, arr in lev.items():
            marr = model.levels.get(j, {}).get(e)
            diff = arr - marr if marr is not None else arr
            res_sq += w * float(np.sum(diff**2))
    return TilingCheck(multipliers, float(np.sqrt(res_sq)), max_dev)
