"""Directional Haar projections and the dyadic shift rearrangement.

Both operators act purely on the Haar spectrum: the directional
projection keeps the coefficients of one sign pattern (dropping the
mean), and the shift ``T_m`` moves the coefficient at ``Q`` to the cube
``Q + m * sidelength(Q)``, wrapping around the torus so each scale is
permuted bijectively.
"""

from __future__ import annotations

import numpy as np

from .dyadic import _as_pattern, haar_analysis, haar_synthesis
from .grid import GridFunction

__all__ = ["directional_projection", "figiel_shift"]


def directional_projection(u: GridFunction, eps) -> GridFunction:
    """Keep exactly the Haar coefficients with sign pattern ``eps``."""
    eps = _as_pattern(eps)
    if eps.is_zero:
        raise ValueError("sign pattern must be nonzero")
    coeffs = haar_analysis(u)
    coeffs.mean = 0.0
    for j in list(coeffs.levels):
        lev = coeffs.levels[j]
        coeffs.levels[j] = {eps.eps: lev[eps.eps]} if eps.eps in lev else {}
    return haar_synthesis(coeffs, u.n, u.J)


def figiel_shift(u: GridFunction, m, scale_range: tuple[int, int] | None = None) -> GridFunction:
    """Rearrangement sending ``h_Q`` to ``h_{Q + m sidelength(Q)}`` per scale.

    ``m`` is an integer n-vector; shifts are applied per cube modulo the
    torus, so the map permutes the basis at every scale (an isometry for
    p=2).  ``scale_range`` restricts the shift to scales ``lo <= j < hi``.
    """
    m = tuple(int(c) for c in m)
    if len(m) != u.n:
        raise ValueError(f"shift vector length {len(m)} != n={u.n}")
    coeffs = haar_analysis(u)
    lo, hi = scale_range if scale_range is not None else (0, u.J)
    for j, lev in coeffs.levels.items():
        if not lo <= j < hi:
            continue
        for eps in lev:
            lev[eps] = np.roll(lev[eps], shift=m, axis=tuple(range(u.n)))
    return haar_synthesis(coeffs, u.n, u.J)
