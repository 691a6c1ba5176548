"""Empirical operator norms, decay fits, and the interpolation experiment.

Norm estimates are certified lower bounds: the reported value is the
ratio attained by a stored probe, and for p=2 a power iteration on the
normal operator sharpens the estimate (its final vector joins the probe
set, so the certificate survives).  Decay exponents come from least
squares on ``(x, log2 y)`` points; acceptance bands compare slopes, never
constants.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dyadic import all_sign_patterns
from .grid import GridFunction, ProbeSpec, generate_probe, lp_norm
from . import mollify, riesz

__all__ = [
    "ExponentPair",
    "NormEstimate",
    "DecayFit",
    "exponents",
    "estimate_norm",
    "power_iteration",
    "fit_decay",
    "standard_corpus",
    "interpolation_corpus",
    "InterpolationReport",
    "interpolation_experiment",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExponentPair:
    """Type and cotype exponents steering every decay prediction."""

    type_exp: float
    cotype_exp: float


def exponents(p: float, q_value: float = 2.0, d: int = 1) -> ExponentPair:
    """Exponent pair of the discretized target space.

    Scalar values: ``(min(2,p), max(2,p))``.  For ``d > 1`` with an l^q
    value norm the pair is ``(min(2,p,q), max(2,p,q))`` -- a documented
    convention: finite dimension makes constants, not exponents, depend
    on d.
    """
    if not (1.0 < p < np.inf):
        raise ValueError("p must lie in (1, inf)")
    if d == 1:
        return ExponentPair(min(2.0, p), max(2.0, p))
    return ExponentPair(min(2.0, p, q_value), max(2.0, p, q_value))


@dataclass
class NormEstimate:
    """Lower bound for an operator norm over a probe corpus."""

    value: float
    argmax_probe_id: str
    probe_count: int
    p: float
    power_iteration: float | None = None
    ratios: dict[str, float] = field(default_factory=dict)
    argmax_probe: GridFunction | None = None


def power_iteration(apply_fn: Callable, adjoint_fn: Callable, template: GridFunction,
                    iters: int = 60, tol: float = 1e-7, seed: int = 2718) -> tuple[float, GridFunction]:
    """Largest singular value of a linear operator via the normal map."""
    rng = np.random.default_rng(seed)
    v = template.with_values(rng.standard_normal(template.values.shape))
    sigma = 0.0
    for _ in range(iters):
        w = adjoint_fn(apply_fn(v))
        norm_w = lp_norm(w, 2)
        if norm_w == 0.0:
            return 0.0, v
        w = w * (1.0 / norm_w)
        new_sigma = lp_norm(apply_fn(w), 2) / lp_norm(w, 2)
        v = w
        if sigma > 0 and abs(new_sigma - sigma) <= tol * sigma:
            sigma = new_sigma
            break
        sigma = new_sigma
    return sigma, v


def estimate_norm(apply_fn: Callable, p: float, corpus: list[tuple[str, GridFunction]],
                  adjoint_fn: Callable | None = None, name: str = "operator") -> NormEstimate:
    """Max of ``|T u|_p / |u|_p`` over the corpus (plus power iteration at p=2).

    Zero probes are skipped with a note.  The argmax probe is stored so
    the bound can be re-certified by re-evaluation.
    """
    if not corpus:
        raise ValueError("corpus must be nonempty")
    ratios: dict[str, float] = {}
    best_id, best_val, best_probe = "", -1.0, None
    for pid, u in corpus:
        nu = lp_norm(u, p)
        if nu == 0.0:
            logger.info("estimate_norm(%s): zero probe %s skipped", name, pid)
            continue
        r = lp_norm(apply_fn(u), p) / nu
        ratios[pid] = r
        if r > best_val:
            best_id, best_val, best_probe = pid, r, u
    pi_value = None
    if p == 2.0 and adjoint_fn is not None:
        template = corpus[0][1]
        pi_value, pi_vec = power_iteration(apply_fn, adjoint_fn, template)
        npi = lp_norm(pi_vec, p)
        if npi > 0:
            r = lp_norm(apply_fn(pi_vec), p) / npi
            ratios["power-iteration"] = r
            if r > best_val:
                best_id, best_val, best_probe = "power-iteration", r, pi_vec
    return NormEstimate(best_val, best_id, len(ratios), p,
                        power_iteration=pi_value, ratios=ratios,
                        argmax_probe=best_probe)


@dataclass
class DecayFit:
    """Least-squares line through ``(x, log2 y)`` exponent data."""

    points: list[tuple[float, float]]
    slope: float
    intercept: float
    residual: float


def fit_decay(points: list[tuple[float, float]]) -> DecayFit:
    """Fit ``log2 y = slope * x + intercept``; refuses fewer than 3 points."""
    if len(points) < 3:
        raise ValueError("need at least 3 points for a decay fit")
    xs = np.array([x for x, _ in points], dtype=float)
    ys = np.array([y for _, y in points], dtype=float)
    if len(np.unique(xs)) < 2:
        raise ValueError("degenerate abscissae")
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = float(np.sqrt(np.mean((slope * xs + intercept - ys) ** 2)))
    return DecayFit([(float(x), float(y)) for x, y in points],
                    float(slope), float(intercept), resid)


# ---------------------------------------------------------------------------
# probe corpora
# ---------------------------------------------------------------------------

def standard_corpus(n: int, J: int, eps, seed: int = 0,
                    noise_probes: int = 3) -> list[tuple[str, GridFunction]]:
    """Probes including the known extremizer families.

    Single Haar atoms (extremal for the ring operators), per-scale
    Rademacher sums (extremal for the layer operators), white noise, and
    one ring-supported block.
    """
    eps_t = tuple(eps.eps if hasattr(eps, "eps") else eps)
    corpus: list[tuple[str, GridFunction]] = []
    for t in range(noise_probes):
        spec = ProbeSpec("white-noise", seed=seed * 101 + t)
        corpus.append((spec.probe_id(), generate_probe(spec, n, J)))
    for j in range(0, max(1, J - 2), 2):
        spec = ProbeSpec("single-haar", seed=0,
                         params={"j": j, "k": (0,) * n, "eps": eps_t})
        corpus.append((spec.probe_id(), generate_probe(spec, n, J)))
    for j in range(1, max(2, J - 2), 2):
        spec = ProbeSpec("scale-rademacher", seed=seed * 31 + j,
                         params={"scale": j, "eps": eps_t})
        corpus.append((spec.probe_id(), generate_probe(spec, n, J)))
    if J >= 4:
        spec = ProbeSpec("ring-supported", seed=seed + 7,
                         params={"scale": 1, "lam": 2, "eps": eps_t})
        corpus.append((spec.probe_id(), generate_probe(spec, n, J)))
    return corpus


def interpolation_corpus(n: int, J: int, eps, i0: int, seed: int = 0
                         ) -> list[tuple[str, GridFunction]]:
    """Adversarial corpus for the main inequality.

    All deterministic members are band-limited or piecewise constant at
    scale <= 2^4, so the same corpus denotes the same functions at every
    J >= 6 and ratios can be compared across resolutions.  Anisotropic
    probes nearly constant along ``x_{i0}`` keep ``|R_{i0} u|`` small.
    """
    eps_t = tuple(eps.eps if hasattr(eps, "eps") else eps)
    corpus: list[tuple[str, GridFunction]] = []
    for j in (0, 2, 4):
        spec = ProbeSpec("single-haar", seed=0,
                         params={"j": j, "k": (0,) * n, "eps": eps_t})
        corpus.append((spec.probe_id(), generate_probe(spec, n, J)))
    for j, sd in ((2, 5), (4, 6)):
        spec = ProbeSpec("scale-rademacher", seed=sd,
                         params={"scale": j, "eps": eps_t})
        corpus.append((spec.probe_id(), generate_probe(spec, n, J)))
    for k_perp in (4, 8, 16):
        spec = ProbeSpec("anisotropic-lowfreq", seed=seed * 17 + k_perp,
                         params={"i0": i0, "k_perp": k_perp})
        corpus.append((spec.probe_id(), generate_probe(spec, n, J)))
    for t in range(2):
        spec = ProbeSpec("white-noise", seed=seed * 19 + t)
        corpus.append((spec.probe_id(), generate_probe(spec, n, J)))
    return corpus


# ---------------------------------------------------------------------------
# interpolation experiment
# ---------------------------------------------------------------------------

@dataclass
class InterpolationReport:
    p: float
    eps: tuple
    i0: int
    J: int
    type_exp: float
    riesz_norm: float
    max_ratio: float
    argmax_probe_id: str
    rows: list[dict] = field(default_factory=list)
    layer_table: list[dict] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)


def interpolation_experiment(corpus: list[tuple[str, GridFunction]], eps, i0: int,
                             p: float, J: int, with_layer_table: bool = True,
                             riesz_norm: float | None = None,
                             kernel_tol: float = 1e-9) -> InterpolationReport:
    """Measure ``|P u|_p / (|u|_p^{1/T} |R u|_p^{1-1/T})`` over the corpus.

    Also evaluates the splitting index ``M`` (the dyadic position of
    ``|R| |u| / |R u|``) and, for the worst probe, the per-layer chain:
    composed-inverse layers up to ``M`` and plain layers above.
    Probes in the kernel of ``R_{i0}`` are skipped with a note.
    """
    from .projection import directional_projection

    eps_t = tuple(eps.eps if hasattr(eps, "eps") else eps)
    if eps_t[i0 - 1] != 1:
        raise ValueError("main inequality requires eps_i0 = 1")
    T = exponents(p).type_exp
    if riesz_norm is None:
        riesz_norm = max(
            lp_norm(riesz.riesz_transform(u, i0), p) / lp_norm(u, p)
            for _, u in corpus
            if lp_norm(u, p) > 0
        )
    report = InterpolationReport(p, eps_t, i0, J, T, riesz_norm, -1.0, "")
    argmax_u = None
    for pid, u in corpus:
        norm_u = lp_norm(u, p)
        if norm_u == 0.0:
            report.skipped.append(pid)
            continue
        ru = riesz.riesz_transform(u, i0)
        norm_ru = lp_norm(ru, p)
        if norm_ru <= kernel_tol * norm_u:
            report.skipped.append(pid)
            logger.info("interpolation: probe %s in kernel of R_%d, skipped", pid, i0)
            continue
        norm_pu = lp_norm(directional_projection(u, eps_t), p)
        ratio = norm_pu / (norm_u ** (1.0 / T) * norm_ru ** (1.0 - 1.0 / T))
        M = max(0, int(np.ceil(np.log2(max(riesz_norm * norm_u / norm_ru, 1.0)))))
        row = {"probe": pid, "norm_u": norm_u, "norm_Ru": norm_ru,
               "norm_Pu": norm_pu, "ratio": ratio, "split_index": M}
        report.rows.append(row)
        if ratio > report.max_ratio:
            report.max_ratio = ratio
            report.argmax_probe_id = pid
            argmax_u = (u, ru, M)
    if with_layer_table and argmax_u is not None:
        u, ru, M = argmax_u
        l_cap = J - mollify.MARGIN - 1
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            neg = mollify.negative_layer_projection(
                riesz.riesz_inverse(ru, i0), eps_t)
        report.layer_table.append(
            {"l": "negative", "term": "P_- Rinv R u", "norm": lp_norm(neg, p)}
        )
        for l in range(0, min(M, l_cap) + 1):
            comp = riesz.layer_riesz_composition(ru, eps_t, l, i0)
            report.layer_table.append(
                {"l": l, "term": "P_l Rinv R u", "norm": lp_norm(comp.split, p)}
            )
        for l in range(min(M, l_cap) + 1, l_cap + 1):
            pl = mollify.layer_projection(u, eps_t, l)
            report.layer_table.append(
                {"l": l, "term": "P_l u", "norm": lp_norm(pl, p)}
            )
    return report
