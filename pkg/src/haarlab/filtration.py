"""Exact rational verification of the dyadic shift combinatorics.

Everything in this module runs in :class:`fractions.Fraction` arithmetic:
admissible interval collections (leftmost children of their ``2^lam``-fold
ancestors, with sizes separated by factors of at least 4), the overlap
bound ``2/3`` for shifted size classes, the inductive atom construction
``A(Q) = (Q u tau_m(Q)) \\ (finer atoms)`` with its ``2|Q|`` and ``|Q|/3``
measure bounds, and the nestedness of the resulting filtration.

The construction is 1-D: in higher dimensions the shift acts along the
first axis only and all other coordinates factor out of every measure
ratio, so these are exactly the quantities that matter.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .grid import GridFunction, lp_norm

__all__ = [
    "ExactInterval",
    "AdmissibleCollection",
    "Atom",
    "Filtration",
    "AtomReport",
    "BLOCK_PATTERNS",
    "build_admissible_collection",
    "lemma_overlap_measure",
    "build_atoms",
    "verify_atom_properties",
    "stein_spotcheck",
]

BLOCK_PATTERNS = ("even-0", "odd-0", "even-1", "odd-1")


def _dyadic_length(j: int) -> Fraction:
    return Fraction(1, 2**j) if j >= 0 else Fraction(2**-j)


@dataclass(frozen=True)
class ExactInterval:
    """Dyadic interval ``[k 2^-j, (k+1) 2^-j)`` with exact endpoints."""

    j: int
    k: int

    @property
    def length(self) -> Fraction:
        return _dyadic_length(self.j)

    @property
    def lo(self) -> Fraction:
        return self.k * self.length

    @property
    def hi(self) -> Fraction:
        return (self.k + 1) * self.length

    def predecessor(self, lam: int) -> "ExactInterval":
        """The unique interval ``2^lam`` levels coarser containing this one."""
        return ExactInterval(self.j - lam, self.k >> lam)

    def shifted(self, m: int) -> "ExactInterval":
        """``tau_m``: translate right by ``m`` own lengths."""
        return ExactInterval(self.j, self.k + m)

    def segments(self) -> list[tuple[Fraction, Fraction]]:
        return [(self.lo, self.hi)]


# -- exact interval-set algebra (disjoint sorted half-open segments) --------

Segments = list[tuple[Fraction, Fraction]]


def _normalize(segs: Segments) -> Segments:
    segs = sorted((lo, hi) for lo, hi in segs if lo < hi)
    out: Segments = []
    for lo, hi in segs:
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def _union(a: Segments, b: Segments) -> Segments:
    return _normalize(list(a) + list(b))


def _intersection(a: Segments, b: Segments) -> Segments:
    out: Segments = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo < hi:
                out.append((lo, hi))
    return _normalize(out)


def _difference(a: Segments, b: Segments) -> Segments:
    out: Segments = []
    for lo, hi in a:
        pieces = [(lo, hi)]
        for blo, bhi in b:
            nxt: Segments = []
            for plo, phi in pieces:
                if bhi <= plo or phi <= blo:
                    nxt.append((plo, phi))
                    continue
                if plo < blo:
                    nxt.append((plo, blo))
                if bhi < phi:
                    nxt.append((bhi, phi))
            pieces = nxt
        out.extend(pieces)
    return _normalize(out)


def _measure(segs: Segments) -> Fraction:
    return sum((hi - lo for lo, hi in segs), Fraction(0))


@dataclass(frozen=True)
class AdmissibleCollection:
    """Finite collection of leftmost-child intervals with 4-separated sizes.

    Invariants (checked at construction):

    * every interval starts where its ``2^lam``-fold predecessor starts,
      i.e. ``k`` is a multiple of ``2^lam``;
    * any two distinct interval lengths differ by a factor of at least 4.
    """

    lam: int
    intervals: tuple[ExactInterval, ...]
    block_pattern: str = "even-0"

    def __post_init__(self):
        if self.lam < 1:
            raise ValueError("lam must be >= 1")
        if len(set(self.intervals)) != len(self.intervals):
            raise ValueError("intervals must be distinct")
        for I in self.intervals:
            if I.k % 2**self.lam != 0:
                raise ValueError(
                    f"interval (j={I.j}, k={I.k}) is not leftmost in its"
                    f" 2^{self.lam}-fold predecessor"
                )
        scales = sorted({I.j for I in self.intervals})
        for a, b in zip(scales, scales[1:]):
            if b - a < 2:
                raise ValueError(
                    f"scales {a} and {b} differ by less than a factor 4 in measure"
                )

    def scales(self) -> list[int]:
        return sorted({I.j for I in self.intervals})

    def at_scale(self, j: int) -> list[ExactInterval]:
        return sorted((I for I in self.intervals if I.j == j), key=lambda I: I.k)


def _block_scales(lam: int, depth: int, block_index: int, pattern: str) -> list[int]:
    """Kept scales of one block under the four stripping patterns.

    A block occupies the ``lam`` consecutive levels starting at
    ``2 b lam`` (offset 0) or ``(2b+1) lam`` (offset 1); within it every
    second level survives, starting from the even or odd slot.
    """
    parity, offset = pattern.split("-")
    start = (2 * block_index + int(offset)) * lam
    first = 0 if parity == "even" else 1
    slots = [start + k for k in range(first, lam, 2)]
    if not slots:
        slots = [start]
    return slots[:depth]


def build_admissible_collection(lam: int, depth: int, block_pattern: str,
                                seed: int, blocks: int = 2,
                                intervals_per_scale: int = 3,
                                window: int = 48) -> AdmissibleCollection:
    """Seeded generator of admissible collections.

    ``depth`` is the number of kept scales per block; the kept scales sit
    two levels apart inside a block of ``lam`` consecutive levels, so the
    collection feeds the overlap lemma with size-class gaps ``d <= lam-1``.
    """
    if lam < 1:
        raise ValueError("infeasible parameters: lam must be >= 1")
    max_depth = max(1, (lam + 1) // 2)
    if not 1 <= depth <= max_depth:
        raise ValueError(
            f"infeasible parameters: depth must be in [1, {max_depth}] for lam={lam}"
        )
    if block_pattern not in BLOCK_PATTERNS:
        raise ValueError(f"unknown block pattern {block_pattern!r}")
    rng = random.Random(seed)
    intervals: list[ExactInterval] = []
    for b in range(blocks):
        for j in _block_scales(lam, depth, b, block_pattern):
            starts = rng.sample(range(window), k=min(intervals_per_scale, window))
            for t in starts:
                intervals.append(ExactInterval(j, t * 2**lam))
    return AdmissibleCollection(lam, tuple(sorted(set(intervals), key=lambda I: (I.j, I.k))),
                                block_pattern)


def lemma_overlap_measure(B: AdmissibleCollection, I: ExactInterval, m: int) -> Fraction:
    """Exact measure of ``I`` meeting all shifted finer size classes.

    Computes ``|I  ^  U_{d=1}^{lam-1} U_{J: |J| = 2^-d |I|} (J u tau_m(J))|``
    and checks the ``(2/3)|I|`` bound.  ``m`` must lie in ``[0, 2^{lam-1}]``.
    """
    if not 0 <= m <= 2 ** (B.lam - 1):
        raise ValueError("lemma hypothesis violated: m out of range [0, 2^(lam-1)]")
    members = set(B.intervals) | {J.shifted(m) for J in B.intervals}
    if I not in members:
        raise ValueError("interval does not belong to B or tau_m(B)")
    segs: Segments = []
    for d in range(1, B.lam):
        for J in B.at_scale(I.j + d):
            segs = _union(segs, J.segments())
            segs = _union(segs, J.shifted(m).segments())
    overlap = _measure(_intersection(segs, I.segments()))
    if overlap > Fraction(2, 3) * I.length:
        raise AssertionError(
            f"overlap bound violated at (j={I.j}, k={I.k}, m={m}): {overlap}"
        )
    return overlap


@dataclass(frozen=True)
class Atom:
    """Atom ``A(Q)`` with its exact point set."""

    base: ExactInterval
    m: int
    segments: tuple[tuple[Fraction, Fraction], ...]

    @property
    def measure(self) -> Fraction:
        return _measure(list(self.segments))


@dataclass
class Filtration:
    """Atoms per scale; scale ``j`` lists the atoms generating ``F_j``."""

    lam: int
    m: int
    levels: dict[int, list[Atom]] = field(default_factory=dict)

    def scales(self) -> list[int]:
        return sorted(self.levels)

    def all_atoms(self) -> list[Atom]:
        return [a for j in self.scales() for a in self.levels[j]]


def _split_blocks(scales: list[int], lam: int) -> list[list[int]]:
    """Group sorted scales into blocks spanning at most ``lam-1`` levels."""
    blocks: list[list[int]] = []
    for j in sorted(scales):
        if blocks and j - blocks[-1][0] <= max(lam - 1, 0):
            blocks[-1].append(j)
        else:
            blocks.append([j])
    return blocks


def build_atoms(B: AdmissibleCollection, m: int) -> Filtration:
    """Inductive atom construction, finest to coarsest within each block.

    At the finest block scale ``A(Q) = Q u tau_m(Q)``; going coarser,
    the union of all previously built atoms of the block is removed.
    """
    if not 0 <= m <= 2 ** (B.lam - 1):
        raise ValueError("lemma hypothesis violated: m out of range [0, 2^(lam-1)]")
    filt = Filtration(B.lam, m)
    for block in _split_blocks(B.scales(), B.lam):
        used: Segments = []
        for j in sorted(block, reverse=True):  # finest (largest j) first
            atoms_here = []
            for Q in B.at_scale(j):
                raw = _union(Q.segments(), Q.shifted(m).segments())
                segs = _difference(raw, used)
                atoms_here.append(Atom(Q, m, tuple(segs)))
            for a in atoms_here:
                used = _union(used, list(a.segments))
            filt.levels.setdefault(j, []).extend(atoms_here)
    return filt


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass
class AtomReport:
    """Outcome of the exact atom verification."""

    lam: int
    m: int
    atoms_checked: int
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "lam": self.lam,
            "m": self.m,
            "atoms_checked": self.atoms_checked,
            "ok": self.ok,
            "violations": self.violations,
        }


def verify_atom_properties(F: Filtration, B: AdmissibleCollection, m: int) -> AtomReport:
    """Exact check of the three atom bounds, nestedness and uniqueness.

    For every atom: ``|A(Q)| <= 2|Q|``, ``|Q ^ A(Q)| >= |Q|/3`` and
    ``|tau_m(Q) ^ A(Q)| >= |Q|/3``; across scales atoms are nested or
    disjoint; per size class at most one interval of the collection meets
    any ``I`` through ``J u tau_m(J)``.
    """
    report = AtomReport(B.lam, m, atoms_checked=0)

    def flag(kind: str, Q: ExactInterval, **extra):
        entry = {"kind": kind, "j": Q.j, "k": str(Q.k), "lam": B.lam, "m": m}
        entry.update(extra)
        report.violations.append(entry)

    for atom in F.all_atoms():
        Q = atom.base
        report.atoms_checked += 1
        segs = list(atom.segments)
        total = _measure(segs)
        if total > 2 * Q.length:
            flag("atom-measure", Q, measure=_frac_str(total))
        in_q = _measure(_intersection(segs, Q.segments()))
        if in_q < Fraction(Q.length, 3):
            flag("base-overlap", Q, measure=_frac_str(in_q))
        in_shift = _measure(_intersection(segs, Q.shifted(m).segments()))
        if in_shift < Fraction(Q.length, 3):
            flag("shifted-overlap", Q, measure=_frac_str(in_shift))

    atoms = F.all_atoms()
    for i, a in enumerate(atoms):
        for b in atoms[i + 1:]:
            if a.base.j == b.base.j:
                continue
            fine, coarse = (a, b) if a.base.j > b.base.j else (b, a)
            inter = _intersection(list(fine.segments), list(coarse.segments))
            if not inter:
                continue
            if _measure(inter) != fine.measure or _difference(
                list(fine.segments), list(coarse.segments)
            ):
                flag("nestedness", fine.base, against_j=coarse.base.j,
                     against_k=str(coarse.base.k))

    members = list(B.intervals) + [J.shifted(m) for J in B.intervals]
    for I in members:
        for d in range(1, B.lam):
            hits = 0
            for J in B.at_scale(I.j + d):
                joined = _union(J.segments(), J.shifted(m).segments())
                if _intersection(joined, I.segments()):
                    hits += 1
            if hits > 1:
                flag("uniqueness", I, size_class=d, hits=hits)
    return report


# ---------------------------------------------------------------------------
# Stein spot check
# ---------------------------------------------------------------------------

def _atom_masks(F: Filtration, J: int) -> dict[int, list[np.ndarray]]:
    N = 2**J
    masks: dict[int, list[np.ndarray]] = {}
    for j in F.scales():
        level_masks = []
        for atom in F.levels[j]:
            mask = np.zeros(N, dtype=bool)
            for lo, hi in atom.segments:
                a, b = lo * N, hi * N
                if a.denominator != 1 or b.denominator != 1:
                    raise ValueError(
                        f"atom endpoints not representable on 2^{J} grid"
                    )
                if lo < 0 or hi > 1:
                    raise ValueError("atoms must lie inside [0, 1) for the grid check")
                mask[int(a):int(b)] = True
            level_masks.append(mask)
        masks[j] = level_masks
    return masks


def _conditional_expectation_masks(values: np.ndarray, cells: list[np.ndarray]) -> np.ndarray:
    out = values.copy()
    for cell in cells:
        cnt = int(cell.sum())
        if cnt:
            out[cell] = values[cell].mean()
    return out


def stein_spotcheck(fs: list[GridFunction], F: Filtration, p: float,
                    trials: int = 64, seed: int = 0) -> float:
    """Monte-Carlo ratio for the martingale inequality of Stein.

    Pairs the i-th function with the i-th filtration level (increasing),
    draws Rademacher signs per trial and returns the largest observed
    ratio ``|sum r_i E(f_i|F_i)|_p / |sum r_i f_i|_p``.  A consistency
    band, not a proof: conditional expectations are computed exactly on
    the cell partition generated by the nested atoms.
    """
    if not fs:
        raise ValueError("need at least one function")
    if any(f.n != 1 for f in fs):
        raise ValueError("stein spot check uses 1-D grid functions")
    J = fs[0].J
    if any(f.J != J for f in fs):
        raise ValueError("functions must share one grid")
    scales = F.scales()
    if len(fs) > len(scales):
        raise ValueError("more functions than filtration levels")
    masks = _atom_masks(F, J)

    # minimal cells of F_j: each atom minus the finer atoms it contains,
    # plus the complement of all atoms up to level j
    N = 2**J
    cells_per_level: list[list[np.ndarray]] = []
    for idx in range(len(fs)):
        upto = scales[: idx + 1]
        atom_masks = [m for j in upto for m in masks[j]]
        cells = []
        for i, m_i in enumerate(atom_masks):
            cell = m_i.copy()
            for m_k in atom_masks:
                if m_k is not m_i and m_k.sum() < m_i.sum() and np.all(m_k <= m_i):
                    cell &= ~m_k
            cells.append(cell)
        covered = np.zeros(N, dtype=bool)
        for m_i in atom_masks:
            covered |= m_i
        cells.append(~covered)
        cells_per_level.append(cells)

    conditioned = [
        _conditional_expectation_masks(f.values, cells_per_level[i])
        for i, f in enumerate(fs)
    ]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        signs = rng.choice([-1.0, 1.0], size=len(fs))
        num = sum(s * c for s, c in zip(signs, conditioned))
        den = sum(s * f.values for s, f in zip(signs, fs))
        den_norm = lp_norm(GridFunction(1, J, den), p)
        if den_norm == 0.0:
            continue
        num_norm = lp_norm(GridFunction(1, J, num), p)
        worst = max(worst, num_norm / den_norm)
    return worst
