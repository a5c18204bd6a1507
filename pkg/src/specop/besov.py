"""Besov (B) and F-scale quasi-norms and their wavelet sequence-space counterparts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import SPACE, LPPartition, SampledField, lp_blocks


@dataclass(frozen=True)
class SpaceParams:
    """Function space ``A^s_{p,q}`` with ``A`` in {"B", "F"}."""

    family: str
    s: float
    p: float
    q: float

    def __post_init__(self):
        if self.family not in ("B", "F"):
            raise ValueError(f"family must be 'B' or 'F', got {self.family!r}")
        if not (self.p > 0 and self.q > 0):
            raise ValueError(f"p and q must be positive, got p={self.p}, q={self.q}")
        if self.family == "F" and math.isinf(self.p):
            raise ValueError("F-spaces require p < inf")

    @classmethod
    def besov(cls, s: float, p: float, q: float | None = None) -> "SpaceParams":
        """``B^s_{p,q}``; ``q`` defaults to ``p``."""
        return cls("B", s, p, p if q is None else q)


def _lq(values: np.ndarray, q: float, axis=0) -> np.ndarray:
    values = np.abs(values)
    if math.isinf(q):
        return values.max(axis=axis)
    return np.sum(values**q, axis=axis) ** (1.0 / q)


def _lp_of_array(a: np.ndarray, p: float, vol: float) -> float:
    a = np.abs(a)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float((np.sum(a**p) * vol) ** (1.0 / p))


def besov_norm(f: SampledField, sp: SpaceParams, partition: LPPartition) -> float:
    """Fourier-analytic ``B^s_{p,q}`` or ``F^s_{p,q}`` quasi-norm of a sampled field.

    The dyadic sum is truncated at ``partition.J`` (the grid's Nyquist limit).
    """
    if f.side != SPACE:
        raise ValueError("besov_norm needs a space-side field")
    if partition.grid != f.grid:
        raise ValueError("partition built on a different grid")
    blocks = lp_blocks(f, partition)
    weights = 2.0 ** (sp.s * np.arange(partition.J + 1))
    vol = f.grid.cell_volume(SPACE)
    if sp.family == "B":
        per_level = np.array([_lp_of_array(b, sp.p, vol) for b in blocks])
        return float(_lq(weights * per_level, sp.q))
    weighted = weights.reshape((-1,) + (1,) * f.grid.n) * np.abs(blocks)
    return _lp_of_array(_lq(weighted, sp.q, axis=0), sp.p, vol)


# ---------------------------------------------------------------------------
# wavelet coefficient sequences


@dataclass(frozen=True)
class DyadicCube:
    """Cube ``2^-j m + 2^-j (0,1)^n``."""

    j: int
    m: tuple[int, ...]

    @property
    def corner(self) -> np.ndarray:
        return np.asarray(self.m, dtype=float) / 2.0**self.j

    @property
    def side(self) -> float:
        return 2.0 ** (-self.j)


@dataclass
class CoeffSet:
    """Wavelet coefficients ``lambda^{j,G}_m`` keyed by ``(j, G, m)``.

    ``G`` is a tuple over {"F", "M"} and ``m`` a tuple of ints.  ``straddling``
    holds keys whose wavelet support leaves the grid box (computed, flagged).
    """

    n: int
    u: int
    Jmax: int
    entries: dict = field(default_factory=dict)
    straddling: set = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.entries)

    def levels(self) -> list[int]:
        return sorted({k[0] for k in self.entries})

    def level_values(self, j: int, G=None) -> np.ndarray:
        return np.array(
            [v for (jj, gg, _), v in self.entries.items() if jj == j and (G is None or gg == G)],
            dtype=complex,
        )

    def genders(self, j: int) -> list[tuple[str, ...]]:
        return sorted({g for (jj, g, _) in self.entries if jj == j})

    def validate(self) -> None:
        for j, G, m in self.entries:
            if not 0 <= j <= self.Jmax:
                raise ValueError(f"level {j} outside 0..{self.Jmax}")
            if len(G) != self.n or len(m) != self.n:
                raise ValueError(f"key {(j, G, m)} has wrong dimension")
            if j >= 1 and "M" not in G:
                raise ValueError(f"gender {G} not admissible at level {j}")

    def _combine(self, other: "CoeffSet", alpha) -> "CoeffSet":
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0.0) + alpha * v
        return CoeffSet(self.n, self.u, max(self.Jmax, other.Jmax), out,
                        self.straddling | other.straddling)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def scaled(self, alpha) -> "CoeffSet":
        return CoeffSet(self.n, self.u, self.Jmax,
                        {k: alpha * v for k, v in self.entries.items()}, set(self.straddling))


def seq_norm(c: CoeffSet, sp: SpaceParams, kind: str = "b") -> float:
    """Sequence-space quasi-norm ``b^s_{p,q}`` or ``f^s_{p,q}`` of a coefficient set.

    The ``f`` norm integrates the aggregate ``(sum 2^{jsq} |lambda chi_{j,m}|^q)^{1/q}``
    exactly: it is piecewise constant on the dyadic cubes of the finest level
    present, so those cubes serve as the evaluation lattice.
    """
    if kind not in ("b", "f"):
        raise ValueError(f"kind must be 'b' or 'f', got {kind!r}")
    p, q, s, n = sp.p, sp.q, sp.s, c.n
    if not c.entries:
        return 0.0
    if kind == "b":
        per_level = []
        for j in c.levels():
            inner = [_lq(c.level_values(j, G), p) for G in c.genders(j)]
            per_level.append((j, np.array(inner)))
        if math.isinf(q):
            return float(max(2.0 ** (j * (s - n / p)) * v.max() for j, v in per_level))
        total = sum(np.sum((2.0 ** (j * (s - n / p)) * v) ** q) for j, v in per_level)
        return float(total ** (1.0 / q))
    if math.isinf(p):
        raise ValueError("f-sequence norm requires p < inf")
    return _f_sequence_norm(c, s, p, q)


def _f_sequence_norm(c: CoeffSet, s: float, p: float, q: float) -> float:
    n = c.n
    top = max(c.levels())
    keys = list(c.entries)
    ms = np.array([k[2] for k in keys])
    js = np.array([k[0] for k in keys])
    scale = 2 ** (top - js)
    lo = (ms * scale[:, None]).min(axis=0)
    hi = ((ms + 1) * scale[:, None]).max(axis=0)
    shape = tuple(int(v) for v in hi - lo)
    agg = np.zeros(shape)
    for (j, _, m), v, sc in zip(keys, c.entries.values(), scale):
        start = [int(mi * sc - l) for mi, l in zip(m, lo)]
        sl = tuple(slice(a, a + int(sc)) for a in start)
        w = 2.0 ** (j * s) * abs(v)
        if math.isinf(q):
            np.maximum(agg[sl], w, out=agg[sl])
        else:
            agg[sl] += w**q
    if not math.isinf(q):
        agg = agg ** (1.0 / q)
    cell = 2.0 ** (-top * n)
    return float((np.sum(agg**p) * cell) ** (1.0 / p))


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class AdmissibilityReport:
    sigma_p: float
    sigma_pq: float
    u_min_B: int
    u_min_F: int


def _least_integer_above(x: float) -> int:
    return int(math.floor(x)) + 1


def smoothness_thresholds(n: int, sp: SpaceParams) -> AdmissibilityReport:
    """``sigma^n_p``, ``sigma^n_{p,q}`` and the least admissible wavelet orders.

    ``u`` must exceed ``max(s, sigma - s)`` and is at least 1.
    """
    inv_p = 0.0 if math.isinf(sp.p) else 1.0 / sp.p
    inv_q = 0.0 if math.isinf(sp.q) else 1.0 / sp.q
    sigma_p = n * (max(inv_p, 1.0) - 1.0)
    sigma_pq = n * (max(inv_p, inv_q, 1.0) - 1.0)
    u_b = max(1, _least_integer_above(max(sp.s, sigma_p - sp.s)))
    u_f = max(1, _least_integer_above(max(sp.s, sigma_pq - sp.s)))
    return AdmissibilityReport(sigma_p, sigma_pq, u_b, u_f)
