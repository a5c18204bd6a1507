"""Compactly supported Daubechies wavelets on grids.

Father ``psi_F`` and mother ``psi_M`` are produced by the cascade iteration of
the minimal-phase filter; the tensor-product system

    psi^j_{G,m}(x) = prod_l psi_{G_l}(2^j x_l - m_l)

is sampled on a :class:`~specop.grid.Grid`.  When the grid spacing is an exact
power of two, level ``j`` is sampled with the cascade iterate whose dyadic
resolution equals ``2^j h``; the sampled family is then exactly orthonormal in
the grid inner product and analysis/synthesis form an orthogonal transform.
Other grids fall back to linear interpolation of the stored cascade samples.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._daubechies import DAUBECHIES_TAPS
from .besov import CoeffSet
from .grid import SPACE, Grid, SampledField

MAX_MOMENTS = max(DAUBECHIES_TAPS)


@dataclass(frozen=True, eq=False)
class WaveletSystem:
    """Daubechies father/mother pair with ``u`` vanishing moments.

    ``samples_F``/``samples_M`` are values on ``k 2^-depth``, ``k = 0, 1, ...``
    covering the support ``[0, 2u - 1]``.
    """

    u: int
    taps: np.ndarray
    depth: int
    samples_F: np.ndarray
    samples_M: np.ndarray

    @property
    def support(self) -> int:
        return 2 * self.u - 1

    @property
    def highpass(self) -> np.ndarray:
        return _highpass(self.taps)

    @property
    def abscissae(self) -> np.ndarray:
        return np.arange(self.samples_F.size) / 2.0**self.depth

    def cascade(self, level: int) -> tuple[np.ndarray, np.ndarray]:
        """Father and mother iterates at resolution ``2^-level``."""
        return _cascade(self.u, level)

    def moments(self, count: int | None = None) -> np.ndarray:
        """``int psi_M(x) x^v dx`` for ``v < count`` by dyadic quadrature."""
        count = self.u if count is None else count
        x = self.abscissae
        w = self.samples_M / 2.0**self.depth
        return np.array([np.sum(w * x**v) for v in range(count)])


def _highpass(h: np.ndarray) -> np.ndarray:
    k = np.arange(h.size)
    return (-1.0) ** k * h[::-1]


def _upsample(v: np.ndarray, factor: int) -> np.ndarray:
    out = np.zeros((v.size - 1) * factor + 1)
    out[::factor] = v
    return out


@lru_cache(maxsize=None)
def _cascade(u: int, level: int) -> tuple[np.ndarray, np.ndarray]:
    h = np.asarray(DAUBECHIES_TAPS[u], dtype=float)
    g = _highpass(h)
    if level == 0:
        phi = np.ones(1)
        psi = np.full(1, np.nan)
    else:
        # discrete basis vectors of an L-level transform:
        # H(z) H(z^2) ... H(z^{2^{L-2}}) times H or G at z^{2^{L-1}}
        a = np.ones(1)
        for i in range(level - 1):
            a = np.convolve(a, _upsample(h, 2**i))
        scale = 2.0 ** (level / 2.0)
        phi = scale * np.convolve(a, _upsample(h, 2 ** (level - 1)))
        psi = scale * np.convolve(a, _upsample(g, 2 ** (level - 1)))
    # pad to cover [0, 2u-1] on the 2^-level lattice
    length = (2 * u - 1) * 2**level + 1
    phi = np.pad(phi, (0, length - phi.size))
    psi = np.pad(psi, (0, length - psi.size))
    phi.setflags(write=False)
    psi.setflags(write=False)
    return phi, psi


def daubechies_system(u: int, depth: int = 8) -> WaveletSystem:
    """Daubechies system with ``u`` vanishing moments (``2u`` taps)."""
    if u not in DAUBECHIES_TAPS:
        raise ValueError(f"unsupported moment count u={u}; need 1 <= u <= {MAX_MOMENTS}")
    if depth < 6:
        raise ValueError(f"cascade depth must be >= 6, got {depth}")
    phi, psi = _cascade(u, depth)
    taps = np.asarray(DAUBECHIES_TAPS[u], dtype=float)
    taps.setflags(write=False)
    return WaveletSystem(u=u, taps=taps, depth=depth, samples_F=phi, samples_M=psi)


def genders(n: int, j: int) -> list[tuple[str, ...]]:
    """Admissible gender tuples: all of ``{F,M}^n`` at ``j = 0``, those with an M otherwise."""
    all_g = list(itertools.product("FM", repeat=n))
    return all_g if j == 0 else [g for g in all_g if "M" in g]


def _dyadic_exponent(grid: Grid) -> int | None:
    """``K`` with ``h = 2^-K`` if the spacing is an exact power of two."""
    K = -math.log2(grid.h)
    Kr = round(K)
    return Kr if abs(K - Kr) < 1e-12 else None


def max_level(grid: Grid) -> int:
    """Deepest wavelet level the grid resolves (mother needs spacing <= 2^-(j+1))."""
    return int(math.floor(math.log2(grid.N / (2.0 * grid.R)) + 1e-12)) - 1


class _Sampler:
    """Samples of ``psi_g(2^j x - m)`` on one grid axis, stored as a band.

    Row ``r`` holds the values on grid indices ``start[r] + k``.
    """

    def __init__(self, sys: WaveletSystem, grid: Grid, j: int, gender: str, ms: np.ndarray):
        N = grid.N
        K = _dyadic_exponent(grid)
        self.ms = ms
        if K is not None and K - j >= 1:
            L = K - j
            phi, psi = sys.cascade(L)
            vals = phi if gender == "F" else psi
            # y = 2^j x_i - m = (i - N/2) 2^-L - m vanishes at i = N/2 + m 2^L
            self.start = N // 2 + ms * 2**L
            self.block = np.broadcast_to(vals, (ms.size, vals.size))
        else:
            x = grid.nodes
            step = grid.h * 2.0**j
            width = int(math.ceil(sys.support / step)) + 2
            first = np.ceil((ms / 2.0**j + grid.R) / grid.h - 1e-9).astype(int)
            self.start = first
            idx = first[:, None] + np.arange(width)
            xs = -grid.R + idx * grid.h
            y = 2.0**j * xs - ms[:, None]
            table = sys.samples_F if gender == "F" else sys.samples_M
            self.block = np.interp(y, sys.abscissae, table, left=0.0, right=0.0)
        idx = self.start[:, None] + np.arange(self.block.shape[1])
        self.valid = (idx >= 0) & (idx < N)
        self.idx = np.clip(idx, 0, N - 1)
        self.weights = np.where(self.valid, self.block, 0.0)

    def dense(self, N: int) -> np.ndarray:
        out = np.zeros((self.ms.size, N))
        rows = np.broadcast_to(np.arange(self.ms.size)[:, None], self.idx.shape)
        np.add.at(out, (rows[self.valid], self.idx[self.valid]), self.block[self.valid])
        return out

    def contract(self, a: np.ndarray, axis: int) -> np.ndarray:
        """``sum_i S[r, i] a[..., i, ...]`` along ``axis``; that axis becomes rows."""
        a = np.moveaxis(a, axis, 0)
        gathered = a[self.idx]  # (rows, width, ...)
        out = np.einsum("rk,rk...->r...", self.weights, gathered)
        return np.moveaxis(out, 0, axis)

    def expand(self, c: np.ndarray, axis: int, N: int) -> np.ndarray:
        """Transpose of :meth:`contract`."""
        c = np.moveaxis(c, axis, 0)
        contrib = self.weights[(...,) + (None,) * (c.ndim - 1)] * c[:, None]
        out = np.zeros((N,) + c.shape[1:], dtype=np.result_type(c, float))
        np.add.at(out, self.idx[self.valid], contrib[self.valid])
        return np.moveaxis(out, 0, axis)


def translate_range(grid: Grid, sys: WaveletSystem, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Translates whose support meets the box, and a mask of those fully inside it."""
    scale = grid.R * 2.0**j
    lo = math.floor(-scale - sys.support) + 1
    hi = math.ceil(scale) - 1
    ms = np.arange(lo, hi + 1)
    inside = (ms >= -scale - 1e-9) & (ms + sys.support <= scale + 1e-9)
    return ms, inside


@lru_cache(maxsize=64)
def _samplers(sys: WaveletSystem, grid: Grid, j: int) -> dict:
    ms, inside = translate_range(grid, sys, j)
    return {g: _Sampler(sys, grid, j, g, ms) for g in "FM"}, ms, inside


def _check_level(grid: Grid, j: int) -> None:
    if j < 0 or j > max_level(grid):
        raise ValueError(f"level {j} beyond grid resolution (max {max_level(grid)})")


def wavelet_function(sys: WaveletSystem, j: int, G, m, grid: Grid) -> SampledField:
    """Sample ``psi^j_{G,m}`` on the grid (no ``L_2`` normalisation, as in the tensor definition)."""
    G = tuple(G)
    m = tuple(int(v) for v in np.atleast_1d(m))
    if len(G) != grid.n or len(m) != grid.n:
        raise ValueError("gender and translate must have one entry per dimension")
    if G not in genders(grid.n, j):
        raise ValueError(f"gender {G} not admissible at level {j}")
    _check_level(grid, j)
    samplers, ms, _ = _samplers(sys, grid, j)
    vecs = []
    for g, mi in zip(G, m):
        pos = np.searchsorted(ms, mi)
        if pos >= ms.size or ms[pos] != mi:
            raise ValueError(f"translate {m} at level {j} has no overlap with the box")
        s = samplers[g]
        v = np.zeros(grid.N)
        ok = s.valid[pos]
        v[s.idx[pos][ok]] = s.block[pos][ok]
        vecs.append(v)
    vals = vecs[0] if grid.n == 1 else np.multiply.outer(vecs[0], vecs[1])
    return SampledField(grid, SPACE, vals)


def analyze(f: SampledField, sys: WaveletSystem, Jmax: int) -> CoeffSet:
    """Coefficients ``lambda^{j,G}_m = 2^{jn} (f, psi^j_{G,m})`` for ``j <= Jmax``."""
    if f.side != SPACE:
        raise ValueError("analyze needs a space-side field")
    grid = f.grid
    _check_level(grid, Jmax)
    n = grid.n
    out = CoeffSet(n=n, u=sys.u, Jmax=Jmax)
    for j in range(Jmax + 1):
        samplers, ms, inside = _samplers(sys, grid, j)
        w = (2.0**j * grid.h) ** n
        for G in genders(n, j):
            a = f.values
            for axis, g in enumerate(G):
                a = samplers[g].contract(a, axis)
            a = w * a
            for idx in np.ndindex(a.shape):
                key = (j, G, tuple(int(ms[i]) for i in idx))
                out.entries[key] = complex(a[idx])
                if not all(inside[i] for i in idx):
                    out.straddling.add(key)
    return out


def synthesize(c: CoeffSet, sys: WaveletSystem, grid: Grid) -> SampledField:
    """Evaluate ``sum lambda psi^j_{G,m}`` on the grid."""
    n = grid.n
    total = np.zeros(grid.shape, dtype=complex)
    by_block: dict = {}
    for (j, G, m), v in c.entries.items():
        by_block.setdefault((j, G), []).append((m, v))
    for (j, G), items in sorted(by_block.items()):
        _check_level(grid, j)
        samplers, ms, _ = _samplers(sys, grid, j)
        arr = np.zeros((ms.size,) * n, dtype=complex)
        for m, v in items:
            pos = tuple(int(np.searchsorted(ms, mi)) for mi in m)
            if any(p >= ms.size or ms[p] != mi for p, mi in zip(pos, m)):
                continue  # support misses the box
            arr[pos] += v
        for axis, g in enumerate(G):
            arr = samplers[g].expand(arr, axis, grid.N)
        total += arr
    return SampledField(grid, SPACE, total)


def basis_keys(sys: WaveletSystem, grid: Grid, Jmax: int, inside_only: bool = True) -> list:
    """All ``(j, G, m)`` up to ``Jmax``; by default only supports inside the box."""
    _check_level(grid, Jmax)
    keys = []
    for j in range(Jmax + 1):
        _, ms, inside = _samplers(sys, grid, j)
        sel = ms[inside] if inside_only else ms
        for G in genders(grid.n, j):
            for m in itertools.product(sel.tolist(), repeat=grid.n):
                keys.append((j, G, tuple(m)))
    return keys
