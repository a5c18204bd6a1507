"""Uniform grids, unitary discrete Fourier transform and dyadic frequency partitions.

Everything in the package lives on a uniform grid over the box ``[-R, R)^n``
(``n`` in {1, 2}).  Spatial nodes are ``x_j = -R + j h`` with ``h = 2R/N`` and
frequency nodes are ``xi_m = m dxi`` for ``m in [-N/2, N/2)`` with
``dxi = pi / R``.  Integrals use the rectangle rule on these nodes.

The transform approximates the unitary continuous Fourier transform

    f^(xi) = (2 pi)^(-n/2) int e^{-i x xi} f(x) dx

and is computed with an FFT plus the phase bookkeeping implied by the
symmetric node layout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

SPACE = "space"
FREQUENCY = "frequency"


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid on ``[-R, R)^n`` with ``N`` points per axis."""

    n: int
    N: int
    R: float

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.N

    @property
    def dxi(self) -> float:
        return math.pi / self.R

    @property
    def Xi(self) -> float:
        """Frequency half-extent ``pi N / (2R)``."""
        return math.pi * self.N / (2.0 * self.R)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N**self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        """1D spatial nodes ``-R + j h``."""
        return (np.arange(self.N) - self.N // 2) * self.h

    @cached_property
    def freq_nodes(self) -> np.ndarray:
        """1D frequency nodes ``m dxi``, ``m = -N/2 .. N/2-1``."""
        return (np.arange(self.N) - self.N // 2) * self.dxi

    def mesh(self, side: str = SPACE) -> list[np.ndarray]:
        """Coordinate arrays (``indexing='ij'``) of shape ``grid.shape``."""
        axis = self.nodes if side == SPACE else self.freq_nodes
        return list(np.meshgrid(*([axis] * self.n), indexing="ij"))

    def points(self, side: str = SPACE) -> np.ndarray:
        """All nodes as an ``(N**n, n)`` array in C order."""
        return np.stack([c.ravel() for c in self.mesh(side)], axis=-1)

    def radius(self, side: str = FREQUENCY) -> np.ndarray:
        """Euclidean norm of the nodes, shape ``grid.shape``."""
        return np.sqrt(sum(c**2 for c in self.mesh(side)))

    def cell_volume(self, side: str = SPACE) -> float:
        step = self.h if side == SPACE else self.dxi
        return step**self.n

    @property
    def is_self_dual(self) -> bool:
        """True when spatial and frequency nodes coincide (``h == dxi``)."""
        return abs(self.h - self.dxi) <= 1e-12 * self.h


def _is_power_of_two(N: int) -> bool:
    return N > 0 and (N & (N - 1)) == 0


def make_grid(n: int, N: int, R: float) -> Grid:
    """Build a grid, validating ``n in {1, 2}``, ``N`` a power of two >= 8, ``R > 0``."""
    if n not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {n}")
    if int(N) != N or not _is_power_of_two(int(N)) or N < 8:
        raise ValueError(f"N must be a power of two >= 8, got {N}")
    if not R > 0:
        raise ValueError(f"half-extent R must be positive, got {R}")
    return Grid(n=n, N=int(N), R=float(R))


def self_dual_grid(n: int, N: int) -> Grid:
    """Grid whose spatial and frequency nodes coincide, ``R = sqrt(pi N / 2)``.

    On such a grid the forward transform maps node values to node values of the
    same lattice, which is what the Fourier-operator identities need.
    """
    return make_grid(n, N, math.sqrt(math.pi * N / 2.0))


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex samples of a function on a grid, tagged space- or frequency-side."""

    grid: Grid
    side: str
    values: np.ndarray

    def __post_init__(self):
        if self.side not in (SPACE, FREQUENCY):
            raise ValueError(f"side must be {SPACE!r} or {FREQUENCY!r}, got {self.side!r}")
        values = np.asarray(self.values, dtype=complex)
        if values.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {values.size}")
        values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", values)

    def with_values(self, values, side: str | None = None) -> "SampledField":
        return SampledField(self.grid, self.side if side is None else side, values)

    def __add__(self, other: "SampledField") -> "SampledField":
        _check_compatible(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SampledField") -> "SampledField":
        _check_compatible(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, alpha) -> "SampledField":
        return self.with_values(alpha * self.values)

    __rmul__ = __mul__


def _check_compatible(a: SampledField, b: SampledField) -> None:
    if a.grid != b.grid or a.side != b.side:
        raise ValueError("fields live on different grids or sides")


def sample(grid: Grid, func, side: str = SPACE) -> SampledField:
    """Evaluate ``func(*coords)`` on the grid nodes of the given side."""
    return SampledField(grid, side, func(*grid.mesh(side)))


def transform(f: SampledField, direction: str = "forward") -> SampledField:
    """Unitary Fourier transform on the grid.

    ``forward`` returns ``(2 pi)^(-n/2) sum_j f(x_j) e^{-i x_j xi_m} h^n`` on the
    frequency nodes; ``inverse`` is its adjoint (and inverse).
    """
    g = f.grid
    axes = tuple(range(g.n))
    if direction == "forward":
        if f.side != SPACE:
            raise ValueError("forward transform needs a space-side field")
        scale = (g.h / math.sqrt(2.0 * math.pi)) ** g.n
        out = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(f.values, axes=axes), axes=axes), axes=axes)
        return SampledField(g, FREQUENCY, scale * out)
    if direction == "inverse":
        if f.side != FREQUENCY:
            raise ValueError("inverse transform needs a frequency-side field")
        scale = (g.dxi * g.N / math.sqrt(2.0 * math.pi)) ** g.n
        out = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(f.values, axes=axes), axes=axes), axes=axes)
        return SampledField(g, SPACE, scale * out)
    raise ValueError(f"unknown direction {direction!r}")


def lebesgue_norm(f: SampledField, p: float) -> float:
    """Riemann-sum ``L_p`` quasi-norm; max modulus for ``p = inf``."""
    if not p > 0:
        raise ValueError(f"exponent p must be positive, got {p}")
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    vol = f.grid.cell_volume(f.side)
    if p == 2:
        return float(math.sqrt(np.sum(a * a) * vol))
    return float((np.sum(a**p) * vol) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Littlewood-Paley partition


def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def phi0(r):
    """Radial bump: 1 on ``|xi| <= 1``, 0 on ``|xi| >= 3/2``, smooth in between."""
    return _smooth_step((1.5 - np.abs(r)) / 0.5)


@dataclass(frozen=True, eq=False)
class LPPartition:
    grid: Grid
    J: int
    blocks: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.blocks)


def partition_depth(grid: Grid) -> int:
    """Largest ``J`` with ``3 * 2^(J-1) <= Xi``."""
    return int(math.floor(math.log2(grid.Xi / 3.0))) + 1 if grid.Xi >= 1.5 else 0


def lp_partition(grid: Grid) -> LPPartition:
    J = partition_depth(grid)
    if J < 1:
        raise ValueError(f"grid too small for a dyadic partition (Xi={grid.Xi:.3g} < 3)")
    r = grid.radius(FREQUENCY)
    blocks = [phi0(r)]
    for j in range(1, J + 1):
        blocks.append(phi0(r / 2.0**j) - phi0(r / 2.0 ** (j - 1)))
    for b in blocks:
        b.setflags(write=False)
    return LPPartition(grid=grid, J=J, blocks=tuple(blocks))


def lp_block(f: SampledField, partition: LPPartition, j: int) -> SampledField:
    """Space-side field ``(phi_j f^)^vee``."""
    if f.side != SPACE:
        raise ValueError("lp_block needs a space-side field")
    if not 0 <= j <= partition.J:
        raise IndexError(f"block index {j} outside 0..{partition.J}")
    fh = transform(f, "forward")
    return transform(fh.with_values(partition.blocks[j] * fh.values), "inverse")


def lp_blocks(f: SampledField, partition: LPPartition) -> np.ndarray:
    """All blocks at once, shape ``(J+1,) + grid.shape``; one forward FFT."""
    if f.side != SPACE:
        raise ValueError("lp_blocks needs a space-side field")
    g = f.grid
    fh = transform(f, "forward").values
    axes = tuple(range(1, g.n + 1))
    stacked = np.stack([b * fh for b in partition.blocks])
    scale = (g.dxi * g.N / math.sqrt(2.0 * math.pi)) ** g.n
    return scale * np.fft.fftshift(
        np.fft.ifftn(np.fft.ifftshift(stacked, axes=axes), axes=axes), axes=axes
    )
