"""Discretised pseudodifferential and Fourier operators.

Two normalisations are available everywhere.  ``unitary`` (default) puts the
factor ``(2 pi)^(-n/2)`` in front of every oscillatory sum so that the
operator with symbol 1 is the identity (pseudo) or the unitary transform
(Fourier operator).  ``literal`` drops the factor and reproduces the bare
integrals, e.g. ``T_1 = (2 pi)^(n/2) id``.

Fourier operators integrate the field against ``e^{-i x xi} tau(x, xi)`` over
the field's *own* nodes (Nystroem rule).  On a self-dual grid those nodes are
also the frequency nodes, which makes ``F_tau = T_tau o F`` (up to the
reflection ``xi -> -xi``) hold to round-off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .besov import SpaceParams, besov_norm
from .grid import FREQUENCY, SPACE, Grid, SampledField, lp_partition, transform
from .symbol import Symbol, builtin_symbol
from .wavelet import WaveletSystem, basis_keys, wavelet_function

UNITARY = "unitary"
LITERAL = "literal"
MATRIX_GUARD = 4096  # N^n limit for dense assembly
_CHUNK_ENTRIES = 1 << 22


def _prefactor(n: int, normalization: str) -> float:
    if normalization == UNITARY:
        return (2.0 * math.pi) ** (-n / 2.0)
    if normalization == LITERAL:
        return 1.0
    raise ValueError(f"normalization must be {UNITARY!r} or {LITERAL!r}, got {normalization!r}")


def _need_space(f: SampledField, what: str) -> None:
    if f.side != SPACE:
        raise ValueError(f"{what} needs a space-side field, got {f.side}")


@dataclass(frozen=True)
class HeatParams:
    t: float
    alpha: float = 1.0

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"heat time must be positive, got {self.t}")
        if not self.alpha > 0:
            raise ValueError(f"fractional exponent must be positive, got {self.alpha}")

    def symbol(self, order: float = 0.0) -> Symbol:
        if self.alpha == 1.0:
            return builtin_symbol("heat", t=self.t, order=order)
        return builtin_symbol("frac_heat", t=self.t, alpha=self.alpha, order=order)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense Nystroem matrix acting on C-ordered flattened samples."""

    entries: np.ndarray
    grid: Grid
    weight: float
    normalization: str
    symbol_name: str

    def __post_init__(self):
        e = self.entries
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("operator matrix has non-finite entries")
        if not self.weight > 0:
            raise ValueError("quadrature weight must be positive")
        e.setflags(write=False)

    @property
    def shape(self):
        return self.entries.shape

    def apply(self, f: SampledField) -> SampledField:
        return f.with_values((self.entries @ f.values.ravel()).reshape(f.grid.shape))


# ---------------------------------------------------------------------------
# pseudodifferential operators


def _chunks(rows: int, cols: int):
    step = max(1, _CHUNK_ENTRIES // max(cols, 1))
    for a in range(0, rows, step):
        yield a, min(rows, a + step)


def pseudo_kernel(sym: Symbol, grid: Grid, normalization: str = UNITARY) -> np.ndarray:
    """Matrix ``K`` with ``T_tau f = K f^`` (frequency samples in, space samples out)."""
    if grid.size > MATRIX_GUARD:
        raise MemoryError(f"N^n = {grid.size} exceeds the dense assembly guard {MATRIX_GUARD}")
    c = _prefactor(grid.n, normalization)
    X = grid.points(SPACE)
    XI = grid.points(FREQUENCY)
    phase = np.exp(1j * (X @ XI.T))
    tau = sym.eval(X[:, None, :], XI[None, :, :])
    return c * grid.dxi**grid.n * phase * tau


def apply_pseudo(sym: Symbol, f: SampledField, normalization: str = UNITARY) -> SampledField:
    """``(T_tau f)(x_j) = c sum_m e^{i x_j xi_m} tau(x_j, xi_m) f^(xi_m) dxi^n``."""
    _need_space(f, "apply_pseudo")
    g = f.grid
    c = _prefactor(g.n, normalization)
    fh = transform(f, "forward")
    undo = (2.0 * math.pi) ** (g.n / 2.0) * c  # inverse transform already carries (2 pi)^(-n/2)
    if sym.x_independent:
        tau = sym.eval(np.zeros(g.n), np.stack(g.mesh(FREQUENCY), -1))
        out = transform(fh.with_values(tau * fh.values), "inverse")
        return out if undo == 1.0 else out * undo
    X = g.points(SPACE)
    XI = g.points(FREQUENCY)
    v = fh.values.ravel()
    res = np.empty(g.size, dtype=complex)
    for a, b in _chunks(g.size, g.size):
        ker = np.exp(1j * (X[a:b] @ XI.T)) * sym.eval(X[a:b, None, :], XI[None, :, :])
        res[a:b] = ker @ v
    return SampledField(g, SPACE, (c * g.dxi**g.n) * res.reshape(g.shape))


def apply_lift(f: SampledField, rho: float) -> SampledField:
    """``I_rho f = (<xi>^{-rho} f^)^vee``."""
    _need_space(f, "apply_lift")
    if rho == 0:
        return f.with_values(f.values.copy())
    return apply_pseudo(builtin_symbol("lift", rho=rho), f)


def heat_semigroup(f: SampledField, hp: HeatParams) -> SampledField:
    """``W_t f = (e^{-t |xi|^{2 alpha}} f^)^vee``."""
    _need_space(f, "heat_semigroup")
    return apply_pseudo(hp.symbol(), f)


# ---------------------------------------------------------------------------
# Fourier operators


def _nodes_1d_matrix(grid: Grid) -> np.ndarray:
    x = grid.nodes
    return np.exp(-1j * np.outer(x, x)) * grid.h


def apply_fourier_op(sym: Symbol, f: SampledField, normalization: str = UNITARY) -> SampledField:
    """``(F_tau f)(x_j) = c sum_m e^{-i x_j x_m} tau(x_j, x_m) f(x_m) h^n``.

    The field's nodes ``x_m`` take the role of the integration variable, so
    the output lives on the same space-side nodes as the input.
    """
    _need_space(f, "apply_fourier_op")
    g = f.grid
    c = _prefactor(g.n, normalization)
    P = g.points(SPACE)
    if sym.x_independent:
        vals = sym.eval(np.zeros(g.n), P).reshape(g.shape) * f.values
        if g.is_self_dual:
            out = transform(f.with_values(vals), "forward").values
            return SampledField(g, SPACE, c * (2.0 * math.pi) ** (g.n / 2.0) * out)
        E = _nodes_1d_matrix(g)
        for axis in range(g.n):
            vals = np.moveaxis(np.tensordot(E, vals, axes=([1], [axis])), 0, axis)
        return SampledField(g, SPACE, c * vals)
    v = f.values.ravel()
    res = np.empty(g.size, dtype=complex)
    for a, b in _chunks(g.size, g.size):
        ker = np.exp(-1j * (P[a:b] @ P.T)) * sym.eval(P[a:b, None, :], P[None, :, :])
        res[a:b] = ker @ v
    return SampledField(g, SPACE, (c * g.h**g.n) * res.reshape(g.shape))


def assemble_fourier_matrix(sym: Symbol, grid: Grid, normalization: str = UNITARY) -> OperatorMatrix:
    """Nystroem matrix ``M[j, m] = c e^{-i x_j x_m} tau(x_j, x_m) h^n``."""
    if grid.size > MATRIX_GUARD:
        raise MemoryError(f"N^n = {grid.size} exceeds the dense assembly guard {MATRIX_GUARD}")
    c = _prefactor(grid.n, normalization)
    P = grid.points(SPACE)
    w = grid.h**grid.n
    M = c * w * np.exp(-1j * (P @ P.T)) * sym.eval(P[:, None, :], P[None, :, :])
    return OperatorMatrix(np.ascontiguousarray(M), grid, c * w, normalization, sym.name)


def _require_x_independent(sym: Symbol) -> None:
    if not sym.x_independent:
        raise ValueError(f"dual operator needs an x-independent symbol, {sym.name} depends on x")


def dual_fourier_apply(sym: Symbol, f: SampledField) -> SampledField:
    """``F'_tau f = tau f^`` (frequency-side output)."""
    _require_x_independent(sym)
    _need_space(f, "dual_fourier_apply")
    fh = transform(f, "forward")
    tau = sym.eval(np.zeros(f.grid.n), np.stack(f.grid.mesh(FREQUENCY), -1))
    return fh.with_values(tau * fh.values)


def assemble_dual_matrix(sym: Symbol, grid: Grid) -> OperatorMatrix:
    """Direct assembly ``M'[a, b] = tau(xi_a) (2 pi)^(-n/2) e^{-i x_b xi_a} h^n``."""
    _require_x_independent(sym)
    if grid.size > MATRIX_GUARD:
        raise MemoryError(f"N^n = {grid.size} exceeds the dense assembly guard {MATRIX_GUARD}")
    c = _prefactor(grid.n, UNITARY)
    X = grid.points(SPACE)
    XI = grid.points(FREQUENCY)
    tau = sym.eval(np.zeros(grid.n), XI)
    w = grid.h**grid.n
    M = c * w * tau[:, None] * np.exp(-1j * (XI @ X.T))
    return OperatorMatrix(M, grid, c * w, UNITARY, f"dual {sym.name}")


# ---------------------------------------------------------------------------
# wavelet-domain matrices


@dataclass
class WaveletMatrix:
    """Entries ``A[(j', G', m'), (j, G, m)] = 2^{j'n} (T psi^j_{G,m}, psi^{j'}_{G',m'})``."""

    keys: list
    entries: np.ndarray
    symbol_name: str
    diagnostics: dict = field(default_factory=dict)

    def row_sums(self) -> np.ndarray:
        return np.abs(self.entries).sum(axis=1)


def wavelet_operator_matrix(sym: Symbol, sys: WaveletSystem, Jmax: int, grid: Grid,
                            normalization: str = UNITARY) -> WaveletMatrix:
    """Wavelet-domain matrix of ``T_tau`` over wavelets supported inside the box."""
    if Jmax > 4:
        raise ValueError(f"Jmax={Jmax} exceeds the combinatorial guard 4")
    keys = basis_keys(sys, grid, Jmax)
    V = np.stack([wavelet_function(sys, j, G, m, grid).values.real.ravel() for j, G, m in keys])
    if sym.x_independent:
        cols = np.stack([apply_pseudo(sym, SampledField(grid, SPACE, v), normalization).values.ravel()
                         for v in V])
    else:
        K = pseudo_kernel(sym, grid, normalization)
        axes = tuple(range(1, grid.n + 1))
        # f^ for every basis function at once
        Vh = V.reshape((-1,) + grid.shape)
        scale = (grid.h / math.sqrt(2.0 * math.pi)) ** grid.n
        Vh = scale * np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(Vh, axes=axes), axes=axes), axes=axes)
        cols = Vh.reshape(len(keys), -1) @ K.T
    lev = np.array([k[0] for k in keys])
    A = (2.0 ** (lev * grid.n))[:, None] * grid.h**grid.n * (V @ cols.T)
    out = WaveletMatrix(keys, A, sym.name)
    out.diagnostics = decay_diagnostics(out)
    return out


def decay_diagnostics(W: WaveletMatrix, bins: int = 8) -> dict:
    """Maximal ``|A|`` binned by lattice distance (same level) and by level gap."""
    keys = W.keys
    A = np.abs(W.entries)
    lev = np.array([k[0] for k in keys])
    corner = np.array([np.asarray(k[2], float) / 2.0 ** k[0] for k in keys])
    dist = np.sqrt(((corner[:, None, :] - corner[None, :, :]) ** 2).sum(-1))
    same = lev[:, None] == lev[None, :]
    off = same & ~np.eye(len(keys), dtype=bool)
    edges = np.linspace(0.0, dist[off].max() if off.any() else 1.0, bins + 1)
    by_distance = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = off & (dist > lo) & (dist <= hi)
        by_distance.append(float(A[sel].max()) if sel.any() else 0.0)
    gap = np.abs(lev[:, None] - lev[None, :])
    by_gap = [float(A[gap == d].max()) for d in range(int(gap.max()) + 1)]
    return {"distance_edges": edges.tolist(), "max_by_distance": by_distance,
            "max_by_level_gap": by_gap, "max_row_sum": float(A.sum(axis=1).max())}


# ---------------------------------------------------------------------------
# norm probes


@dataclass
class NormEstimate:
    grid: Grid
    estimate: float
    probe_best: float
    best_probe: str
    power_iteration: float | None


def _weight_profile(sp: SpaceParams, grid: Grid):
    part = lp_partition(grid)
    w = sum(4.0 ** (j * sp.s) * b**2 for j, b in enumerate(part.blocks))
    band = grid.radius(FREQUENCY) <= 2.0 ** (part.J - 1)
    return part, w, band


def _power_norm(sym: Symbol, sp: SpaceParams, grid: Grid, iters: int = 500, tol: float = 1e-13):
    """Largest singular value of ``D^(1/2) F T F^-1 P D^(-1/2)`` by power iteration."""
    _, w, band = _weight_profile(sp, grid)
    sw = np.sqrt(w).ravel()
    sel = band.ravel()
    if sym.x_independent:
        tau = sym.eval(np.zeros(grid.n), np.stack(grid.mesh(FREQUENCY), -1)).ravel()
        # a multiplier keeps the band and commutes with the weight
        return float(np.abs(tau[sel]).max())
    else:
        K = pseudo_kernel(sym, grid)
        scale = (grid.h / math.sqrt(2.0 * math.pi)) ** grid.n
        axes = tuple(range(grid.n))
        Kc = K[:, sel].T.reshape((-1,) + grid.shape)
        FK = scale * np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(Kc, axes=[a + 1 for a in axes]),
                                                 axes=[a + 1 for a in axes]), axes=[a + 1 for a in axes])
        rows = (sw[None, :] * FK.reshape(Kc.shape[0], -1)).T / sw[sel][None, :]
    v = np.ones(rows.shape[1], dtype=complex) / math.sqrt(rows.shape[1])
    sigma = 0.0
    for _ in range(iters):
        y = rows.conj().T @ (rows @ v)
        nv = np.linalg.norm(y)
        if nv == 0:
            return 0.0
        new = math.sqrt(nv)
        v = y / nv
        if abs(new - sigma) <= tol * new:
            sigma = new
            break
        sigma = new
    return sigma


def operator_norm_probe(sym: Symbol, sp: SpaceParams, grids, probes: int = 20,
                        seed: int | None = None, refine: bool = True) -> list[NormEstimate]:
    """Lower-bound estimates of ``||T_tau||`` on ``B^s_{p,p}`` for each grid.

    The estimate is the largest ratio over the deterministic probe suite;
    for ``p = 2`` it is refined by power iteration on the discretised
    quadratic form (exact for the truncated grid operator).
    """
    from .probes import DEFAULT_SEED, probe_suite

    seed = DEFAULT_SEED if seed is None else seed
    out = []
    for grid in grids:
        part = lp_partition(grid)
        best, name = 0.0, ""
        for pr in probe_suite(grid.n, count=probes, seed=seed):
            f = pr.sample(grid)
            denom = besov_norm(f, sp, part)
            if denom == 0:
                continue
            r = besov_norm(apply_pseudo(sym, f), sp, part) / denom
            if r > best:
                best, name = r, pr.name
        pw = None
        if refine and sp.p == 2 and sp.q == 2 and grid.size <= MATRIX_GUARD:
            pw = _power_norm(sym, sp, grid)
        est = max(best, pw) if pw is not None else best
        out.append(NormEstimate(grid, est, best, name, pw))
    return out
