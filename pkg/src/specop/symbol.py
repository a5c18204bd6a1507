"""Symbols tau(x, xi) of Hoermander type (1, delta) and a sampled class check.

A symbol is evaluated on arrays whose trailing axis holds the ``n``
coordinates: ``sym.eval(x, xi)`` with ``x.shape == (..., n)`` and
``xi.shape == (..., n)`` (broadcastable).  Order and type are declared, never
inferred; :func:`verify_class` only samples the derivative bounds.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .grid import Grid


def japanese_bracket(xi: np.ndarray) -> np.ndarray:
    """``<xi> = (1 + |xi|^2)^(1/2)`` over the trailing axis."""
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(1.0 + np.sum(xi * xi, axis=-1))


@dataclass(frozen=True, eq=False)
class Symbol:
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    order: float
    type_delta: float = 0.0
    x_independent: bool = False
    name: str = "symbol"
    exotic: bool = False

    def __post_init__(self):
        if not 0.0 <= self.type_delta <= 1.0:
            raise ValueError(f"type delta must lie in [0, 1], got {self.type_delta}")
        object.__setattr__(self, "exotic", self.exotic or self.type_delta == 1.0)

    def eval(self, x, xi) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        shape = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
        out = np.asarray(self.func(x, xi), dtype=complex)
        return np.broadcast_to(out, shape)

    __call__ = eval


def default_profile(x: np.ndarray) -> np.ndarray:
    """Smooth bounded x-profile ``1 + cos(x_1)/2`` (values in [1/2, 3/2])."""
    return 1.0 + 0.5 * np.cos(x[..., 0])


def builtin_symbol(kind: str, **params) -> Symbol:
    """Construct one of the standard test symbols.

    Parameters
    ----------
    kind : {"one", "lift", "heat", "frac_heat", "modulated"}
    params
        ``lift``: ``rho``.  ``heat``: ``t`` and optional declared ``order``
        (default 0; the Gaussian is of every order).  ``frac_heat``: ``t``,
        ``alpha`` and optional ``order``.  ``modulated``: ``rho`` (default 0)
        and optional ``profile`` callable on ``x[..., n]``.
    """
    if kind == "one":
        return Symbol(lambda x, xi: np.ones(np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])),
                      order=0.0, x_independent=True, name="one")
    if kind == "lift":
        rho = float(params.get("rho", 1.0))
        return Symbol(lambda x, xi: japanese_bracket(xi) ** (-rho), order=-rho,
                      x_independent=True, name=f"lift({rho:g})")
    if kind in ("heat", "frac_heat"):
        t = float(params["t"])
        alpha = float(params.get("alpha", 1.0)) if kind == "frac_heat" else 1.0
        if not t > 0:
            raise ValueError(f"heat symbols need t > 0, got {t}")
        if not alpha > 0:
            raise ValueError(f"fractional exponent must be positive, got {alpha}")

        def heat(x, xi):
            r2 = np.sum(np.asarray(xi) ** 2, axis=-1)
            return np.exp(-t * r2**alpha)

        name = f"heat({t:g})" if kind == "heat" else f"frac_heat({t:g},{alpha:g})"
        return Symbol(heat, order=float(params.get("order", 0.0)), x_independent=True, name=name)
    if kind == "modulated":
        rho = float(params.get("rho", 0.0))
        profile = params.get("profile", default_profile)

        def modulated(x, xi):
            return profile(np.asarray(x)) * japanese_bracket(xi) ** (-rho)

        return Symbol(modulated, order=-rho, name=f"modulated({rho:g})")
    raise ValueError(f"unknown symbol kind {kind!r}")


def order_shift(sym: Symbol, rho: float) -> Symbol:
    """``tau(x, xi) <xi>^rho``, declared order raised by ``rho``."""
    if rho == 0:
        return sym
    f = sym.func
    return replace(sym, func=lambda x, xi: f(x, xi) * japanese_bracket(xi) ** rho,
                   order=sym.order + rho, name=f"{sym.name}*<xi>^{rho:g}")


def reflect(sym: Symbol) -> Symbol:
    """``tau(x, -xi)``; converts between the e^{+ix xi} and e^{-ix xi} conventions."""
    f = sym.func
    return replace(sym, func=lambda x, xi: f(x, -np.asarray(xi)), name=f"{sym.name}(-xi)")


# ---------------------------------------------------------------------------
# class verification

_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
}


def _multi_indices(n: int, max_order: int):
    return [a for a in itertools.product(range(max_order + 1), repeat=n) if sum(a) <= max_order]


@dataclass
class ClassReport:
    """Sampled constants ``c_{alpha,gamma}`` at increasing probe radii."""

    name: str
    order: float
    delta: float
    radii: tuple
    constants: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def constant(self, alpha, gamma) -> float:
        return float(self.constants[(tuple(alpha), tuple(gamma))][-1])

    def failures(self) -> list:
        return [k for k, ok in self.verdicts.items() if not ok]


def _probe_axis(nodes: np.ndarray, count: int) -> np.ndarray:
    stride = max(1, nodes.size // count)
    pts = nodes[::stride]
    # make sure the outermost node is present
    return np.unique(np.concatenate([pts, nodes[-1:]]))


def verify_class(sym: Symbol, max_alpha: int, max_gamma: int, probe: Grid,
                 points_per_axis: int | None = None) -> ClassReport:
    """Sample the ``S^sigma_{1,delta}`` derivative bounds on a probe grid.

    Derivatives come from nested central differences.  The step for a
    combined order ``K`` is ``max(1e-4, eps^(1/(K+2)))``, scaled by
    ``1 + |xi|`` in the frequency directions.  A multi-index fails when its
    running supremum at least doubles on both radius doublings
    ``Xi/4 -> Xi/2 -> Xi``.
    """
    if max_alpha > 3 or max_gamma > 3 or max_alpha < 0 or max_gamma < 0:
        raise ValueError("derivative orders must lie in 0..3")
    n = probe.n
    if points_per_axis is None:
        points_per_axis = 33 if n == 1 else 13
    xs = _probe_axis(probe.nodes, max(3, points_per_axis // 3))
    xis = _probe_axis(probe.freq_nodes, points_per_axis)
    X = np.stack(np.meshgrid(*([xs] * n), indexing="ij"), -1).reshape(-1, n)
    XI = np.stack(np.meshgrid(*([xis] * n), indexing="ij"), -1).reshape(-1, n)
    if sym.x_independent:
        X = X[:1]
    # all (x, xi) pairs
    xx = np.repeat(X, XI.shape[0], axis=0)
    kk = np.tile(XI, (X.shape[0], 1))
    rad = np.sqrt(np.sum(kk * kk, axis=-1))
    base = sym.eval(xx, kk)
    if not np.all(np.isfinite(base)):
        raise ValueError(f"symbol {sym.name} is not finite on the probe set")

    Xi = probe.Xi
    radii = (Xi / 4.0, Xi / 2.0, Xi)
    report = ClassReport(sym.name, sym.order, sym.type_delta, radii)
    eps = np.finfo(float).eps
    alphas = _multi_indices(n, max_alpha)
    gammas = _multi_indices(n, max_gamma)
    for alpha in alphas:
        for gamma in gammas:
            if sym.x_independent and any(alpha):
                deriv = np.zeros_like(rad)
            else:
                deriv = np.abs(_difference(sym, xx, kk, rad, alpha, gamma, eps))
            weight = (1.0 + rad) ** (-sym.order + sum(gamma) - sym.type_delta * sum(alpha))
            c = deriv * weight
            sups = np.array([c[rad <= r * (1 + 1e-12)].max(initial=0.0) for r in radii])
            grows = sups[0] > 0 and sups[1] >= 2.0 * sups[0] and sups[2] >= 2.0 * sups[1]
            report.constants[(alpha, gamma)] = sups
            report.verdicts[(alpha, gamma)] = not grows
    return report


def _difference(sym, xx, kk, rad, alpha, gamma, eps):
    K = sum(alpha) + sum(gamma)
    if K == 0:
        return sym.eval(xx, kk)
    step = max(1e-4, eps ** (1.0 / (K + 2)))
    hx = step
    hk = step * (1.0 + rad)
    n = xx.shape[-1]
    orders = list(alpha) + list(gamma)
    stencils = [_STENCILS[o] for o in orders]
    total = np.zeros(xx.shape[0], dtype=complex)
    for combo in itertools.product(*[range(len(s[0])) for s in stencils]):
        coef = 1.0
        dx = np.zeros_like(xx)
        dk = np.zeros_like(kk)
        for d, i in enumerate(combo):
            off, w = stencils[d][0][i], stencils[d][1][i]
            coef *= w
            if d < n:
                dx[:, d] = off * hx
            else:
                dk[:, d - n] = off * hk
        total += coef * sym.eval(xx + dx, kk + dk)
    scale = hx ** sum(alpha) * hk ** sum(gamma)
    out = total / scale
    if not np.all(np.isfinite(out)):
        raise ValueError(f"symbol {sym.name} produced non-finite differences")
    return out
