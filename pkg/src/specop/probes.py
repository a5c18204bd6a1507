"""Deterministic, versioned probe functions for ratio and norm experiments.

The suite mixes plain Gaussians, modulated Gaussians, smooth compact bumps
and sampled wavelets.  Parameters are jittered with a seeded generator, so a
given ``(version, seed, count, n)`` always yields the same functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import SPACE, Grid, SampledField
from .wavelet import daubechies_system, max_level, wavelet_function

SUITE_VERSION = 1
DEFAULT_SEED = 20240917

# carrier frequencies of the modulated members, spread over a wide band
_CARRIERS = (1.0, 2.0, 3.0, 4.5, 6.0, 8.0, 11.0, 14.0)
_WIDTHS = (0.35, 0.5, 0.7, 1.0, 1.4)


@dataclass(frozen=True)
class Probe:
    name: str
    kind: str
    params: tuple

    def sample(self, grid: Grid) -> SampledField:
        n = grid.n
        X = grid.mesh(SPACE)
        if self.kind == "wavelet":
            u, j, G, m = self.params
            sys = daubechies_system(u)
            j = min(j, max_level(grid))
            return wavelet_function(sys, j, G[:n], m[:n], grid) * 2.0 ** (j * n / 2.0)
        center = self.params[0][:n]
        r2 = sum((x - c) ** 2 for x, c in zip(X, center))
        if self.kind == "gaussian":
            (_, w) = self.params
            vals = np.exp(-r2 / (2 * w * w))
        elif self.kind == "modulated":
            (_, w, k, phase) = self.params
            arg = k * X[0] + (0.5 * k * X[1] if n == 2 else 0.0) + phase
            vals = np.exp(-r2 / (2 * w * w)) * np.cos(arg)
        elif self.kind == "bump":
            (_, rad) = self.params
            t = r2 / rad**2
            with np.errstate(divide="ignore", over="ignore"):
                vals = np.where(t < 1, np.exp(1.0 - 1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
        elif self.kind == "hermite":
            (_, w) = self.params
            vals = (X[0] - center[0]) / w * np.exp(-r2 / (2 * w * w))
        else:
            raise ValueError(f"unknown probe kind {self.kind!r}")
        return SampledField(grid, SPACE, vals)


def probe_suite(n: int = 1, count: int = 20, seed: int = DEFAULT_SEED,
                version: int = SUITE_VERSION) -> list[Probe]:
    """The first ``count`` members of the versioned suite.

    Members interleave the families so that any prefix spans low and high
    frequencies.
    """
    if version != SUITE_VERSION:
        raise ValueError(f"probe suite version {version} unknown (have {SUITE_VERSION})")
    rng = np.random.default_rng([seed, version, n])
    out: list[Probe] = []
    gi = mi = 0
    wavelet_specs = [(4, 0, ("M", "F"), (-3, -3)), (4, 1, ("M", "M"), (-4, -2)),
                     (4, 2, ("F", "M"), (-7, -6)), (4, 3, ("M", "F"), (-12, -9))]
    pattern = ["gaussian", "modulated", "modulated", "bump", "modulated", "wavelet",
               "gaussian", "modulated", "hermite", "modulated"]
    wi = 0
    for i in range(count):
        kind = pattern[i % len(pattern)]
        c = tuple(float(v) for v in rng.uniform(-0.75, 0.75, size=2))
        if kind == "gaussian":
            w = _WIDTHS[gi % len(_WIDTHS)] * float(rng.uniform(0.9, 1.1))
            gi += 1
            out.append(Probe(f"gauss{i}(w={w:.3f})", kind, (c, w)))
        elif kind == "modulated":
            k = _CARRIERS[mi % len(_CARRIERS)] * float(rng.uniform(0.95, 1.05))
            w = float(rng.uniform(0.6, 1.2))
            ph = float(rng.uniform(0, 2 * math.pi))
            mi += 1
            out.append(Probe(f"mod{i}(k={k:.2f})", kind, (c, w, k, ph)))
        elif kind == "bump":
            rad = float(rng.uniform(1.2, 2.0))
            out.append(Probe(f"bump{i}(r={rad:.2f})", kind, (c, rad)))
        elif kind == "hermite":
            w = float(rng.uniform(0.4, 0.8))
            out.append(Probe(f"herm{i}(w={w:.2f})", kind, (c, w)))
        else:
            spec = wavelet_specs[wi % len(wavelet_specs)]
            wi += 1
            out.append(Probe(f"wavelet{i}(j={spec[1]})", kind, spec))
    return out
