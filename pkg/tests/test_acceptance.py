"""Acceptance criteria 1-14, one pass/fail line each.

Run under pytest (the lines are collected into the terminal summary) or
directly with ``python tests/test_acceptance.py``.  Tolerances are the
fixed acceptance thresholds; nothing here is tuned to make a criterion pass.
"""
import math
import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import (charpoly_roots, fourier_heat_of_gaussian, heat_of_gaussian,  # noqa: E402
                     multiset_distance)
from specop.besov import SpaceParams, besov_norm, seq_norm  # noqa: E402
from specop.grid import (SPACE, SampledField, lebesgue_norm, lp_partition, make_grid, sample,  # noqa: E402
                         self_dual_grid, transform)
from specop.operator import (LITERAL, HeatParams, apply_fourier_op, apply_pseudo,  # noqa: E402
                             assemble_dual_matrix, assemble_fourier_matrix, heat_semigroup,
                             operator_norm_probe)
from specop.probes import probe_suite  # noqa: E402
from specop.spectral import (LOG_CORRECTED, LOG_CRITICAL, PURE_POWER, eigenvalues, fit_decay,  # noqa: E402
                             predicted_rate, singular_values, solver_slack, weyl_check)
from specop.symbol import Symbol, builtin_symbol, reflect  # noqa: E402
from specop.wavelet import analyze, basis_keys, daubechies_system, wavelet_function  # noqa: E402

HEAT_TIMES = (0.05, 0.1, 0.2)
FIT_WINDOW = (4, 32)


# -- shared matrices --------------------------------------------------------------------


@lru_cache(maxsize=None)
def _spectra(kind: str, param: float, N: int):
    """Assembled matrix, eigenvalues and singular values, computed once per run."""
    if kind == "heat":
        grid = make_grid(1, N, 12.0)
        sym = builtin_symbol("heat", t=param)
    elif kind == "modulated":
        grid = self_dual_grid(1, N)
        sym = builtin_symbol("modulated", rho=param)
    else:
        grid = self_dual_grid(1, N)
        sym = builtin_symbol("lift", rho=param) if kind == "lift" else builtin_symbol("heat", t=param)
    M = assemble_fourier_matrix(sym, grid)
    return M, eigenvalues(M), singular_values(M)


ASSEMBLED = ([("heat", t, 256) for t in HEAT_TIMES] + [("modulated", 2.0, 256)]
             + [("lift", 1.0, 128), ("heat_sd", 0.1, 128)])


# -- criteria -----------------------------------------------------------------------------


def criterion_1():
    g = make_grid(1, 256, 8.0)
    part = lp_partition(g)
    inner = np.abs(g.freq_nodes) <= 2.0 ** (part.J - 1)
    err = float(np.abs(sum(part.blocks)[inner] - 1).max())
    return err < 1e-12, f"max |sum phi_j - 1| = {err:.2e} on |xi| <= 2^(J-1), J={part.J} (< 1e-12)"


def criterion_2():
    rng = np.random.default_rng(2)
    worst_rt = worst_pv = 0.0
    for i in range(50):
        n = 1 + i % 2
        g = make_grid(n, [64, 128, 256][i % 3] if n == 1 else 32, float(rng.uniform(1, 20)))
        f = SampledField(g, SPACE, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
        fh = transform(f)
        back = transform(fh, "inverse")
        worst_rt = max(worst_rt, np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values))
        worst_pv = max(worst_pv, abs(lebesgue_norm(fh, 2) / lebesgue_norm(f, 2) - 1))
    ok = worst_rt < 1e-10 and worst_pv < 1e-10
    return ok, f"round trip {worst_rt:.1e}, Parseval {worst_pv:.1e} over 50 fields (< 1e-10)"


def criterion_3():
    g = make_grid(1, 1024, 8.0)  # h = 2^-6
    sys4 = daubechies_system(4)
    keys = basis_keys(sys4, g, 4)
    V = np.stack([wavelet_function(sys4, j, G, m, g).values.real * 2 ** (j / 2) for j, G, m in keys])
    gram = float(np.abs(V @ V.T * g.h - np.eye(len(keys))).max())
    mom = max(float(np.abs(daubechies_system(u).moments()).max()) for u in range(1, 7))
    ok = gram < 1e-5 and mom < 1e-8
    return ok, f"Gram deviation {gram:.1e} over {len(keys)} functions (< 1e-5), moments {mom:.1e} (< 1e-8)"


def criterion_4():
    g = make_grid(1, 16384, 8.0)
    part = lp_partition(g)
    sys6 = daubechies_system(6)
    fields = [pr.sample(g) for pr in probe_suite(1, 20)]
    coeffs = [analyze(f, sys6, 4) for f in fields]
    ok, parts = True, []
    for s, p in [(1, 2), (1.5, 1.5), (0.5, 3)]:
        sp = SpaceParams.besov(s, p)
        r = np.array([seq_norm(c, sp, "b") / besov_norm(f, sp, part) for c, f in zip(coeffs, fields)])
        spread = r.max() / r.min()
        good = r.min() >= 1 / 16 and r.max() <= 16 and spread < 8
        ok &= good
        parts.append(f"(s,p)=({s},{p}) ratios [{r.min():.3f}, {r.max():.3f}] spread {spread:.2f}")
    return ok, "; ".join(parts) + " (within [1/16, 16], spread < 8)"


def criterion_5():
    g = make_grid(1, 256, 12.0)
    one = builtin_symbol("one")
    dense_one = Symbol(one.func, order=0, name="one (dense)")
    fields = [pr.sample(g) for pr in probe_suite(1, 10)]
    rng = np.random.default_rng(5)
    fields.append(SampledField(g, SPACE, rng.normal(size=256) + 1j * rng.normal(size=256)))
    eu = el = 0.0
    for f in fields:
        for sym in (one, dense_one):
            eu = max(eu, float(np.abs(apply_pseudo(sym, f).values - f.values).max()))
            lit = apply_pseudo(sym, f, LITERAL).values
            el = max(el, float(np.abs(lit - math.sqrt(2 * math.pi) * f.values).max()))
    ok = eu < 1e-10 and el < 1e-10
    return ok, f"unitary sup error {eu:.1e}, literal vs sqrt(2 pi) id {el:.1e} (< 1e-10)"


def criterion_6():
    g = self_dual_grid(1, 256)
    worst = 0.0
    for sym in (builtin_symbol("one"), builtin_symbol("lift", rho=1), builtin_symbol("heat", t=0.1)):
        M = assemble_fourier_matrix(sym, g)  # Nystroem quadrature over the field's own nodes
        for pr in probe_suite(1, 10):
            f = pr.sample(g)
            lhs = M.apply(f).values
            rhs = apply_pseudo(reflect(sym), SampledField(g, SPACE, transform(f).values)).values
            worst = max(worst, np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))
    return worst < 1e-9, f"max relative ||F_tau f - T_tau(Ff)|| = {worst:.1e} (< 1e-9)"


def criterion_7():
    g = self_dual_grid(1, 128)
    worst = 0.0
    syms = [builtin_symbol("one"), builtin_symbol("lift", rho=1), builtin_symbol("heat", t=0.1),
            builtin_symbol("frac_heat", t=0.1, alpha=0.75)]
    for sym in syms:
        M = assemble_fourier_matrix(sym, g).entries
        D = assemble_dual_matrix(sym, g).entries
        worst = max(worst, np.linalg.norm(D - M.T) / np.linalg.norm(M))
    return worst < 1e-10, f"||M' - M^T||_F / ||M||_F = {worst:.1e} over {len(syms)} symbols (< 1e-10)"


def criterion_8():
    g = make_grid(1, 256, 12.0)
    x = g.nodes
    gauss = sample(g, lambda v: np.exp(-v**2 / 2))
    worst = 0.0
    for t in (0.1, 0.5):
        worst = max(worst, float(np.abs(heat_semigroup(gauss, HeatParams(t)).values
                                        - heat_of_gaussian(x, t)).max()))
        for a in (0.25, 0.5, 1.0):
            f = sample(g, lambda v: np.exp(-a * v**2))
            out = apply_fourier_op(builtin_symbol("heat", t=t), f, LITERAL).values
            worst = max(worst, float(np.abs(out - fourier_heat_of_gaussian(x, t, a)).max()))
    return worst < 1e-6, f"max pointwise error {worst:.1e} for W_t and W^t (< 1e-6)"


def _bump_profile(x):
    return 1.0 + 0.5 * np.tanh(x[..., 0]) * np.exp(-x[..., 0] ** 2 / 8)


def criterion_9():
    grids = [make_grid(1, N, 8.0) for N in (64, 128, 256)]
    sp = SpaceParams.besov(1, 2)
    ok, parts = True, []
    for name, prof in (("cos", None), ("tanh-bump", _bump_profile)):
        kw = {} if prof is None else {"profile": prof}
        est = operator_norm_probe(builtin_symbol("modulated", rho=0, **kw), sp, grids, probes=20)
        v = np.array([e.estimate for e in est])
        var = v.max() / v.min()
        ok &= var < 2
        parts.append(f"{name}: " + ", ".join(f"{e:.4f}" for e in v) + f" (variation {var:.3f})")
    return ok, "; ".join(parts) + " (< 2)"


def criterion_10():
    fits = {}
    for t in HEAT_TIMES:
        _, lam, _ = _spectra("heat", t, 256)
        fits[t] = fit_decay(np.abs(lam), FIT_WINDOW, PURE_POWER).beta
    beta = fits[0.1]
    rate_ok = {s: beta >= predicted_rate("heat_operator_large_p", 1, 2, s=s, t=0.1).beta for s in (1, 2, 4)}
    svs = [_spectra("heat", t, 256)[2] for t in HEAT_TIMES]
    mono = all(np.all(b <= a * (1 + 1e-10)) for a, b in zip(svs, svs[1:]))
    ok = all(rate_ok.values()) and mono
    verdicts = ", ".join(f"s={s}: {'ok' if v else 'below'}" for s, v in rate_ok.items())
    return ok, (f"beta_hat(t=0.1) over k in [4, 32] = {beta:.3f} ({verdicts}); "
                f"beta_hat at t=0.05/0.2 = {fits[0.05]:.3f}/{fits[0.2]:.3f}; "
                f"singular values nonincreasing in t: {mono}")


def criterion_11():
    _, lam, _ = _spectra("modulated", 2.0, 256)
    mod = np.abs(lam)
    ok, parts = True, []
    for s, p in [(0.5, 2), (1, 2)]:
        bound = predicted_rate("fourier_operator_small_p", 1, p, sigma=2, s=s)
        if bound.regime == LOG_CRITICAL:
            fit = fit_decay(mod, FIT_WINDOW, LOG_CORRECTED, gamma=bound.gamma)
        else:
            fit = fit_decay(mod, FIT_WINDOW, PURE_POWER)
        good = fit.beta >= bound.beta
        ok &= good
        parts.append(f"(s,p)=({s},{p}) {fit.model} beta_hat {fit.beta:.3f} >= {bound.beta:g}")
    return ok, "; ".join(parts)


def criterion_12():
    checked, worst_k = 0, None
    ok = True
    for kind, param, N in ASSEMBLED:
        M, lam, sv = _spectra(kind, param, N)
        rep = weyl_check(np.abs(lam), sv, tol=1e-8, slack=solver_slack(M))
        ok &= rep.holds
        worst_k = worst_k or rep.first_violation
        checked += 1
    rng = np.random.default_rng(12)
    for n in (8, 16, 32, 64):
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        rep = weyl_check(np.abs(eigenvalues(A)), singular_values(A), tol=1e-8, slack=solver_slack(A))
        ok &= rep.holds
        checked += 1
    tail = "" if ok else f", first violation at k={worst_k}"
    return ok, f"Weyl products hold at every k on {checked} matrices (tol 1e-8, slack n eps ||A||){tail}"


def criterion_13():
    rng = np.random.default_rng(13)
    worst_oracle = worst_trace = worst_sim = 0.0
    for _ in range(100):
        A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        lam = eigenvalues(A)
        scale = max(1.0, np.abs(lam).max())
        worst_oracle = max(worst_oracle, multiset_distance(lam, charpoly_roots(A)))
        worst_trace = max(worst_trace, abs(lam.sum() - np.trace(A)) / max(1.0, abs(np.trace(A))))
        P = np.eye(8) + 0.2 * (rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))) / math.sqrt(8)
        worst_sim = max(worst_sim, multiset_distance(eigenvalues(np.linalg.solve(P, A @ P)), lam) / scale)
    ok = worst_oracle < 1e-8 and worst_trace < 1e-7 and worst_sim < 1e-7
    return ok, (f"oracle distance {worst_oracle:.1e} (< 1e-8), trace {worst_trace:.1e}, "
                f"similarity {worst_sim:.1e} (< 1e-7)")


def criterion_14():
    g = make_grid(1, 1024, 16.0)
    part = lp_partition(g)
    lo, hi = SpaceParams.besov(1, 2), SpaceParams.besov(2, 2)
    fields = [pr.sample(g) for pr in probe_suite(1, 10)]
    base = [besov_norm(f, lo, part) for f in fields]
    Q = []
    for k in range(1, 9):
        t = 2.0**-k
        Q.append(max(math.sqrt(t) * besov_norm(heat_semigroup(f, HeatParams(t)), hi, part) / b
                      for f, b in zip(fields, base)))
    Q = np.array(Q)
    spread = Q.max() / Q.min()
    return spread < 10, f"suite max over t in [2^-8, 2^-1] lies in [{Q.min():.3f}, {Q.max():.3f}], spread {spread:.2f} (< 10)"


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 15)}


def _line(num, ok, detail):
    return f"criterion {num:2d} {'PASS' if ok else 'FAIL'}: {detail}"


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num, acceptance_log):
    ok, detail = CRITERIA[num]()
    line = _line(num, ok, detail)
    acceptance_log[num] = line
    print(line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for num in sorted(CRITERIA):
        ok, detail = CRITERIA[num]()
        failed += not ok
        print(_line(num, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
