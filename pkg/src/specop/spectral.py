"""Dense eigenvalues and singular values, decay fits and predicted decay rates.

The eigensolver is the textbook chain: Parlett-Reinsch balancing, Householder
reduction to Hessenberg form, then complex single-shift QR with Wilkinson
shifts and deflation.  Singular values come from one-sided (Hestenes)
Jacobi.  Both are written out here rather than delegated so that the
ordering, deflation and tolerance rules are explicit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EPS = np.finfo(float).eps
DEFLATION_TOL = 1e-14
FIT_FLOOR = 1e-13


class ConvergenceError(RuntimeError):
    def __init__(self, block: int, iterations: int):
        super().__init__(f"QR iteration did not converge for the block ending at index {block} "
                         f"after {iterations} iterations")
        self.block = block
        self.iterations = iterations


def _as_array(M) -> np.ndarray:
    a = getattr(M, "entries", M)
    a = np.array(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


# ---------------------------------------------------------------------------
# eigenvalues


def balance(A: np.ndarray) -> np.ndarray:
    """Diagonal similarity by powers of two equalising row and column norms."""
    A = A.copy()
    n = A.shape[0]
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            c = np.sum(np.abs(A[:, i])) - abs(A[i, i])
            r = np.sum(np.abs(A[i, :])) - abs(A[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c > g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * s:
                converged = False
                A[i, :] /= f
                A[:, i] *= f
    return A


def hessenberg(A: np.ndarray) -> np.ndarray:
    """Upper Hessenberg form by Householder reflections (unitary similarity)."""
    H = np.array(A, dtype=complex)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v = x.copy()
        v[0] += phase * nx
        v /= np.linalg.norm(v)
        H[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0.0
    return H


def _wilkinson(a, b, c, d):
    """Eigenvalue of ``[[a, b], [c, d]]`` nearer to ``d``."""
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(tr * tr / 4.0 - det)
    l1 = tr / 2.0 + disc
    l2 = tr / 2.0 - disc
    return l1 if abs(l1 - d) < abs(l2 - d) else l2


def _qr_step(B: np.ndarray, mu) -> None:
    """One explicitly shifted QR step ``B - mu = QR, B <- RQ + mu`` in place."""
    m = B.shape[0]
    idx = np.arange(m)
    B[idx, idx] -= mu
    rots = []
    for k in range(m - 1):
        a, b = B[k, k], B[k + 1, k]
        r = math.hypot(abs(a), abs(b))
        if r == 0.0:
            c, s = 1.0, 0.0
        else:
            c, s = a / r, b / r
        rk = B[k, k:].copy()
        rk1 = B[k + 1, k:]
        B[k, k:] = np.conj(c) * rk + np.conj(s) * rk1
        B[k + 1, k:] = -s * rk + c * rk1
        rots.append((c, s))
    for k, (c, s) in enumerate(rots):
        top = min(k + 2, m)
        ck = B[:top, k].copy()
        ck1 = B[:top, k + 1]
        B[:top, k] = ck * c + ck1 * s
        B[:top, k + 1] = -ck * np.conj(s) + ck1 * np.conj(c)
    B[idx, idx] += mu


def hessenberg_qr_eigenvalues(H: np.ndarray, max_iter: int = 100) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix (unsorted)."""
    H = np.array(H, dtype=complex)
    n = H.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    norm = np.abs(H).max()
    hi = n - 1
    its = 0
    while hi > 0:
        l = hi
        while l > 0:
            sub = abs(H[l, l - 1])
            if sub <= DEFLATION_TOL * (abs(H[l, l]) + abs(H[l - 1, l - 1])) or sub <= EPS * norm:
                H[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            hi -= 1
            its = 0
            continue
        its += 1
        if its > max_iter:
            raise ConvergenceError(hi, its - 1)
        if its % 30 == 0:
            mu = H[hi, hi] + 1.5 * abs(H[hi, hi - 1])
        else:
            mu = _wilkinson(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
        block = H[l:hi + 1, l:hi + 1]
        _qr_step(block, mu)
        H[l:hi + 1, l:hi + 1] = block
    return np.diag(H).copy()


def sort_eigenvalues(lam: np.ndarray) -> np.ndarray:
    """Nonincreasing modulus; equal moduli ordered by ascending phase angle."""
    lam = np.asarray(lam, dtype=complex)
    if lam.size == 0:
        return lam
    order = np.lexsort((np.angle(lam), -np.abs(lam)))
    return lam[order]


def eigenvalues(M) -> np.ndarray:
    """All eigenvalues, sorted by nonincreasing modulus (ties: ascending angle)."""
    A = _as_array(M)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"eigenvalues need a square matrix, got {A.shape}")
    H = hessenberg(balance(A))
    return sort_eigenvalues(hessenberg_qr_eigenvalues(H))


# ---------------------------------------------------------------------------
# singular values


def _round_robin(n: int):
    """Disjoint pairings covering all pairs of ``range(n)`` (``n`` even)."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        pairs = [(players[i], players[n - 1 - i]) for i in range(n // 2)]
        rounds.append((np.array([min(p) for p in pairs]), np.array([max(p) for p in pairs])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def singular_values(M, tol: float = 1e-15, max_sweeps: int = 80) -> np.ndarray:
    """Nonincreasing singular values by one-sided Jacobi orthogonalisation."""
    A = _as_array(M)
    if A.shape[0] < A.shape[1]:
        A = A.conj().T
    m, n = A.shape
    if n == 0:
        return np.zeros(0)
    if n % 2:
        A = np.hstack([A, np.zeros((m, 1), dtype=complex)])
        n += 1
    A = A.T.copy()  # rows are the columns being orthogonalised
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        rotated = False
        for p, q in rounds:
            ap, aq = A[p], A[q]
            alpha = np.einsum("ij,ij->i", ap.conj(), ap).real
            beta = np.einsum("ij,ij->i", aq.conj(), aq).real
            gamma = np.einsum("ij,ij->i", ap.conj(), aq)
            g = np.abs(gamma)
            act = g > tol * np.sqrt(alpha * beta)
            act &= g > 0
            if not act.any():
                continue
            rotated = True
            p, q, alpha, beta, gamma, g = p[act], q[act], alpha[act], beta[act], gamma[act], g[act]
            zeta = (beta - alpha) / (2.0 * g)
            sgn = np.where(zeta >= 0, 1.0, -1.0)
            t = sgn / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            ph = gamma / g
            ap, aq = A[p], A[q]
            A[p] = c[:, None] * ap - (s * np.conj(ph))[:, None] * aq
            A[q] = (s * ph)[:, None] * ap + c[:, None] * aq
        if not rotated:
            break
    sv = np.sqrt(np.einsum("ij,ij->i", A.conj(), A).real)
    sv = np.sort(sv)[::-1]
    return sv[: min(_as_array(M).shape)]


# ---------------------------------------------------------------------------
# Weyl inequality


@dataclass
class WeylReport:
    ok: np.ndarray
    log_lambda: np.ndarray
    log_sigma: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.ok))

    @property
    def first_violation(self):
        bad = np.flatnonzero(~self.ok)
        return int(bad[0]) + 1 if bad.size else None


def weyl_check(eigen_moduli, singular_values, tol: float = 1e-8, slack: float = 0.0) -> WeylReport:
    """``prod_{j<=k} |lambda_j| <= (1 + tol) prod_{j<=k} (s_j + slack)`` for every ``k``.

    ``slack`` is an absolute allowance per singular value for backward error
    of the solvers (``0`` gives the plain inequality).
    """
    lam = np.abs(np.asarray(eigen_moduli, dtype=complex))
    s = np.asarray(singular_values, dtype=float)
    if lam.shape != s.shape:
        raise ValueError(f"length mismatch: {lam.size} eigenvalues vs {s.size} singular values")
    with np.errstate(divide="ignore"):
        ll = np.cumsum(np.log(lam))
        ls = np.cumsum(np.log(s + slack))
    ok = (ll <= ls + math.log1p(tol)) | (ll == -np.inf)
    return WeylReport(ok, ll, ls)


def solver_slack(M) -> float:
    """Backward-error allowance ``n eps s_1`` for an assembled matrix."""
    A = _as_array(M)
    return A.shape[0] * EPS * float(np.linalg.norm(A, 2))


# ---------------------------------------------------------------------------
# decay fits

PURE_POWER = "pure-power"
LOG_CORRECTED = "log-corrected"


@dataclass
class DecayFit:
    beta: float
    gamma: float
    intercept: float
    residual: float
    window: tuple
    model: str
    used: int


def default_window(size: int) -> tuple[int, int]:
    return 4, max(5, size // 8)


def fit_decay(values, window=None, model: str = PURE_POWER, gamma: float | None = None,
              floor: float = FIT_FLOOR, reference: float | None = None) -> DecayFit:
    """Least-squares decay exponent of ``values[k-1]`` for ``k`` in the window.

    ``pure-power``: ``log v_k = -beta log k + c``.  ``log-corrected``:
    ``log v_k = -beta log(k / log k) + gamma log log k + c``; pass ``gamma``
    to hold the log exponent fixed.  Values below ``floor * reference``
    (``reference`` defaults to the first value) are left out of the fit.
    """
    v = np.abs(np.asarray(values))
    if window is None:
        window = default_window(v.size)
    lo, hi = int(window[0]), int(window[1])
    if not 1 <= lo < hi <= v.size:
        raise ValueError(f"window [{lo}, {hi}] not inside 1..{v.size}")
    if model == LOG_CORRECTED and lo < 2:
        raise ValueError("log-corrected fits need k >= 2")
    k = np.arange(lo, hi + 1, dtype=float)
    y = v[lo - 1:hi]
    if np.any(y <= 0):
        bad = int(k[np.argmax(y <= 0)])
        raise ValueError(f"nonpositive value at k={bad} inside the fit window")
    ref = v[0] if reference is None else reference
    keep = y >= floor * ref
    k, y = k[keep], y[keep]
    if k.size < 2:
        raise ValueError("fewer than two values above the noise floor in the window")
    ly = np.log(y)
    lk = np.log(k)
    offset = np.zeros_like(k)
    if model == PURE_POWER:
        X = np.stack([-lk, np.ones_like(k)], 1)
    elif model == LOG_CORRECTED:
        cols = [-np.log(k / lk)]
        if gamma is None:
            cols.append(np.log(lk))
        else:
            offset = gamma * np.log(lk)
        X = np.stack(cols + [np.ones_like(k)], 1)
    else:
        raise ValueError(f"unknown model {model!r}")
    coef, *_ = np.linalg.lstsq(X, ly - offset, rcond=None)
    beta, c = coef[0], coef[-1]
    g = coef[1] if X.shape[1] == 3 else (gamma if model == LOG_CORRECTED else 0.0)
    resid = float(np.sqrt(np.mean((ly - offset - X @ coef) ** 2)))
    return DecayFit(float(beta), float(g), float(c), resid, (lo, hi), model, int(k.size))


# ---------------------------------------------------------------------------
# predicted rates

SOURCES = (
    "fourier_small_p", "fourier_large_p",
    "fourier_operator_small_p", "fourier_operator_large_p",
    "heat_operator_small_p", "heat_operator_large_p",
)
POLYNOMIAL = "polynomial"
LOG_CRITICAL = "log-critical"


class HypothesisError(ValueError):
    pass


@dataclass(frozen=True)
class RateBound:
    source: str
    n: int
    p: float
    params: dict
    d: float
    regime: str
    beta: float
    gamma: float
    t_exponent: float | None = None

    def shape(self, k) -> np.ndarray:
        """Unit-constant bound shape ``(k / log k)^-beta (log k)^gamma`` (pure power if polynomial)."""
        k = np.asarray(k, dtype=float)
        if self.regime == POLYNOMIAL:
            return k ** (-self.beta)
        lk = np.log(np.maximum(k, 2.0))
        return (k / lk) ** (-self.beta) * lk**self.gamma


def pivot(n: int, p: float) -> float:
    """``2n (1/p - 1/2)``."""
    return 2.0 * n * (1.0 / p - 0.5)


def _need(cond: bool, source: str, text: str, **vals):
    if not cond:
        got = ", ".join(f"{k}={v:g}" for k, v in vals.items())
        raise HypothesisError(f"{source}: hypothesis {text} fails ({got})")


def _close(a, b):
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def predicted_rate(source: str, n: int, p: float, **params) -> RateBound:
    """Decay exponent promised by the rate statements for the given parameters.

    ``fourier_*`` take ``s1, s2`` (embedding-type smoothness pair),
    ``fourier_operator_*`` take ``sigma, s``, and ``heat_operator_*`` take
    ``s`` and optionally ``t``.
    """
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}; expected one of {SOURCES}")
    if n not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {n}")
    d = pivot(n, p)
    a = 1.0 / p - 0.5
    small = source.endswith("small_p")
    if small:
        _need(1 < p <= 2, source, "1 < p <= 2", p=p)
    else:
        _need(2 <= p < math.inf, source, "2 <= p < inf", p=p)
    t_exp = None
    if source.startswith("fourier_") and not source.startswith("fourier_operator"):
        s1, s2 = float(params["s1"]), float(params["s2"])
        if small:
            _need(s1 > d, source, "s1 > d", s1=s1, d=d)
            _need(s2 < 0, source, "s2 < 0", s2=s2)
            if _close(s2, d - s1):
                regime, beta, gamma = LOG_CRITICAL, -s2 / n, a
            elif s2 > d - s1:
                regime, beta, gamma = POLYNOMIAL, -s2 / n, 0.0
            else:
                regime, beta, gamma = POLYNOMIAL, s1 / n - 2.0 * a, 0.0
        else:
            _need(s1 > 0, source, "s1 > 0", s1=s1)
            _need(s2 < d, source, "s2 < d", s2=s2, d=d)
            if _close(s2, d - s1):
                regime, beta, gamma = LOG_CRITICAL, s1 / n, -a
            elif s2 > d - s1:
                regime, beta, gamma = POLYNOMIAL, -s2 / n + 2.0 * a, 0.0
            else:
                regime, beta, gamma = POLYNOMIAL, s1 / n, 0.0
    elif source.startswith("fourier_operator"):
        sigma, s = float(params["sigma"]), float(params["s"])
        if small:
            _need(sigma > s > d, source, "sigma > s > d", sigma=sigma, s=s, d=d)
            if _close(2 * s, sigma + d):
                regime, beta, gamma = LOG_CRITICAL, (sigma - s) / n, a
            else:
                regime, beta, gamma = POLYNOMIAL, min(sigma - s, s - d) / n, 0.0
        else:
            _need(0 < s < sigma + d, source, "0 < s < sigma + d", s=s, sigma=sigma, d=d)
            if _close(2 * s, sigma + d):
                regime, beta, gamma = LOG_CRITICAL, s / n, -a
            else:
                regime, beta, gamma = POLYNOMIAL, min(s, d - s + sigma) / n, 0.0
    else:
        s = float(params["s"])
        t = params.get("t")
        if t is not None:
            _need(0 < float(t) <= 1, source, "0 < t <= 1", t=float(t))
        if small:
            _need(s > d, source, "s > d", s=s, d=d)
            regime, beta, gamma = LOG_CRITICAL, (s - d) / n, a
        else:
            _need(s > 0, source, "s > 0", s=s)
            regime, beta, gamma = LOG_CRITICAL, s / n, -a
        t_exp = -s + n * a
    clean = {k: float(v) for k, v in params.items() if v is not None}
    return RateBound(source, n, float(p), clean, d, regime, float(beta), float(gamma) + 0.0, t_exp)


# ---------------------------------------------------------------------------
# reports


@dataclass
class SpectrumReport:
    eigen_moduli: np.ndarray
    singular_values: np.ndarray
    fit: DecayFit | None
    predicted: RateBound | None
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())


def spectrum_report(M, window=None, model: str = PURE_POWER, predicted: RateBound | None = None,
                    gamma: float | None = None) -> SpectrumReport:
    """Eigenvalues, singular values, Weyl check, decay fit and rate verdict for a matrix."""
    lam = eigenvalues(M)
    sv = singular_values(M)
    mod = np.abs(lam)
    fit = fit_decay(mod, window, model, gamma=gamma, reference=sv[0]) if mod.size >= 8 else None
    weyl = weyl_check(mod, sv, slack=solver_slack(M))
    verdicts = {
        "ordered": bool(np.all(np.diff(mod) <= 0) and np.all(np.diff(sv) <= 0)),
        "weyl": weyl.holds,
    }
    if predicted is not None and fit is not None:
        verdicts["rate"] = fit.beta >= predicted.beta
    return SpectrumReport(mod, sv, fit, predicted, verdicts)
