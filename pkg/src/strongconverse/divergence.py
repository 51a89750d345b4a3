"""Quantum Renyi divergences, the Hoeffding anti-divergence and cutoff rates.

All values are in nats.  The sandwiched quantities use the normalisation

    ln Q*_a(rho||eta) = ((a - 1) / a) * D*_a(rho||eta),

where ``Q*_a`` is the Schatten ``a``-norm of ``eta^s rho eta^s`` with
``s = (1 - a) / (2a)``.  With this convention the Hoeffding anti-divergence
can be written either as ``sup_a ((a-1)/a) (r - D*_a)`` or as
``sup_a ((a-1)/a) r - ln Q*_a``; both forms appear in the code below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import logsumexp

from strongconverse.errors import AlphaOutOfRange, KappaOutOfRange, TolOutOfRange, ValidationError
from strongconverse.operators import StatePair, hermitize, mat_power

ALPHA_MAX_INPUT = 1e6
LIMIT = "limit"

# geometric grid in (alpha - 1)
GRID_START = 1e-4
GRID_PER_DECADE = 64
GOLDEN_XTOL = 1e-10

# batch size bound (number of complex entries) for stacked eigvalsh calls
_BATCH_ENTRIES = 2_000_000


@dataclass(frozen=True)
class DivergenceCurve:
    alphas: tuple
    values: tuple
    pair_id: str = ""

    def is_monotone(self, tol: float = 1e-9) -> bool:
        v = np.asarray(self.values)
        return bool(np.all(np.diff(v) >= -tol))


@dataclass(frozen=True)
class HoeffdingResult:
    """Outcome of :func:`hoeffding_anti_divergence`.

    ``arg_alpha`` is the maximising order, ``1.0`` on the zero branch, or the
    string ``"limit"`` when the supremum is attained as ``alpha -> inf``.
    ``truncation_bound`` is ``r / alpha_max``, the most the supremum over
    ``alpha > alpha_max`` can add.
    """

    r: float
    value: float
    arg_alpha: Union[float, str]
    truncation_bound: float
    alpha_max: float = math.inf


class SandwichedProfile:
    """Cached evaluator of ``alpha -> ln Q*_alpha`` for one state pair.

    Works in the eigenbasis of ``eta`` so each order costs one small
    Hermitian eigenvalue problem; many orders are solved as one stacked call.
    """

    def __init__(self, pair: StatePair):
        self.pair = pair
        eta = pair.eta
        u = eta.eigenvectors
        self.log_eta = np.log(eta.eigenvalues)
        self.rho_in_eta = hermitize(u.conj().T @ pair.rho.matrix @ u)
        self._umegaki = None

    @property
    def order_log(self) -> float:
        return self.pair.order_log

    def log_q(self, alphas) -> np.ndarray:
        a = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
        d = self.rho_in_eta.shape[0]
        out = np.empty(a.shape)
        chunk = max(1, _BATCH_ENTRIES // (d * d))
        for start in range(0, a.size, chunk):
            al = a[start:start + chunk]
            s = (1.0 - al) / (2.0 * al)
            scale = np.exp(s[:, None] * self.log_eta[None, :])
            x = scale[:, :, None] * self.rho_in_eta[None, :, :] * scale[:, None, :]
            w = np.linalg.eigvalsh(x)
            with np.errstate(divide="ignore"):
                lw = np.log(np.clip(w, 0.0, None))
            out[start:start + chunk] = logsumexp(al[:, None] * lw, axis=1) / al
        return out

    def divergence(self, alphas) -> np.ndarray:
        a = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
        return np.maximum(a / (a - 1.0) * self.log_q(a), 0.0)

    def umegaki(self) -> float:
        if self._umegaki is None:
            self._umegaki = _umegaki(self.pair)
        return self._umegaki


@lru_cache(maxsize=64)
def profile(pair: StatePair) -> SandwichedProfile:
    """Shared :class:`SandwichedProfile` for a pair (pairs are immutable)."""
    return SandwichedProfile(pair)


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (1.0 < alpha <= ALPHA_MAX_INPUT):
        raise AlphaOutOfRange(f"alpha must lie in (1, {ALPHA_MAX_INPUT:g}], got {alpha}")
    return alpha


def log_q_star(pair: StatePair, alpha: float) -> float:
    return float(profile(pair).log_q(check_alpha(alpha))[0])


def q_star(pair: StatePair, alpha: float) -> float:
    """Schatten ``alpha``-norm of ``eta^s rho eta^s``, ``s = (1-alpha)/(2 alpha)``."""
    return math.exp(log_q_star(pair, alpha))


def sandwiched_renyi(pair: StatePair, alpha: float) -> float:
    """Sandwiched Renyi divergence ``D*_alpha(rho||eta)`` for ``alpha > 1``."""
    alpha = check_alpha(alpha)
    return float(profile(pair).divergence(alpha)[0])


def sandwiched_curve(pair: StatePair, alphas, pair_id: str = "") -> DivergenceCurve:
    a = np.asarray(sorted(float(x) for x in alphas))
    for x in a:
        check_alpha(x)
    vals = profile(pair).divergence(a)
    return DivergenceCurve(tuple(a.tolist()), tuple(vals.tolist()), pair_id)


def petz_renyi(pair: StatePair, alpha: float) -> float:
    """Petz Renyi divergence ``ln tr(rho^a eta^(1-a)) / (a - 1)`` for a in (0,1) or (1,2]."""
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0 or 1.0 < alpha <= 2.0):
        raise AlphaOutOfRange(f"Petz order must lie in (0,1) or (1,2], got {alpha}")
    ra = mat_power(pair.rho, alpha).entries
    eb = mat_power(pair.eta, 1.0 - alpha).entries
    tr = float(np.real(np.sum(ra * eb.T)))
    return max(math.log(tr) / (alpha - 1.0), 0.0)


def _umegaki(pair: StatePair) -> float:
    p = pair.rho.eigenvalues
    pos = p > 0
    neg_entropy = float(np.sum(p[pos] * np.log(p[pos])))
    e, u = pair.eta.eigenvalues, pair.eta.eigenvectors
    rho_diag = np.real(np.einsum("ij,jk,ki->i", u.conj().T, pair.rho.matrix, u))
    cross = float(np.sum(rho_diag * np.log(e)))
    return max(neg_entropy - cross, 0.0)


def umegaki(pair: StatePair) -> float:
    """Relative entropy ``tr rho (ln rho - ln eta)``."""
    return profile(pair).umegaki()


def max_relative(pair: StatePair) -> float:
    return max(pair.order_log, 0.0)


def _golden_max(fun, a: float, b: float, xtol: float = GOLDEN_XTOL, max_iter: int = 200):
    """Golden-section search for a maximum of ``fun`` on ``[a, b]``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if abs(b - a) <= xtol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def _geometric_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    decades = math.log10(hi / lo)
    npts = max(3, int(math.ceil(decades * per_decade)) + 1)
    return np.linspace(math.log(lo), math.log(hi), npts)


def hoeffding_anti_divergence(pair: StatePair, r: float, tol: float = 1e-6,
                              per_decade: int = GRID_PER_DECADE) -> HoeffdingResult:
    """``H*_r = sup_{alpha>1} ((alpha-1)/alpha) (r - D*_alpha)``.

    Returns 0 on ``r <= D_1`` (relative entropy).  Otherwise the objective is
    scanned on a grid geometric in ``alpha - 1`` over ``[1e-4, alpha_max - 1]``
    with ``alpha_max = max(64, r / tol)``, refined by golden-section search on
    the bracketing triple, and compared with the ``alpha -> inf`` limit
    ``r - D_max``.  No unimodality is assumed beyond the bracket.
    """
    if not (0.0 < tol <= 1e-2):
        raise TolOutOfRange(f"tol must lie in (0, 1e-2], got {tol}")
    r = float(r)
    if r < 0 or not math.isfinite(r):
        raise ValidationError(f"r must be a finite nonnegative number, got {r}")
    prof = profile(pair)
    if r == 0.0 or r <= prof.umegaki():
        return HoeffdingResult(r, 0.0, 1.0, 0.0, 1.0)

    alpha_max = max(64.0, r / tol)
    t = _geometric_grid(GRID_START, alpha_max - 1.0, per_decade)
    alphas = 1.0 + np.exp(t)
    vals = (alphas - 1.0) / alphas * r - prof.log_q(alphas)
    i = int(np.argmax(vals))

    def objective(tt: float) -> float:
        al = 1.0 + math.exp(tt)
        return (al - 1.0) / al * r - float(prof.log_q(al)[0])

    lo = t[i - 1] if i > 0 else t[0] - 4.0 * math.log(10.0)
    hi = t[i + 1] if i < t.size - 1 else t[-1]
    t_best, v_best = _golden_max(objective, lo, hi)
    if vals[i] > v_best:
        t_best, v_best = t[i], float(vals[i])
    arg = 1.0 + math.exp(t_best)

    limit = r - max(pair.order_log, 0.0)
    if limit >= v_best:
        v_best, arg = limit, LIMIT
    value = min(max(v_best, 0.0), r)
    return HoeffdingResult(r, value, arg, r / alpha_max, alpha_max)


def cutoff_rate(pair: StatePair, kappa: float, tol: float = 1e-6,
                per_decade: int = 16) -> float:
    """Generalised ``kappa``-cutoff rate ``sup_{r>0} (r - H*_r / kappa)``.

    The supremum is taken over a geometric ``r`` grid on
    ``[tol, 4 (D_max + 1)]`` followed by golden-section refinement; the grid
    is doubled upward while the maximum sits on its top edge.  The ``r -> 0``
    limit (value 0) is included as a candidate.
    """
    kappa = float(kappa)
    if not (0.0 < kappa < 1.0):
        raise KappaOutOfRange(f"kappa must lie in (0, 1), got {kappa}")
    if not (0.0 < tol <= 1e-2):
        raise TolOutOfRange(f"tol must lie in (0, 1e-2], got {tol}")

    if max_relative(pair) <= 1e-12:
        # D*_alpha <= D_max = 0 gives H*_r = r, so r - H*_r / kappa < 0 for all r > 0
        return 0.0

    def h_tol(r: float) -> float:
        return min(1e-2, max(tol, r / ALPHA_MAX_INPUT))

    def objective(log_r: float) -> float:
        r = math.exp(log_r)
        return r - hoeffding_anti_divergence(pair, r, h_tol(r)).value / kappa

    r_hi = 4.0 * (max(pair.order_log, 0.0) + 1.0)
    for _ in range(8):
        lr = _geometric_grid(tol, r_hi, per_decade)
        vals = np.array([objective(x) for x in lr])
        i = int(np.argmax(vals))
        if i < lr.size - 1:
            break
        r_hi *= 2.0
    lo = lr[i - 1] if i > 0 else lr[0]
    hi = lr[i + 1] if i < lr.size - 1 else lr[-1]
    _, best = _golden_max(objective, lo, hi, xtol=1e-9)
    return max(best, float(vals[i]), 0.0)
