"""Finite-``n`` strong converse exponents and their convergence to ``H*_r``.

With type-II budget ``exp(-n r)`` the optimal type-I success probability
``s_n`` decays exponentially once ``r`` exceeds the relative entropy; the
finite-``n`` exponent is ``b_n = -ln(s_n) / n``.  Note that ``b_n`` is built
from the success probability, not the error probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from strongconverse.divergence import hoeffding_anti_divergence
from strongconverse.errors import DenseCapExceeded, InsufficientData, ValidationError
from strongconverse.neyman_pearson import NPResult, np_classical, np_copies
from strongconverse.operators import DEFAULT_DENSE_CAP, StatePair
from strongconverse.pinching import (
    DEFAULT_TYPE_CAP,
    ClassicalPair,
    classical_from_commuting,
    pinched_pair_dense,
)

ENGINES = ("auto", "dense", "classical", "pinched")
COMMUTING_TOL = 1e-9

PairLike = Union[StatePair, ClassicalPair]


@dataclass(frozen=True)
class ExponentRecord:
    n: int
    r: float
    log_success: float
    b_n: float
    engine: str
    duality_gap: float = 0.0


@dataclass(frozen=True)
class ConvergenceReport:
    records: tuple
    h_star: float
    fitted_envelope_C: float
    final_gap: float

    @property
    def ns(self) -> list[int]:
        return [rec.n for rec in self.records]

    @property
    def gaps(self) -> list[float]:
        return [abs(rec.b_n - self.h_star) for rec in self.records]


def as_state_pair(pair: PairLike) -> StatePair:
    return pair.to_state_pair() if isinstance(pair, ClassicalPair) else pair


def _as_classical(pair: PairLike) -> ClassicalPair:
    if isinstance(pair, ClassicalPair):
        return pair
    return classical_from_commuting(pair.rho, pair.eta, COMMUTING_TOL)


def select_engine(pair: PairLike, n: int, engine: str = "auto",
                  cap: int = DEFAULT_DENSE_CAP) -> str:
    """Resolve ``auto``: commuting pairs go classical, others dense within the cap."""
    if engine not in ENGINES:
        raise ValidationError(f"unknown engine {engine!r}; choose from {ENGINES}")
    if engine != "auto":
        return engine
    if isinstance(pair, ClassicalPair) or pair.is_commuting(COMMUTING_TOL):
        return "classical"
    if pair.dim ** n <= cap:
        return "dense"
    raise DenseCapExceeded(
        f"DenseCapExceeded: non-commuting pair needs dimension {pair.dim}^{n} > cap {cap}")


def _solve(pair: PairLike, n: int, log_mu: float, engine: str, cap: int,
           type_cap: int) -> NPResult:
    if engine == "classical":
        return np_classical(_as_classical(pair), n, log_mu, type_cap)
    sp = as_state_pair(pair)
    if engine == "dense":
        return np_copies(sp.rho, sp.eta, n, log_mu, cap)
    pinched = pinched_pair_dense(sp, n, cap)
    reduced = classical_from_commuting(pinched.rho, pinched.eta, COMMUTING_TOL)
    return np_classical(reduced, 1, log_mu, type_cap)


def finite_n_exponent(pair: PairLike, n: int, r: float, engine: str = "auto",
                      cap: int = DEFAULT_DENSE_CAP,
                      type_cap: int = DEFAULT_TYPE_CAP) -> ExponentRecord:
    """``b_n(r)`` from the optimal test at type-II budget ``exp(-n r)``.

    Engines: ``classical`` (type classes, commuting pairs only), ``dense``
    (full tensor power), ``pinched`` (pinch ``rho^n`` onto the commutant of
    ``eta^n`` and solve the resulting commuting problem; an upper bound on
    the dense exponent).
    """
    n = int(n)
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    r = float(r)
    if r < 0 or not math.isfinite(r):
        raise ValidationError(f"r must be finite and nonnegative, got {r}")
    chosen = select_engine(pair, n, engine, cap)
    res = _solve(pair, n, -n * r, chosen, cap, type_cap)
    return ExponentRecord(n, r, res.log_success, -res.log_success / n, chosen, res.duality_gap)


def _envelope(ns, gaps) -> float:
    return max((g * n / math.log(n + 1.0) for n, g in zip(ns, gaps)), default=0.0)


def convergence_sweep(pair: PairLike, r: float, n_schedule, engine: str = "auto",
                      tol: float = 1e-6, cap: int = DEFAULT_DENSE_CAP,
                      type_cap: int = DEFAULT_TYPE_CAP) -> ConvergenceReport:
    """``b_n(r)`` along an ascending schedule, compared with ``H*_r``.

    The envelope constant ``C`` is the smallest value with
    ``|b_n - H*_r| <= C ln(n+1) / n`` on every recorded ``n``.
    """
    schedule = [int(n) for n in n_schedule]
    if not schedule:
        raise ValidationError("n_schedule is empty")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValidationError(f"n_schedule must be strictly ascending, got {schedule}")
    if isinstance(pair, StatePair) and engine in ("auto", "classical") \
            and pair.is_commuting(COMMUTING_TOL):
        pair = _as_classical(pair)
    h = hoeffding_anti_divergence(as_state_pair(pair), r, tol).value
    records = tuple(finite_n_exponent(pair, n, r, engine, cap, type_cap) for n in schedule)
    gaps = [abs(rec.b_n - h) for rec in records]
    return ConvergenceReport(records, h, _envelope(schedule, gaps), gaps[-1])


def b_r_estimate(report: ConvergenceReport) -> tuple[float, float]:
    """``(b_{n_max}, C ln(n_max + 1) / n_max)`` from a sweep of at least three sizes."""
    if len(report.records) < 3:
        raise InsufficientData(f"need at least 3 records, got {len(report.records)}")
    last = report.records[-1]
    return last.b_n, report.fitted_envelope_C * math.log(last.n + 1.0) / last.n
