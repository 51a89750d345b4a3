"""Optimal tests at a type-II budget, and the combinators used on them.

``np_dense`` solves

    max tr(A T)  s.t.  tr(B T) <= mu,  0 <= T <= 1

through its Lagrange dual ``min_{lam >= 0} tr(A - lam B)_+ + lam mu``: the
map ``lam -> tr(B {A - lam B > 0})`` is non-increasing, so the optimal
threshold is found by bisection, and the optimal test is the positive
projector of ``A - lam* B`` plus a fractional weight on its null space.

``np_classical`` does the same for ``n`` copies of a classical pair without
ever forming the ``d^n`` outcome space: outcomes sharing a likelihood ratio
class are merged, and the test is a greedy fill over type classes in
decreasing likelihood-ratio order.  Everything there runs in log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.special import logsumexp

from strongconverse.errors import (
    BadBlockParams,
    BisectionFailure,
    DimMismatch,
    OrderViolation,
    PositiveLogFactor,
    ValidationError,
)
from strongconverse.operators import (
    DEFAULT_DENSE_CAP,
    DensityOperator,
    HermitianOperator,
    StatePair,
    TestOperator,
    hermitize,
    loewner_leq,
    order_constant,
    tensor_power,
)
from strongconverse.pinching import (
    DEFAULT_TYPE_CAP,
    ClassicalPair,
    PinchingSpec,
    log_multinomial,
    pinch,
    type_counts,
)

BOUNDARY_TOL = 1e-11
BISECTION_RTOL = 1e-14
MAX_DUALITY_GAP = 1e-9
GROUP_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class ClassicalTest:
    """Randomised likelihood-ratio test over type classes.

    Types ``sorted_type_ids[:cut_index]`` are accepted outright, the type at
    ``cut_index`` with probability ``boundary_weight``, the rest rejected.
    """

    __test__ = False

    counts: np.ndarray
    type_log_p: np.ndarray
    type_log_q: np.ndarray
    sorted_type_ids: np.ndarray
    cut_index: int
    boundary_weight: float

    def _log_mass(self, type_log: np.ndarray) -> float:
        ids = self.sorted_type_ids
        full = type_log[ids[:self.cut_index]]
        terms = list(full)
        if self.cut_index < ids.size and self.boundary_weight > 0:
            terms.append(math.log(self.boundary_weight) + type_log[ids[self.cut_index]])
        return float(logsumexp(terms)) if terms else -math.inf

    def log_type2(self) -> float:
        """``ln q^n(T)``, the spent budget."""
        return self._log_mass(self.type_log_q)

    def log_type1_success(self) -> float:
        return self._log_mass(self.type_log_p)


@dataclass(frozen=True, eq=False)
class NPResult:
    log_budget: float
    log_success: float
    lambda_star: float
    duality_gap: float
    test: Union[TestOperator, ClassicalTest]
    log_lambda_star: float = math.nan

    @property
    def success(self) -> float:
        return math.exp(self.log_success)


def _check_log_mu(log_mu: float) -> float:
    log_mu = float(log_mu)
    if not log_mu <= 0.0:
        raise ValidationError(f"log_mu must be <= 0, got {log_mu}")
    return log_mu


def _split(a: np.ndarray, b: np.ndarray, lam: float):
    w, v = np.linalg.eigh(hermitize(a - lam * b))
    return w, v


def _b_mass(b: np.ndarray, v: np.ndarray, mask: np.ndarray) -> float:
    vm = v[:, mask]
    return float(np.real(np.vdot(vm, b @ vm)))


def np_dense(A: DensityOperator, B: DensityOperator, log_mu: float) -> NPResult:
    """Quantum Neyman-Pearson test for ``A`` against ``B`` at budget ``exp(log_mu)``.

    Raises :class:`BisectionFailure` if the dual certificate does not close
    to within ``1e-9`` once the threshold interval has collapsed.
    """
    if A.dim != B.dim:
        raise DimMismatch(f"A has dim {A.dim}, B has dim {B.dim}")
    log_mu = _check_log_mu(log_mu)
    mu = math.exp(log_mu)
    a, b = A.matrix, B.matrix

    def above(lam):
        w, v = _split(a, b, lam)
        return _b_mass(b, v, w > BOUNDARY_TOL)

    lo, hi = 0.0, 0.0
    if above(0.0) > mu:
        hi = math.exp(order_constant(A, B)) + 1.0
        for _ in range(400):
            if hi - lo <= BISECTION_RTOL * max(1.0, hi):
                break
            mid = 0.5 * (lo + hi)
            if above(mid) <= mu:
                hi = mid
            else:
                lo = mid
    lam = hi
    w, v = _split(a, b, lam)
    gt = w > BOUNDARY_TOL
    eq = np.abs(w) <= BOUNDARY_TOL
    b_gt, b_eq = _b_mass(b, v, gt), _b_mass(b, v, eq)
    weight = 0.0
    if b_eq > 0:
        weight = min(max((mu - b_gt) / b_eq, 0.0), 1.0)
    diag = np.where(gt, 1.0, 0.0) + np.where(eq, weight, 0.0)
    t = hermitize((v * diag) @ v.conj().T)
    success = float(np.real(np.sum(a * t.T)))
    dual = float(np.sum(np.clip(w, 0.0, None))) + lam * mu
    gap = abs(dual - success)
    if gap > MAX_DUALITY_GAP:
        raise BisectionFailure(f"duality gap {gap:.3e} after bisection to lambda={lam!r}")
    test = TestOperator(HermitianOperator(t))
    log_success = math.log(success) if success > 0 else -math.inf
    return NPResult(log_mu, min(log_success, 0.0), lam, gap, test,
                    math.log(lam) if lam > 0 else -math.inf)


def _likelihood_groups(pair: ClassicalPair):
    """Merge outcomes with equal ``(p_i, q_i)``; return aggregated group log-masses."""
    lp, lq = pair.log_p, pair.log_q
    order = np.lexsort((lp, lq))
    groups: list[list[int]] = []
    for idx in order:
        if groups:
            ref = groups[-1][0]
            same_q = abs(lq[idx] - lq[ref]) <= GROUP_RTOL * max(1.0, abs(lq[ref]))
            if np.isneginf(lp[idx]) or np.isneginf(lp[ref]):
                same_p = lp[idx] == lp[ref]
            else:
                same_p = abs(lp[idx] - lp[ref]) <= GROUP_RTOL * max(1.0, abs(lp[ref]))
            if same_q and same_p:
                groups[-1].append(int(idx))
                continue
        groups.append([int(idx)])
    gp = np.array([logsumexp(lp[g]) if np.isfinite(lp[g]).any() else -np.inf for g in groups])
    gq = np.array([logsumexp(lq[g]) for g in groups])
    return gp, gq


def _type_log_mass(counts: np.ndarray, log_group: np.ndarray, lm: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        contrib = np.where(counts > 0, counts * log_group[None, :], 0.0)
    return lm + contrib.sum(axis=1)


def np_classical(pair: ClassicalPair, n: int, log_mu: float,
                 cap: int = DEFAULT_TYPE_CAP) -> NPResult:
    """Exact Neyman-Pearson optimum for ``n`` copies of a classical pair.

    Outcomes with identical ``(p_i, q_i)`` are merged (this loses nothing:
    they are interchangeable under both hypotheses).  The ``K`` merged
    groups index type classes, which are sorted by log-likelihood ratio
    (ties in lexicographic type order) and accepted greedily until the
    budget is met, the last one fractionally.
    """
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    log_mu = _check_log_mu(log_mu)
    gp, gq = _likelihood_groups(pair)
    counts = type_counts(gp.size, n, cap)
    lm = log_multinomial(counts)
    tp = _type_log_mass(counts, gp, lm)
    tq = _type_log_mass(counts, gq, lm)
    with np.errstate(invalid="ignore"):
        llr = np.where(np.isneginf(tp), -np.inf, tp - tq)
    order = np.argsort(-llr, kind="stable")
    cq = np.logaddexp.accumulate(tq[order])
    cp = np.logaddexp.accumulate(tp[order])

    c = int(np.searchsorted(cq, log_mu, side="right"))
    if c >= order.size:
        # budget covers everything
        test = ClassicalTest(counts, tp, tq, order, order.size, 0.0)
        return NPResult(log_mu, min(float(cp[-1]), 0.0), 0.0, 0.0, test, -math.inf)

    prev_q = cq[c - 1] if c > 0 else -np.inf
    prev_p = cp[c - 1] if c > 0 else -np.inf
    if not np.isfinite(prev_q):
        log_rem = log_mu
    elif prev_q >= log_mu:
        log_rem = -math.inf  # the accepted prefix used the budget exactly
    else:
        log_rem = log_mu + math.log1p(-math.exp(prev_q - log_mu))
    weight = min(max(math.exp(log_rem - tq[order[c]]), 0.0), 1.0)
    boundary_p = math.log(weight) + tp[order[c]] if weight > 0 else -np.inf
    log_success = float(np.logaddexp(prev_p, boundary_p))

    log_lam = float(llr[order[c]])
    accepted = order[:c]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = tp[accepted] + np.log1p(-np.exp(log_lam - llr[accepted]))
    terms = terms[np.isfinite(terms)]
    log_dual = float(logsumexp(np.append(terms, log_lam + log_mu)))
    gap = abs(math.exp(log_dual) - math.exp(log_success))
    test = ClassicalTest(counts, tp, tq, order, c, weight)
    with np.errstate(over="ignore"):
        lam = float(np.exp(log_lam))
    return NPResult(log_mu, min(log_success, 0.0), lam, gap, test, log_lam)


# ---------------------------------------------------------------------------
# test combinators


def scale_test(t: TestOperator, log_factor: float) -> TestOperator:
    """Shrink a test by ``exp(log_factor)``; both error functionals scale alike."""
    if log_factor > 0:
        raise PositiveLogFactor(f"log_factor must be <= 0, got {log_factor}")
    return TestOperator(t.op, t.log_scale + float(log_factor))


@dataclass(frozen=True, eq=False)
class BlockTest:
    """``exp(-r (n - k n0)) * T0^{(x)k} (x) 1^{(x)(n - k n0)}``, kept symbolic."""

    __test__ = False

    base: TestOperator
    n0: int
    n: int
    k: int
    pad: int
    log_prefactor: float

    def log_value_from_base(self, log_base_value: float) -> float:
        return self.log_prefactor + self.k * log_base_value

    def log_value(self, state_n0) -> float:
        """Log expectation in ``state^{(x)n}`` given the ``n0``-copy state."""
        return self.log_value_from_base(self.base.log_expectation(state_n0))


def block_test(t0: TestOperator, n0: int, n: int, r: float) -> BlockTest:
    if n0 < 1 or n < n0:
        raise BadBlockParams(f"need n >= n0 >= 1, got n0={n0}, n={n}")
    if r < 0 or not math.isfinite(r):
        raise BadBlockParams(f"r must be finite and nonnegative, got {r}")
    k = n // n0
    pad = n - k * n0
    return BlockTest(t0, int(n0), int(n), int(k), int(pad), -float(r) * pad)


# ---------------------------------------------------------------------------
# finite-n checks of the monotonicity properties


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Trace-preserving CP map ``x -> sum_i K_i x K_i^H`` (its dual is unital)."""

    kraus: tuple

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=np.complex128) for k in self.kraus)
        if not ops:
            raise ValidationError("channel needs at least one Kraus operator")
        dim = ops[0].shape[1]
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(dim))) > 1e-9:
            raise ValidationError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", ops)

    @classmethod
    def unitary_mixture(cls, weights, unitaries) -> "KrausChannel":
        w = np.asarray(weights, dtype=np.float64)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("mixture weights must be a probability vector")
        return cls(tuple(math.sqrt(p) * np.asarray(u) for p, u in zip(w, unitaries)))

    def apply(self, d: DensityOperator) -> DensityOperator:
        m = sum(k @ d.matrix @ k.conj().T for k in self.kraus)
        return DensityOperator.from_matrix(hermitize(m))


def apply_channel(channel, d: DensityOperator) -> DensityOperator:
    if isinstance(channel, PinchingSpec):
        return DensityOperator.from_matrix(pinch(d, channel))
    return channel.apply(d)


def np_copies(rho: DensityOperator, eta: DensityOperator, n: int, log_mu: float,
              cap: int = DEFAULT_DENSE_CAP) -> NPResult:
    """``np_dense`` on ``rho^{(x)n}`` against ``eta^{(x)n}``."""
    return np_dense(tensor_power(rho, n, cap), tensor_power(eta, n, cap), log_mu)


class ReverseDPIResult(NamedTuple):
    success_processed: float
    success_original: float

    @property
    def holds(self) -> bool:
        return self.success_processed <= self.success_original + 1e-9


def reverse_dpi_check(pair: StatePair, channel, n: int, log_mu: float,
                      cap: int = DEFAULT_DENSE_CAP) -> ReverseDPIResult:
    """Optimal ``n``-copy success before and after a channel on both states.

    Any test on the processed states pulls back through the (unital) dual
    map to a test on the originals with identical error values, so
    processing can only lower the optimum.
    """
    rho_p = apply_channel(channel, pair.rho)
    eta_p = apply_channel(channel, pair.eta)
    processed = np_copies(rho_p, eta_p, n, log_mu, cap)
    original = np_copies(pair.rho, pair.eta, n, log_mu, cap)
    return ReverseDPIResult(processed.success, original.success)


class OrderPerturbResult(NamedTuple):
    budget_holds: bool
    scaled_holds: bool
    success_eta_inflated: float
    success_eta: float
    success_eta_tilde: float


def order_perturb_check(rho: DensityOperator, eta: DensityOperator, eta_tilde: DensityOperator,
                        s: float, n: int, log_mu: float,
                        cap: int = DEFAULT_DENSE_CAP) -> OrderPerturbResult:
    """Finite-``n`` consequences of ``eta <= e^s eta_tilde``.

    ``budget_holds``: success against ``eta`` at budget ``e^{ns} mu`` is at
    least the success against ``eta_tilde`` at ``mu``.
    ``scaled_holds``: success against ``eta`` at ``mu`` is at least
    ``e^{-ns}`` times the success against ``eta_tilde`` at ``mu`` (the
    tilde-optimal test shrunk by ``e^{-ns}``).
    """
    if not loewner_leq(eta.matrix, math.exp(s) * eta_tilde.matrix, 1e-10):
        raise OrderViolation(f"eta <= e^{s} eta_tilde does not hold")
    log_mu = _check_log_mu(log_mu)
    tilde = np_copies(rho, eta_tilde, n, log_mu, cap).success
    inflated = np_copies(rho, eta, n, min(0.0, log_mu + n * s), cap).success
    plain = np_copies(rho, eta, n, log_mu, cap).success
    return OrderPerturbResult(
        inflated >= tilde - 1e-9,
        plain >= math.exp(-n * s) * tilde - 1e-9,
        inflated,
        plain,
        tilde,
    )
