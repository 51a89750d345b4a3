"""Pinching maps, type classes of tensor powers and commuting reductions.

A pinching ``F(x) = sum_j e_j x e_j`` onto the commutant of a
finite-spectrum density ``d = sum_j d_j e_j`` satisfies ``K F(x) >= x`` for
positive ``x`` (``K`` = number of projectors).  For ``d`` tensored ``n``
times the distinct eigenvalues are indexed by compositions of ``n`` into
``K`` parts, of which there are at most ``(n+1)^K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from strongconverse.errors import (
    DimMismatch,
    NotCommuting,
    NotDensity,
    TypeCapExceeded,
    ValidationError,
)
from strongconverse.operators import (
    DEFAULT_DENSE_CAP,
    DensityOperator,
    HermitianOperator,
    StatePair,
    as_matrix,
    commutator_norm,
    hermitize,
    random_density,
    tensor_power,
)

PROJECTOR_TOL = 1e-9
EIGENVALUE_RTOL = 1e-9
DEFAULT_TYPE_CAP = 10 ** 7


@dataclass(frozen=True, eq=False)
class PinchingSpec:
    """Orthogonal projections summing to the identity."""

    projectors: tuple

    def __post_init__(self):
        projs = tuple(p if isinstance(p, HermitianOperator) else HermitianOperator(p)
                      for p in self.projectors)
        if not projs:
            raise ValidationError("a pinching needs at least one projector")
        dim = projs[0].dim
        total = np.zeros((dim, dim), dtype=np.complex128)
        for i, p in enumerate(projs):
            if p.dim != dim:
                raise DimMismatch("projectors have different dimensions")
            e = p.entries
            if np.max(np.abs(e @ e - e)) > PROJECTOR_TOL:
                raise ValidationError(f"projector {i} is not idempotent")
            for j in range(i):
                if np.max(np.abs(e @ projs[j].entries)) > PROJECTOR_TOL:
                    raise ValidationError(f"projectors {j} and {i} are not orthogonal")
            total += e
        if np.max(np.abs(total - np.eye(dim))) > PROJECTOR_TOL:
            raise ValidationError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", projs)

    @property
    def K(self) -> int:
        return len(self.projectors)

    @property
    def dim(self) -> int:
        return self.projectors[0].dim

    @classmethod
    def from_basis(cls, vectors: np.ndarray, labels) -> "PinchingSpec":
        """Group the orthonormal columns of ``vectors`` by ``labels``."""
        labels = np.asarray(labels)
        projs = []
        for lab in sorted(set(labels.tolist())):
            v = vectors[:, labels == lab]
            projs.append(HermitianOperator(hermitize(v @ v.conj().T)))
        return cls(tuple(projs))

    @classmethod
    def computational(cls, dim: int) -> "PinchingSpec":
        return cls.from_basis(np.eye(dim, dtype=np.complex128), np.arange(dim))


def pinch(x, spec: PinchingSpec) -> HermitianOperator:
    """``sum_j e_j x e_j``."""
    m = as_matrix(x)
    if m.shape != (spec.dim, spec.dim):
        raise DimMismatch(f"operator shape {m.shape} vs pinching dim {spec.dim}")
    out = sum(e.entries @ m @ e.entries for e in spec.projectors)
    return HermitianOperator(hermitize(out))


def pinch_density(d: DensityOperator, spec: PinchingSpec) -> DensityOperator:
    return DensityOperator.from_matrix(pinch(d, spec))


def cp_index_check(spec: PinchingSpec, samples: int, seed: int) -> float:
    """Largest ``-lambda_min(K F(x) - x)`` over seeded random states ``x``.

    Samples alternate between full-rank Ginibre states and pure states (the
    latter include the extremal cases).  Nonpositive results mean the index
    bound ``K`` held on every sample.
    """
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for i in range(samples):
        rank = None if i % 2 == 0 else 1
        x = random_density(spec.dim, rng, rank=rank).matrix
        gap = spec.K * pinch(x, spec).entries - x
        worst = max(worst, -float(np.linalg.eigvalsh(hermitize(gap))[0]))
    return worst


def group_eigenvalues(values, rtol: float = EIGENVALUE_RTOL) -> np.ndarray:
    """Label equal-within-``rtol`` entries of a descending array with group ids."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(-values, kind="stable")
    labels = np.empty(values.size, dtype=np.int64)
    group, prev = 0, None
    for idx in order:
        v = values[idx]
        if prev is not None and (prev - v) > rtol * max(abs(prev), abs(v)):
            group += 1
        labels[idx] = group
        prev = v
    return labels


def eigen_pinching(d: DensityOperator, rtol: float = EIGENVALUE_RTOL) -> PinchingSpec:
    """Pinching onto the commutant of ``d`` (one projector per distinct eigenvalue)."""
    return PinchingSpec.from_basis(d.eigenvectors, group_eigenvalues(d.eigenvalues, rtol))


# ---------------------------------------------------------------------------
# type classes


@dataclass(frozen=True)
class TypeClass:
    counts: tuple
    log_multiplicity: float
    log_eta_eigenvalue: float | None = None

    @property
    def n(self) -> int:
        return sum(self.counts)


def composition_count(K: int, n: int) -> int:
    return math.comb(n + K - 1, K - 1)


def type_counts(K: int, n: int, cap: int = DEFAULT_TYPE_CAP) -> np.ndarray:
    """All compositions of ``n`` into ``K`` nonnegative parts, lexicographic order."""
    if K < 1 or n < 0:
        raise ValidationError(f"need K >= 1 and n >= 0, got K={K}, n={n}")
    total = composition_count(K, n)
    if total > cap:
        raise TypeCapExceeded(f"TypeCapExceeded: {total} types for K={K}, n={n} exceeds cap {cap}")

    def build(parts: int, m: int) -> np.ndarray:
        if parts == 1:
            return np.array([[m]], dtype=np.int64)
        blocks = []
        for first in range(m + 1):
            rest = build(parts - 1, m - first)
            blocks.append(np.column_stack([np.full(rest.shape[0], first, dtype=np.int64), rest]))
        return np.vstack(blocks)

    return build(K, n)


def log_multinomial(counts: np.ndarray) -> np.ndarray:
    counts = np.atleast_2d(counts)
    n = counts.sum(axis=1)
    return gammaln(n + 1.0) - gammaln(counts + 1.0).sum(axis=1)


def enumerate_types(K: int, n: int, log_weights=None, cap: int = DEFAULT_TYPE_CAP) -> list[TypeClass]:
    """Type classes of ``n`` draws from ``K`` symbols.

    With ``log_weights`` (log eigenvalues ``ln d_i``) each class also carries
    ``ln prod_i d_i^{j_i}``.
    """
    counts = type_counts(K, n, cap)
    lm = log_multinomial(counts)
    if log_weights is None:
        le = [None] * len(counts)
    else:
        lw = np.asarray(log_weights, dtype=np.float64)
        if lw.shape != (K,):
            raise DimMismatch(f"expected {K} log weights, got shape {lw.shape}")
        with np.errstate(invalid="ignore"):
            le = np.where(counts > 0, counts * lw[None, :], 0.0).sum(axis=1).tolist()
    return [TypeClass(tuple(c.tolist()), float(m), e) for c, m, e in zip(counts, lm, le)]


# ---------------------------------------------------------------------------
# commuting reductions


@dataclass(frozen=True, eq=False)
class ClassicalPair:
    """Two distributions over the same outcomes, stored as log-probabilities."""

    log_p: np.ndarray
    log_q: np.ndarray

    def __post_init__(self):
        lp = np.array(self.log_p, dtype=np.float64)
        lq = np.array(self.log_q, dtype=np.float64)
        if lp.ndim != 1 or lp.shape != lq.shape or lp.size == 0:
            raise DimMismatch("log_p and log_q must be 1-d arrays of equal length")
        if not np.all(np.isfinite(lq)):
            raise NotDensity("q must have full support")
        if np.any(np.isnan(lp)) or np.any(lp == np.inf):
            raise NotDensity("log_p contains NaN or +inf")
        for name, v in (("p", lp), ("q", lq)):
            s = float(logsumexp(v))
            if abs(s) > 1e-10:
                raise NotDensity(f"{name} does not sum to 1 (log-sum {s:.3e})")
        lp.setflags(write=False)
        lq.setflags(write=False)
        object.__setattr__(self, "log_p", lp)
        object.__setattr__(self, "log_q", lq)

    @classmethod
    def from_probabilities(cls, p, q) -> "ClassicalPair":
        p = np.asarray(p, dtype=np.float64)
        q = np.asarray(q, dtype=np.float64)
        if np.any(p < 0) or np.any(q < 0):
            raise NotDensity("probabilities must be nonnegative")
        with np.errstate(divide="ignore"):
            return cls(np.log(p), np.log(q))

    @property
    def n_outcomes(self) -> int:
        return self.log_p.size

    @property
    def p(self) -> np.ndarray:
        return np.exp(self.log_p)

    @property
    def q(self) -> np.ndarray:
        return np.exp(self.log_q)

    def to_state_pair(self) -> StatePair:
        return StatePair(DensityOperator.diagonal(self.p), DensityOperator.diagonal(self.q))


def classical_from_commuting(rho: DensityOperator, eta: DensityOperator,
                             tol: float = 1e-9) -> ClassicalPair:
    """Read off the joint spectrum of two commuting densities.

    Diagonalises ``eta``, then diagonalises ``rho`` inside each eigenspace of
    ``eta``; the two lists of eigenvalues in that common basis are returned.
    """
    if rho.dim != eta.dim:
        raise DimMismatch(f"rho has dim {rho.dim}, eta has dim {eta.dim}")
    c = commutator_norm(rho, eta)
    if c > tol:
        raise NotCommuting(f"commutator norm {c:.3e} exceeds {tol}")
    labels = group_eigenvalues(eta.eigenvalues)
    p, q = [], []
    for lab in np.unique(labels):
        sel = labels == lab
        v = eta.eigenvectors[:, sel]
        block = hermitize(v.conj().T @ rho.matrix @ v)
        p.extend(np.linalg.eigvalsh(block).tolist())
        q.extend(eta.eigenvalues[sel].tolist())
    p = np.clip(np.asarray(p), 0.0, None)
    q = np.asarray(q)
    return ClassicalPair.from_probabilities(p / p.sum(), q / q.sum())


def tensor_pinching(eta: DensityOperator, n: int, cap: int = DEFAULT_DENSE_CAP) -> PinchingSpec:
    """Pinching onto the commutant of ``eta`` tensored ``n`` times."""
    return eigen_pinching(tensor_power(eta, n, cap))


def pinched_pair_dense(pair: StatePair, n: int, cap: int = DEFAULT_DENSE_CAP) -> StatePair:
    """``(F_n(rho^n), eta^n)`` with ``F_n`` pinching onto the commutant of ``eta^n``."""
    eta_n = tensor_power(pair.eta, n, cap)
    rho_n = tensor_power(pair.rho, n, cap)
    labels = group_eigenvalues(eta_n.eigenvalues)
    v = eta_n.eigenvectors
    r = v.conj().T @ rho_n.matrix @ v
    r = np.where(labels[:, None] == labels[None, :], r, 0.0)
    pinched = DensityOperator.from_matrix(hermitize(v @ r @ v.conj().T))
    return StatePair(pinched, eta_n)


def distinct_eigenvalue_count(d: DensityOperator, rtol: float = EIGENVALUE_RTOL) -> int:
    return int(group_eigenvalues(d.eigenvalues, rtol).max()) + 1


def tensor_power_pair(pair: StatePair, n: int, cap: int = DEFAULT_DENSE_CAP) -> StatePair:
    return StatePair(tensor_power(pair.rho, n, cap), tensor_power(pair.eta, n, cap))

