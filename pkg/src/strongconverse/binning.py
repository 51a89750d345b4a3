"""Finite-spectrum approximation of a density by geometric spectral binning.

The spectrum of ``d`` is cut into intervals ``[delta * a^j, delta * a^(j+1))``
with ``a = 1 + 1/k``.  Each nonempty interval contributes one spectral
projector, and the approximant replaces the eigenvalues in a bin by their
multiplicity-weighted mean.  That is the trace-preserving conditional
expectation onto the algebra generated by the bin projectors, and it obeys

    a^-1 d <= F_k(d) <= a d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from strongconverse.divergence import check_alpha, profile
from strongconverse.errors import SingularDensity, ValidationError
from strongconverse.operators import (
    FULL_RANK_TOL,
    DensityOperator,
    HermitianOperator,
    StatePair,
    hermitize,
    loewner_leq,
)


@dataclass(frozen=True, eq=False)
class Bin:
    index: int
    lower_edge: float
    projector: HermitianOperator
    value: float
    multiplicity: int


@dataclass(frozen=True, eq=False)
class BinnedDensity:
    original: DensityOperator
    k: int
    a: float
    delta: float
    bins: tuple
    binned: DensityOperator

    @property
    def bin_count(self) -> int:
        return len(self.bins)

    @property
    def spectrum_bound(self) -> float:
        """The ``2k / delta^2`` cap on the number of distinct bin values."""
        return 2.0 * self.k / self.delta ** 2

    def sandwich_holds(self, tol: float = 1e-9) -> bool:
        d, f = self.original.matrix, self.binned.matrix
        return loewner_leq(f / self.a, d, tol) and loewner_leq(d, self.a * f, tol)


def _bin_index(lam: float, delta: float, a: float) -> int:
    j = int(math.floor(math.log(lam / delta) / math.log(a)))
    # float guard so that delta*a^j <= lam < delta*a^(j+1) holds as computed
    while j > 0 and delta * a ** j > lam:
        j -= 1
    while delta * a ** (j + 1) <= lam:
        j += 1
    return max(j, 0)


def bin_density(d: DensityOperator, k: int, delta: float | None = None) -> BinnedDensity:
    """Geometric spectral binning of a full-rank density.

    Parameters
    ----------
    d : DensityOperator
    k : int
        Ladder ratio is ``1 + 1/k``.
    delta : float, optional
        Bottom of the ladder.  Defaults to the smallest eigenvalue of ``d``;
        pass the ``delta`` of an earlier result to re-bin on the same ladder.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    lam_min = d.min_eigenvalue
    if lam_min < FULL_RANK_TOL:
        raise SingularDensity(f"density has eigenvalue {lam_min:.3e} below {FULL_RANK_TOL}")
    if delta is None:
        delta = lam_min
    elif not (0.0 < delta <= lam_min):
        raise ValidationError(f"delta must lie in (0, {lam_min}], got {delta}")
    a = 1.0 + 1.0 / k

    w, v = d.eigenvalues, d.eigenvectors
    idx = np.array([_bin_index(x, delta, a) for x in w])
    new_w = np.empty_like(w)
    bins = []
    for j in sorted(set(idx.tolist())):
        members = idx == j
        value = float(np.mean(w[members]))
        new_w[members] = value
        vj = v[:, members]
        bins.append(Bin(j, delta * a ** j, HermitianOperator(hermitize(vj @ vj.conj().T)),
                        value, int(members.sum())))
    binned_op = HermitianOperator(hermitize((v * new_w) @ v.conj().T))
    binned = DensityOperator(binned_op, new_w, v)
    return BinnedDensity(d, int(k), a, float(delta), tuple(bins), binned)


def binning_divergence_gap(pair: StatePair, k: int, alphas) -> list[tuple[float, float]]:
    """``|D*_a(rho||eta) - D*_a(rho||F_k(eta))|`` for each order ``a``.

    Every gap is at most ``ln(1 + 1/k)``.
    """
    binned = bin_density(pair.eta, k).binned
    approx = StatePair(pair.rho, binned)
    a = np.asarray([check_alpha(x) for x in alphas])
    exact = profile(pair).divergence(a)
    coarse = profile(approx).divergence(a)
    return [(float(x), float(abs(e - c))) for x, e, c in zip(a, exact, coarse)]
