"""Dense Hermitian linear algebra and validated state/test containers.

Everything here is immutable after construction: arrays are stored as
read-only copies, and the eigendecomposition cached on a
:class:`DensityOperator` is computed (or verified) once in the constructor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from strongconverse.errors import (
    ConvergenceFailure,
    DenseCapExceeded,
    DimMismatch,
    EtaSingular,
    InvalidTest,
    NonHermitian,
    NotDensity,
    SingularPower,
    ValidationError,
)

HERMITIAN_TOL = 1e-10
CLIP_TOL = 1e-12
TRACE_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
FULL_RANK_TOL = 1e-12
TEST_SPECTRUM_TOL = 1e-10
DEFAULT_DENSE_CAP = 4096


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


def _frozen_real(a) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


def hermitize(a: np.ndarray) -> np.ndarray:
    """Symmetrize a matrix we computed ourselves (never used on user input)."""
    a = np.asarray(a)
    return 0.5 * (a + a.conj().T)


def as_matrix(x) -> np.ndarray:
    """Return the dense complex matrix behind any operator-like value."""
    if isinstance(x, DensityOperator):
        return x.op.entries
    if isinstance(x, HermitianOperator):
        return x.entries
    if isinstance(x, TestOperator):
        return x.op.entries
    return np.asarray(x, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A ``dim x dim`` complex Hermitian matrix.

    Inputs that are not Hermitian within ``HERMITIAN_TOL`` (absolute, entrywise)
    are rejected rather than symmetrized.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = _frozen(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise NonHermitian(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonHermitian("matrix has non-finite entries")
        asym = np.max(np.abs(a - a.conj().T))
        if asym > HERMITIAN_TOL:
            raise NonHermitian(f"matrix is not Hermitian (max |a - a^H| = {asym:.3e})")
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def eigh(op, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition with eigenvalues sorted in descending order.

    Backed by LAPACK ``zheevd`` through :func:`numpy.linalg.eigh`; the
    divide-and-conquer iteration is bounded internally by LAPACK and a
    non-converged run surfaces as :class:`ConvergenceFailure`.

    Parameters
    ----------
    op : HermitianOperator or array_like
        Raw arrays are validated as Hermitian first.
    check : bool
        Verify ``V diag(w) V^H`` reproduces ``op`` to ``1e-9`` (relative to
        ``max(1, ||op||)``).

    Returns
    -------
    (ndarray, ndarray)
        Real eigenvalues (descending) and a unitary whose columns are the
        matching eigenvectors.
    """
    if not isinstance(op, HermitianOperator):
        op = HermitianOperator(as_matrix(op))
    a = op.entries
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigendecomposition did not converge: {exc}") from exc
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    if check:
        err = np.max(np.abs((v * w) @ v.conj().T - a))
        scale = max(1.0, float(np.max(np.abs(w))))
        if err > RECONSTRUCTION_TOL * scale:
            raise ConvergenceFailure(f"eigen-reconstruction error {err:.3e} exceeds tolerance")
    return w, v


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A validated density matrix with its cached eigensystem.

    Build one with :meth:`from_matrix`; passing ``eigenvalues`` and
    ``eigenvectors`` directly is allowed (e.g. for Kronecker products) but
    they are re-verified against ``op``.
    """

    op: HermitianOperator
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        op = self.op if isinstance(self.op, HermitianOperator) else HermitianOperator(self.op)
        w = np.asarray(self.eigenvalues, dtype=np.float64)
        v = np.asarray(self.eigenvectors, dtype=np.complex128)
        if w.shape != (op.dim,) or v.shape != (op.dim, op.dim):
            raise NotDensity("eigensystem shape does not match operator dimension")
        order = np.argsort(-w, kind="stable")
        w, v = w[order], v[:, order]
        if w[-1] < -CLIP_TOL:
            raise NotDensity(f"negative eigenvalue {w[-1]:.3e}")
        trace = float(np.real(np.trace(op.entries)))
        if abs(trace - 1.0) > TRACE_TOL:
            raise NotDensity(f"trace {trace!r} differs from 1")
        err = np.max(np.abs((v * w) @ v.conj().T - op.entries))
        if err > RECONSTRUCTION_TOL:
            raise NotDensity(f"eigen-reconstruction error {err:.3e} exceeds {RECONSTRUCTION_TOL}")
        w = np.clip(w, 0.0, None)
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "eigenvalues", _frozen_real(w))
        object.__setattr__(self, "eigenvectors", _frozen(v))

    @classmethod
    def _trusted(cls, op: HermitianOperator, eigenvalues, eigenvectors) -> "DensityOperator":
        """Wrap an eigensystem that is exact by construction, skipping the checks."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "op", op)
        object.__setattr__(obj, "eigenvalues", _frozen_real(np.clip(eigenvalues, 0.0, None)))
        object.__setattr__(obj, "eigenvectors", _frozen(eigenvectors))
        return obj

    @classmethod
    def from_matrix(cls, matrix) -> "DensityOperator":
        op = matrix if isinstance(matrix, HermitianOperator) else HermitianOperator(matrix)
        w, v = eigh(op, check=False)
        return cls(op, w, v)

    @classmethod
    def diagonal(cls, probabilities) -> "DensityOperator":
        p = np.asarray(probabilities, dtype=np.float64)
        return cls.from_matrix(np.diag(p).astype(np.complex128))

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def matrix(self) -> np.ndarray:
        return self.op.entries

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])

    def is_full_rank(self, tol: float = FULL_RANK_TOL) -> bool:
        return self.min_eigenvalue >= tol


def density(matrix) -> DensityOperator:
    """Shorthand for :meth:`DensityOperator.from_matrix`."""
    return DensityOperator.from_matrix(matrix)


@dataclass(frozen=True, eq=False)
class TestOperator:
    """A test ``0 <= T <= 1`` stored as ``exp(log_scale) * op``.

    Keeping the multiplier in log form lets a test be shrunk by factors like
    ``exp(-n * eps)`` without underflow.
    """

    __test__ = False  # not a pytest class

    op: HermitianOperator
    log_scale: float = 0.0

    def __post_init__(self):
        op = self.op if isinstance(self.op, HermitianOperator) else HermitianOperator(self.op)
        w = np.linalg.eigvalsh(op.entries)
        if w[0] < -TEST_SPECTRUM_TOL or w[-1] > 1.0 + TEST_SPECTRUM_TOL:
            raise InvalidTest(f"test spectrum [{w[0]:.3e}, {w[-1]:.3e}] leaves [0, 1]")
        if not self.log_scale <= 0.0:
            raise InvalidTest(f"log_scale must be <= 0, got {self.log_scale}")
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "log_scale", float(self.log_scale))

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def scale(self) -> float:
        return float(np.exp(self.log_scale))

    def log_expectation(self, state) -> float:
        """``ln tr(state * T)``; ``-inf`` when the expectation vanishes."""
        a = as_matrix(state)
        if a.shape != self.op.entries.shape:
            raise DimMismatch(f"state shape {a.shape} vs test shape {self.op.entries.shape}")
        val = float(np.real(np.sum(a * self.op.entries.T)))
        if val <= 0.0:
            return -np.inf
        return float(np.log(val)) + self.log_scale

    def expectation(self, state) -> float:
        return float(np.exp(self.log_expectation(state)))


def _hermitian_entries(x) -> np.ndarray:
    if isinstance(x, (HermitianOperator, DensityOperator, TestOperator)):
        return as_matrix(x)
    return HermitianOperator(as_matrix(x)).entries


def loewner_leq(a, b, tol: float = 1e-10) -> bool:
    """True iff ``b - a`` is positive semidefinite up to ``tol``."""
    ma, mb = _hermitian_entries(a), _hermitian_entries(b)
    if ma.shape != mb.shape:
        raise DimMismatch(f"shapes {ma.shape} and {mb.shape} differ")
    return bool(np.linalg.eigvalsh(hermitize(mb - ma))[0] >= -tol)


def _inverse_sqrt_factor(eta: DensityOperator) -> tuple[np.ndarray, np.ndarray]:
    if eta.min_eigenvalue < FULL_RANK_TOL:
        raise EtaSingular(f"eta has eigenvalue {eta.min_eigenvalue:.3e} below {FULL_RANK_TOL}")
    return eta.eigenvalues, eta.eigenvectors


def order_constant(rho: DensityOperator, eta: DensityOperator) -> float:
    """``ln min{lam : rho <= lam * eta}``, the max-relative entropy in nats."""
    if rho.dim != eta.dim:
        raise DimMismatch(f"rho has dim {rho.dim}, eta has dim {eta.dim}")
    e, u = _inverse_sqrt_factor(eta)
    s = e ** -0.5
    m = s[:, None] * (u.conj().T @ rho.matrix @ u) * s[None, :]
    top = np.linalg.eigvalsh(hermitize(m))[-1]
    return float(np.log(top))


@dataclass(frozen=True, eq=False)
class StatePair:
    """A pair ``(rho, eta)`` with ``eta`` full rank and finite order constant."""

    rho: DensityOperator
    eta: DensityOperator
    order_log: float = field(init=False)

    def __post_init__(self):
        if self.rho.dim != self.eta.dim:
            raise DimMismatch(f"rho has dim {self.rho.dim}, eta has dim {self.eta.dim}")
        order_log = order_constant(self.rho, self.eta)
        if not np.isfinite(order_log):
            raise EtaSingular("order constant is not finite")
        object.__setattr__(self, "order_log", order_log)

    @property
    def dim(self) -> int:
        return self.rho.dim

    def is_commuting(self, tol: float = 1e-9) -> bool:
        return commutator_norm(self.rho, self.eta) <= tol


def commutator_norm(a, b) -> float:
    """Spectral norm of ``ab - ba``."""
    ma, mb = as_matrix(a), as_matrix(b)
    c = ma @ mb - mb @ ma
    return float(np.linalg.norm(c, 2)) if c.size else 0.0


def mat_power(d, s: float) -> HermitianOperator:
    """``V diag(lam**s) V^H`` for a density (or PSD Hermitian operator).

    Zero eigenvalues map to zero for ``s > 0``; negative powers need full rank.
    """
    if isinstance(d, DensityOperator):
        w, v = d.eigenvalues, d.eigenvectors
    else:
        w, v = eigh(d)
        if w[-1] < -CLIP_TOL * max(1.0, abs(w[0])):
            raise NotDensity(f"operator is not positive semidefinite (min eigenvalue {w[-1]:.3e})")
        w = np.clip(w, 0.0, None)
    if s < 0 and w[-1] < FULL_RANK_TOL:
        raise SingularPower(f"negative power {s} of operator with eigenvalue {w[-1]:.3e}")
    if s == 0:
        ws = np.ones_like(w)
    else:
        with np.errstate(divide="ignore"):
            ws = np.where(w > 0, np.power(np.where(w > 0, w, 1.0), s), 0.0)
    return HermitianOperator(hermitize((v * ws) @ v.conj().T))


def tensor_power(d: DensityOperator, n: int, cap: int = DEFAULT_DENSE_CAP) -> DensityOperator:
    """``d`` tensored with itself ``n`` times, eigensystem built from Kronecker factors."""
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    if d.dim ** n > cap:
        raise DenseCapExceeded(f"DenseCapExceeded: dimension {d.dim}^{n} = {d.dim ** n} exceeds cap {cap}")
    if n == 1:
        return d
    mat = reduce(np.kron, [d.matrix] * n)
    w = reduce(np.kron, [d.eigenvalues] * n)
    v = reduce(np.kron, [d.eigenvectors] * n)
    order = np.argsort(-w, kind="stable")
    # Kronecker products of a verified eigensystem need no re-verification
    return DensityOperator._trusted(HermitianOperator(hermitize(mat)), w[order], v[:, order])


def random_hermitian(dim: int, rng: np.random.Generator) -> HermitianOperator:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianOperator(hermitize(g))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Ginibre-ensemble density matrix; ``rank`` defaults to full."""
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    m = g @ g.conj().T
    return DensityOperator.from_matrix(hermitize(m / np.real(np.trace(m))))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]
