"""Independent reference computations used by the tests.

These deliberately avoid the package's own code paths: high-precision
mpmath arithmetic for divergences and binomial type sums, a linear program
over explicit outcome sequences for classical tests, and direct scalar
minimisation of the Lagrange dual for quantum tests.
"""

import itertools
import math

import mpmath as mp
import numpy as np
from scipy.linalg import eigh as generalized_eigh
from scipy.optimize import linprog, minimize_scalar

mp.mp.dps = 40


def mp_log_q_classical(p, q, alpha):
    """``(1/alpha) ln sum_i p_i^alpha q_i^(1-alpha)`` at 40 digits."""
    a = mp.mpf(alpha)
    s = mp.fsum(mp.mpf(pi) ** a * mp.mpf(qi) ** (1 - a) for pi, qi in zip(p, q) if pi > 0)
    return mp.log(s) / a


def _mp_matrix(m):
    m = np.asarray(m, dtype=np.complex128)
    return mp.matrix([[mp.mpc(complex(z)) for z in row] for row in m])


def mp_log_q_quantum(rho, eta, alpha):
    """Sandwiched ``ln Q*_alpha`` with mpmath Hermitian eigensolvers."""
    a = mp.mpf(alpha)
    s = (1 - a) / (2 * a)
    ev, u = mp.eighe(_mp_matrix(eta))
    d = eta.shape[0] if hasattr(eta, "shape") else len(eta)
    es = mp.diag([ev[i] ** s for i in range(d)])
    eta_s = u * es * u.transpose_conj()
    x = eta_s * _mp_matrix(rho) * eta_s
    x = (x + x.transpose_conj()) / 2
    w = mp.eighe(x, eigvals_only=True)
    total = mp.fsum(max(w[i], mp.mpf(0)) ** a for i in range(d))
    return mp.log(total) / a


def mp_sandwiched(rho, eta, alpha):
    return float(alpha / (alpha - 1) * mp_log_q_quantum(rho, eta, alpha))


def hoeffding_grid(log_q, r, alpha_max=1e6, points=20000, start=1e-6, d_max=None):
    """Brute-force ``max ((a-1)/a) r - ln Q*_a`` on a dense log grid of ``a - 1``.

    With ``d_max`` given, the ``a -> inf`` limit ``r - d_max`` is a candidate too.
    """
    t = np.linspace(math.log(start), math.log(alpha_max - 1), points)
    best = 0.0
    for tt in t:
        a = 1.0 + math.exp(tt)
        best = max(best, (a - 1) / a * r - float(log_q(a)))
    if d_max is not None:
        best = max(best, r - d_max)
    return best


def binary_iid_log_success(p1, q1, n, r):
    """Optimal ``ln`` success for ``n`` copies of Bernoulli(p1) vs Bernoulli(q1),
    budget ``exp(-n r)``, by exact greedy filling over binomial classes."""
    p1, q1 = mp.mpf(p1), mp.mpf(q1)
    mu = mp.exp(-n * mp.mpf(r))
    classes = []
    for j in range(n + 1):
        c = mp.binomial(n, j)
        P = c * p1 ** j * (1 - p1) ** (n - j)
        Q = c * q1 ** j * (1 - q1) ** (n - j)
        classes.append((P / Q, j, P, Q))
    classes.sort(key=lambda t: (-t[0], t[1]))
    used, success = mp.mpf(0), mp.mpf(0)
    for _, _, P, Q in classes:
        if used + Q <= mu:
            used += Q
            success += P
        else:
            success += P * (mu - used) / Q
            break
    return float(mp.log(success))


def lp_success(p, q, n, mu):
    """Neyman-Pearson optimum as a linear program over all ``len(p)^n`` sequences."""
    seqs = list(itertools.product(range(len(p)), repeat=n))
    P = np.array([np.prod([p[i] for i in s]) for s in seqs])
    Q = np.array([np.prod([q[i] for i in s]) for s in seqs])
    res = linprog(-P, A_ub=Q[None, :], b_ub=[mu], bounds=[(0, 1)] * len(seqs),
                  method="highs")
    return -res.fun


def dual_success(a, b, mu):
    """``min_{lam >= 0} tr(a - lam b)_+ + lam mu``.

    The minimum sits either at a kink of the dual (a generalized eigenvalue
    of ``(a, b)``) or at a smooth stationary point found by scalar search.
    """

    def g(lam):
        w = np.linalg.eigvalsh(a - lam * b)
        return float(np.sum(w[w > 0])) + lam * mu

    hi = 1.0
    while g(hi) < g(hi / 2) or np.linalg.eigvalsh(a - hi * b)[-1] > 0:
        hi *= 2
    res = minimize_scalar(g, bounds=(0.0, hi), method="bounded",
                          options={"xatol": 1e-13, "maxiter": 2000})
    kinks = generalized_eigh(a, b, eigvals_only=True)
    candidates = [res.fun, g(0.0)] + [g(k) for k in kinks if k > 0]
    return min(candidates)
