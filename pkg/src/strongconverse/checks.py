"""Seeded property suites behind ``strongconverse check``.

Each suite returns a list of :class:`CheckResult`; a run passes when every
assertion in it does.  All randomness flows from the ``seed`` argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from strongconverse.binning import bin_density, binning_divergence_gap
from strongconverse.divergence import (
    cutoff_rate,
    hoeffding_anti_divergence,
    log_q_star,
    profile,
    sandwiched_renyi,
)
from strongconverse.exponents import convergence_sweep, finite_n_exponent
from strongconverse.neyman_pearson import (
    np_classical,
    np_dense,
    order_perturb_check,
    reverse_dpi_check,
)
from strongconverse.operators import (
    StatePair,
    order_constant,
    random_density,
    random_unitary,
    tensor_power,
)
from strongconverse.pairfile import load_fixture
from strongconverse.pinching import (
    ClassicalPair,
    PinchingSpec,
    cp_index_check,
    distinct_eigenvalue_count,
    pinch_density,
    pinched_pair_dense,
    type_counts,
)

SUITES = ("dpi", "binning", "pinching", "np_duality", "exponents", "cutoff")
QUANTUM_FIXTURES = ("qubit_tilted", "qutrit_mixed", "ququart_mixed")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def random_pinching(dim: int, K: int, rng: np.random.Generator) -> PinchingSpec:
    """Random basis split into ``K`` nonempty groups."""
    u = random_unitary(dim, rng)
    labels = np.concatenate([np.arange(K), rng.integers(0, K, dim - K)])
    return PinchingSpec.from_basis(u, rng.permutation(labels))


def _random_pair(dim: int, rng: np.random.Generator) -> StatePair:
    return StatePair(random_density(dim, rng), random_density(dim, rng))


def suite_dpi(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    alphas = np.geomspace(1.05, 20.0, 10)
    out = []
    worst = -math.inf
    for _ in range(20):
        dim = int(rng.integers(2, 5))
        pair = _random_pair(dim, rng)
        spec = random_pinching(dim, int(rng.integers(1, dim + 1)), rng)
        pinched = StatePair(pinch_density(pair.rho, spec), pinch_density(pair.eta, spec))
        before = profile(pair).divergence(alphas)
        after = profile(pinched).divergence(alphas)
        worst = max(worst, float(np.max(after - before)))
    out.append(CheckResult("dpi", "sandwiched data processing under pinching", worst <= 1e-9,
                           f"max increase {worst:.3e}"))
    for name in QUANTUM_FIXTURES[:2]:
        pair = load_fixture(name).pair
        spec = random_pinching(pair.dim, 2, rng)
        for n in (1, 2):
            res = reverse_dpi_check(pair, spec, n, -0.5 * n)
            out.append(CheckResult("dpi", f"processing lowers optimal success ({name}, n={n})",
                                   res.holds, f"{res.success_processed:.6g} <= {res.success_original:.6g}"))
        eta_tilde = random_density(pair.dim, rng)
        s = order_constant(pair.eta, eta_tilde) + 1e-9
        res = order_perturb_check(pair.rho, pair.eta, eta_tilde, s, 2, -1.0)
        out.append(CheckResult("dpi", f"order perturbation bounds ({name})",
                               res.budget_holds and res.scaled_holds,
                               f"budget={res.budget_holds} scaled={res.scaled_holds}"))
    return out


def suite_binning(seed: int) -> list[CheckResult]:
    out = []
    for name in ("qubit_tilted", "qutrit_mixed", "ququart_mixed"):
        pair = load_fixture(name).pair
        for k in (10, 100):
            b = bin_density(pair.eta, k)
            out.append(CheckResult("binning", f"operator sandwich ({name}, k={k})", b.sandwich_holds(1e-9)))
            out.append(CheckResult("binning", f"bin count bound ({name}, k={k})",
                                   b.bin_count <= b.spectrum_bound, f"{b.bin_count} bins"))
            gaps = binning_divergence_gap(pair, k, (1.5, 2.0, 4.0))
            worst = max(g for _, g in gaps)
            out.append(CheckResult("binning", f"divergence gap ({name}, k={k})",
                                   worst <= math.log1p(1.0 / k) + 1e-9, f"max gap {worst:.3e}"))
            again = bin_density(b.binned, k, delta=b.delta)
            same = np.allclose(again.binned.eigenvalues, b.binned.eigenvalues, rtol=0, atol=1e-15)
            out.append(CheckResult("binning", f"idempotent on a fixed ladder ({name}, k={k})", bool(same)))
    return out


def suite_pinching(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for K in (2, 3, 4):
        spec = random_pinching(4, K, rng)
        v = cp_index_check(spec, 100, int(rng.integers(2 ** 31)))
        out.append(CheckResult("pinching", f"index bound K={K}", v <= 1e-9, f"max violation {v:.3e}"))
    pair = load_fixture("qubit_tilted").pair
    for n in range(1, 5):
        pp = pinched_pair_dense(pair, n)
        rho_n = tensor_power(pair.rho, n)
        K = distinct_eigenvalue_count(pp.eta)
        for a in (1.5, 2.0, 3.0):
            d = log_q_star(StatePair(rho_n, pp.eta), a) - log_q_star(pp, a)
            ok = -1e-10 <= d <= K * math.log(n + 1) + 1e-8
            out.append(CheckResult("pinching", f"pinched sandwich (n={n}, alpha={a})", ok, f"{d:.3e}"))
    for K, n in ((2, 5), (3, 4), (4, 3)):
        c = type_counts(K, n).shape[0]
        out.append(CheckResult("pinching", f"type count K={K} n={n}", c <= (n + 1) ** K, str(c)))
    return out


def suite_np_duality(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    worst = 0.0
    for _ in range(20):
        dim = int(rng.integers(2, 7))
        a, b = random_density(dim, rng), random_density(dim, rng)
        res = np_dense(a, b, float(-rng.uniform(0.0, 3.0)))
        worst = max(worst, res.duality_gap)
    out.append(CheckResult("np_duality", "dense duality gap", worst <= 1e-9, f"max gap {worst:.3e}"))
    for _ in range(4):
        dim = int(rng.integers(2, 4))
        p, q = rng.dirichlet(np.ones(dim)), rng.dirichlet(np.ones(dim))
        cp = ClassicalPair.from_probabilities(p, q)
        sp = cp.to_state_pair()
        for n in (1, 2, 3):
            lm = -0.3 * n
            dense = np_dense(tensor_power(sp.rho, n), tensor_power(sp.eta, n), lm).success
            clas = np_classical(cp, n, lm)
            agree = abs(dense - clas.success) <= 1e-9
            feasible = clas.test.log_type2() <= lm + 1e-12
            out.append(CheckResult("np_duality", f"engines agree (dim={dim}, n={n})", agree,
                                   f"|diff|={abs(dense - clas.success):.3e}"))
            out.append(CheckResult("np_duality", f"budget feasible (dim={dim}, n={n})", feasible))
    return out


def suite_exponents(seed: int) -> list[CheckResult]:
    out = []
    eq = load_fixture("equal_qubit").pair
    rec = [finite_n_exponent(eq, n, 0.4) for n in (1, 3, 6)]
    out.append(CheckResult("exponents", "equal states give b_n = r",
                           all(abs(x.b_n - 0.4) <= 1e-12 for x in rec)))
    bern = load_fixture("bern_half_quarter").pair
    rep = convergence_sweep(bern, 0.5, (50, 100, 200, 500, 1000))
    gaps = rep.gaps
    out.append(CheckResult("exponents", "gaps decrease along the schedule",
                           all(b < a for a, b in zip(gaps, gaps[1:])), str([f"{g:.4f}" for g in gaps])))
    out.append(CheckResult("exponents", "final gap", rep.final_gap <= 0.03, f"{rep.final_gap:.4f}"))
    out.append(CheckResult("exponents", "envelope constant", rep.fitted_envelope_C <= 5,
                           f"C={rep.fitted_envelope_C:.4f}"))
    out.append(CheckResult("exponents", "converse side",
                           all(r.b_n >= rep.h_star - 1e-6 for r in rep.records)))
    pair = load_fixture("qubit_tilted").pair
    h = hoeffding_anti_divergence(pair, 0.6).value
    for n in (2, 4):
        dense = finite_n_exponent(pair, n, 0.6, "dense").b_n
        pinched = finite_n_exponent(pair, n, 0.6, "pinched").b_n
        K = distinct_eigenvalue_count(pinched_pair_dense(pair, n).eta)
        out.append(CheckResult("exponents", f"quantum converse side (n={n})", dense >= h - 1e-6,
                               f"b_n={dense:.6f} H*={h:.6f}"))
        out.append(CheckResult("exponents", f"pinched engine bracket (n={n})",
                               dense - 1e-9 <= pinched <= dense + K * math.log(n + 1) / n))
    return out


def suite_cutoff(seed: int) -> list[CheckResult]:
    out = []
    bern = load_fixture("bern_half_quarter").state_pair()
    v = cutoff_rate(bern, 0.5)
    out.append(CheckResult("cutoff", "Bernoulli kappa=1/2", abs(v - math.log(4 / 3)) <= 1e-6, f"{v:.10f}"))
    pair = load_fixture("qubit_tilted").pair
    for kappa in (1 / 3, 2 / 3):
        v = cutoff_rate(pair, kappa)
        ref = sandwiched_renyi(pair, 1.0 / (1.0 - kappa))
        out.append(CheckResult("cutoff", f"qubit kappa={kappa:.4f}", abs(v - ref) <= 1e-4,
                               f"|diff|={abs(v - ref):.3e}"))
    eq = load_fixture("equal_qubit").pair
    out.append(CheckResult("cutoff", "equal states", abs(cutoff_rate(eq, 0.5)) <= 1e-12))
    return out


_RUNNERS = {
    "dpi": suite_dpi,
    "binning": suite_binning,
    "pinching": suite_pinching,
    "np_duality": suite_np_duality,
    "exponents": suite_exponents,
    "cutoff": suite_cutoff,
}


def run_suites(suite: str, seed: int) -> list[CheckResult]:
    names = SUITES if suite == "all" else (suite,)
    results = []
    for name in names:
        results.extend(_RUNNERS[name](seed))
    return results
