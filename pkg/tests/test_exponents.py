import math

import pytest

from oracles import binary_iid_log_success
from strongconverse.divergence import hoeffding_anti_divergence
from strongconverse.errors import DenseCapExceeded, InsufficientData, NotCommuting, ValidationError
from strongconverse.exponents import (
    b_r_estimate,
    convergence_sweep,
    finite_n_exponent,
    select_engine,
)
from strongconverse.operators import StatePair, tensor_power
from strongconverse.pairfile import load_fixture
from strongconverse.pinching import ClassicalPair, distinct_eigenvalue_count, pinched_pair_dense

H_BERN_HALF = 0.10685501427068075
BERN_SCHEDULE = (50, 100, 200, 500, 1000)


@pytest.fixture(scope="module")
def bern():
    return ClassicalPair.from_probabilities([0.5, 0.5], [0.25, 0.75])


@pytest.fixture(scope="module")
def bern_report(bern):
    return convergence_sweep(bern, 0.5, BERN_SCHEDULE)


@pytest.fixture(scope="module")
def tilted():
    return load_fixture("qubit_tilted").pair


@pytest.fixture(scope="module")
def tilted_dense(tilted):
    return convergence_sweep(tilted, 0.6, (2, 4, 6, 8), engine="dense")


class TestFiniteN:
    @pytest.mark.parametrize("engine", ["auto", "dense", "classical", "pinched"])
    def test_equal_states(self, engine):
        pair = load_fixture("equal_qubit").pair
        for n in (1, 3, 5):
            rec = finite_n_exponent(pair, n, 0.4, engine)
            assert rec.b_n == pytest.approx(0.4, abs=1e-12)

    def test_single_copy_two_outcomes(self, bern):
        # accept the ratio-2 outcome fully, then the ratio-2/3 outcome fractionally
        mu = math.exp(-0.5)
        success = 0.5 + 0.5 * (mu - 0.25) / 0.75
        rec = finite_n_exponent(bern, 1, 0.5)
        assert rec.b_n == pytest.approx(-math.log(success), abs=1e-14)
        assert rec.engine == "classical"

    def test_thousand_copies(self, bern):
        rec = finite_n_exponent(bern, 1000, 0.5, "classical")
        assert abs(rec.b_n - H_BERN_HALF) <= 0.03
        assert -rec.log_success == pytest.approx(-binary_iid_log_success(0.5, 0.25, 1000, 0.5), rel=1e-12)

    def test_commuting_state_pair_uses_classical(self, bern):
        sp = bern.to_state_pair()
        assert select_engine(sp, 20) == "classical"
        assert finite_n_exponent(sp, 20, 0.5).b_n == pytest.approx(
            finite_n_exponent(bern, 20, 0.5).b_n, abs=1e-12)

    def test_engine_selection(self, tilted):
        assert select_engine(tilted, 4) == "dense"
        with pytest.raises(DenseCapExceeded, match="DenseCapExceeded"):
            select_engine(tilted, 13)
        with pytest.raises(ValidationError):
            select_engine(tilted, 2, "fastest")

    def test_classical_engine_refuses_non_commuting(self, tilted):
        with pytest.raises(NotCommuting):
            finite_n_exponent(tilted, 2, 0.5, "classical")

    def test_dense_over_cap(self, tilted):
        with pytest.raises(DenseCapExceeded):
            finite_n_exponent(tilted, 3, 0.5, "dense", cap=4)

    def test_bad_arguments(self, bern):
        with pytest.raises(ValidationError):
            finite_n_exponent(bern, 0, 0.5)
        with pytest.raises(ValidationError):
            finite_n_exponent(bern, 3, -0.5)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_pinched_engine_bracket(self, tilted, n):
        dense = finite_n_exponent(tilted, n, 0.6, "dense").b_n
        pinched = finite_n_exponent(tilted, n, 0.6, "pinched").b_n
        K = distinct_eigenvalue_count(pinched_pair_dense(tilted, n).eta)
        assert dense - 1e-9 <= pinched <= dense + K * math.log(n + 1) / n


class TestSweep:
    def test_equal_states(self):
        rep = convergence_sweep(load_fixture("equal_qubit").pair, 0.4, range(1, 11))
        assert all(abs(r.b_n - 0.4) <= 1e-12 for r in rep.records)
        assert rep.final_gap <= 1e-12 and rep.fitted_envelope_C <= 1e-11

    def test_bernoulli_convergence(self, bern_report):
        gaps = bern_report.gaps
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert bern_report.final_gap <= 0.03
        assert bern_report.fitted_envelope_C <= 5
        assert bern_report.h_star == pytest.approx(H_BERN_HALF, abs=1e-6)

    def test_report_invariants(self, bern_report):
        last = bern_report.records[-1]
        assert bern_report.final_gap == abs(last.b_n - bern_report.h_star)
        env = max(g * n / math.log(n + 1) for n, g in zip(bern_report.ns, bern_report.gaps))
        assert bern_report.fitted_envelope_C == env

    def test_converse_side(self, bern_report, tilted_dense):
        for rep in (bern_report, tilted_dense):
            for rec in rep.records:
                assert rec.b_n >= rep.h_star - 1e-6

    def test_no_oscillation_beyond_envelope(self, bern_report, tilted_dense):
        for rep in (bern_report, tilted_dense):
            recs, C = rep.records, rep.fitted_envelope_C
            for i, rn in enumerate(recs):
                later = max((rm.b_n - rn.b_n for rm in recs[i + 1:]), default=-math.inf)
                assert later <= C * math.log(rn.n + 1) / rn.n

    def test_qubit_dense_trend(self, tilted_dense):
        gaps = tilted_dense.gaps
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert [r.engine for r in tilted_dense.records] == ["dense"] * 4

    def test_schedule_must_ascend(self, bern):
        with pytest.raises(ValidationError):
            convergence_sweep(bern, 0.5, (10, 5, 20))
        with pytest.raises(ValidationError):
            convergence_sweep(bern, 0.5, ())

    def test_scaling_identity(self, tilted):
        h1 = hoeffding_anti_divergence(tilted, 0.6).value
        for n in (2, 3):
            nfold = StatePair(tensor_power(tilted.rho, n), tensor_power(tilted.eta, n))
            assert hoeffding_anti_divergence(nfold, 0.6 * n).value == pytest.approx(n * h1, abs=1e-8)


class TestEstimate:
    def test_equal_states(self):
        rep = convergence_sweep(load_fixture("equal_qubit").pair, 0.4, (1, 2, 3))
        est, unc = b_r_estimate(rep)
        assert est == pytest.approx(0.4, abs=1e-12) and unc <= 1e-11

    def test_interval_contains_h_star(self, bern_report):
        est, unc = b_r_estimate(bern_report)
        assert abs(est - bern_report.h_star) <= unc
        # the oracle value is only known to the 1e-6 grid reproducibility
        assert abs(est - H_BERN_HALF) <= unc + 1e-6
        assert est == bern_report.records[-1].b_n

    def test_widening_shrinks_uncertainty(self, bern):
        uncs = [b_r_estimate(convergence_sweep(bern, 0.5, BERN_SCHEDULE[:m]))[1]
                for m in (3, 4, 5)]
        assert uncs[0] > uncs[1] > uncs[2]

    def test_needs_three_records(self, bern):
        with pytest.raises(InsufficientData):
            b_r_estimate(convergence_sweep(bern, 0.5, (10, 20)))
