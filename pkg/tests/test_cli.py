import csv
import io
import json
import math
import re

import numpy as np
import pytest

from strongconverse import checks, cli
from strongconverse.errors import MalformedPairFile, MissingInput, NotDensity
from strongconverse.operators import random_density, StatePair
from strongconverse.pairfile import (
    PairFile,
    fixture_names,
    fmt,
    load_pair,
    parse_pair,
    pair_to_dict,
    save_pair,
)
from strongconverse.pinching import ClassicalPair

SCI = re.compile(r"^-?\d\.\d{11}e[+-]\d{2}$")


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


class TestPairFile:
    def test_fixtures_present(self):
        names = fixture_names()
        for required in ("equal_qubit", "bern_half_quarter", "qubit_tilted"):
            assert required in names

    def test_round_trip_is_bit_identical(self, tmp_path):
        rng = np.random.default_rng(5)
        pf = PairFile("rand", 3, StatePair(random_density(3, rng), random_density(3, rng)))
        path = tmp_path / "pair.json"
        save_pair(pf, path)
        back = load_pair(path)
        np.testing.assert_array_equal(back.pair.rho.matrix, pf.pair.rho.matrix)
        np.testing.assert_array_equal(back.pair.eta.matrix, pf.pair.eta.matrix)
        assert back.name == "rand" and back.dim == 3

    def test_classical_round_trip(self, tmp_path):
        pf = PairFile("c", 3, ClassicalPair.from_probabilities([0.2, 0.3, 0.5], [0.1, 0.1, 0.8]))
        save_pair(pf, tmp_path / "c.json")
        back = load_pair(tmp_path / "c.json")
        assert back.is_classical
        np.testing.assert_array_equal(back.pair.log_p, pf.pair.log_p)

    def test_fixture_round_trip(self, tmp_path):
        for name in fixture_names():
            pf = load_pair(name)
            save_pair(pf, tmp_path / f"{name}.json")
            again = load_pair(tmp_path / f"{name}.json")
            assert pair_to_dict(again) == pair_to_dict(pf)

    def test_exactly_one_representation(self):
        base = pair_to_dict(load_pair("qubit_tilted"))
        both = dict(base, classical={"p": [0.5, 0.5], "q": [0.5, 0.5]})
        with pytest.raises(MalformedPairFile):
            parse_pair(both)
        with pytest.raises(MalformedPairFile):
            parse_pair({"name": "x", "dim": 2})

    def test_shape_checked(self):
        bad = pair_to_dict(load_pair("qubit_tilted"))
        bad["dim"] = 3
        with pytest.raises(MalformedPairFile):
            parse_pair(bad)

    def test_classical_sum(self):
        with pytest.raises(NotDensity):
            parse_pair({"name": "x", "dim": 2, "classical": {"p": [0.5, 0.5 + 1e-9], "q": [0.5, 0.5]}})

    def test_trace_checked(self):
        bad = pair_to_dict(load_pair("qubit_tilted"))
        bad["rho"][0][0][0] += 0.01
        with pytest.raises(NotDensity):
            parse_pair(bad)

    def test_missing(self, tmp_path):
        with pytest.raises(MissingInput, match="nowhere.json"):
            load_pair(tmp_path / "nowhere.json")


class TestFormatting:
    @pytest.mark.parametrize("x", [0.0, 1.0, -3.25e-7, math.pi * 1e12])
    def test_scientific_twelve_digits(self, x):
        assert SCI.match(fmt(x))

    def test_passthrough(self):
        assert fmt(7) == "7" and fmt("dense") == "dense" and fmt(math.nan) == "nan"


class TestCommands:
    def test_divergence_equal(self, capsys):
        code, out, _ = run(["divergence", "--pair", "equal_qubit", "--alpha", "2,1.5"], capsys)
        assert code == 0
        table = rows(out)
        assert table[0] == ["alpha", "sandwiched", "petz", "q_star"]
        assert [float(r[0]) for r in table[1:]] == [1.5, 2.0]
        assert all(abs(float(r[1])) <= 1e-12 for r in table[1:])
        assert all(SCI.match(v) for r in table[1:] for v in r)

    def test_divergence_bernoulli(self, capsys):
        code, out, _ = run(["divergence", "--pair", "bern_half_quarter", "--alpha", "2"], capsys)
        assert code == 0
        assert float(rows(out)[1][1]) == pytest.approx(math.log(4 / 3), rel=1e-11)

    def test_missing_file(self, capsys, tmp_path):
        path = str(tmp_path / "absent.json")
        code, _, err = run(["divergence", "--pair", path], capsys)
        assert code == 1 and path in err

    def test_corrupted_trace(self, capsys, tmp_path):
        data = pair_to_dict(load_pair("qubit_tilted"))
        data["rho"][0][0][0] += 0.01
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        assert run(["divergence", "--pair", str(path)], capsys)[0] == 1
        assert run(["check", "--suite", "binning"], capsys)[0] == 0

    def test_bad_tol_and_usage(self, capsys):
        assert run(["hoeffding", "--pair", "bern_half_quarter", "--r", "0.5", "--tol", "0.5"], capsys)[0] == 1
        usage = (["exponent", "--pair", "bern_half_quarter"], ["frobnicate"], ["check", "--seed", "-4"])
        for argv in usage:
            with pytest.raises(SystemExit) as exc:
                cli.main(argv)
            assert exc.value.code == 1

    def test_exponent_equal(self, capsys):
        code, out, _ = run(["exponent", "--pair", "equal_qubit", "--r", "0.4", "--n-schedule", "1,2,3"], capsys)
        table = rows(out)
        assert code == 0
        assert table[0] == ["n", "b_n", "gap_to_h_star", "engine", "duality_gap"]
        assert [float(r[1]) for r in table[1:]] == pytest.approx([0.4] * 3, abs=1e-12)

    def test_exponent_bernoulli(self, capsys):
        code, out, _ = run(["exponent", "--pair", "bern_half_quarter", "--r", "0.5",
                            "--n-schedule", "50,100,200,500,1000"], capsys)
        table = rows(out)[1:]
        assert code == 0
        assert [int(r[0]) for r in table] == [50, 100, 200, 500, 1000]
        assert float(table[-1][2]) <= 0.03
        assert {r[3] for r in table} == {"classical"}

    def test_exponent_over_cap(self, capsys):
        code, _, err = run(["exponent", "--pair", "qubit_tilted", "--r", "0.6", "--engine", "dense",
                            "--n-schedule", "13"], capsys)
        assert code == 2 and "DenseCapExceeded" in err

    def test_hoeffding(self, capsys):
        code, out, _ = run(["hoeffding", "--pair", "bern_half_quarter", "--r", "0.5,0.1"], capsys)
        table = rows(out)
        assert code == 0 and table[0] == ["r", "h_star", "arg_alpha", "truncation_bound"]
        assert float(table[1][1]) == 0.0
        assert float(table[2][1]) == pytest.approx(0.1068550143, abs=1e-6)

    def test_hoeffding_limit(self, capsys):
        _, out, _ = run(["hoeffding", "--pair", "equal_qubit", "--r", "0.7"], capsys)
        assert rows(out)[1][2] == "limit"

    def test_cutoff(self, capsys):
        code, out, _ = run(["cutoff", "--pair", "bern_half_quarter", "--kappa", "0.5"], capsys)
        assert code == 0
        assert float(rows(out)[1][1]) == pytest.approx(math.log(4 / 3), abs=1e-6)

    def test_bin(self, capsys):
        code, out, _ = run(["bin", "--pair", "ququart_mixed", "--k", "10"], capsys)
        table = rows(out)
        assert code == 0
        assert int(table[1][1]) == 3
        assert 0 < float(table[1][3]) <= math.log(1.1)

    def test_bin_three_level(self, capsys):
        code, out, _ = run(["bin", "--pair", "qutrit_mixed", "--k", "10"], capsys)
        row = rows(out)[1]
        assert code == 0 and int(row[1]) >= 1
        assert float(row[3]) <= math.log(1.1)
        assert float(row[4]) == pytest.approx(math.log(1.1), rel=1e-11)

    def test_output_file_and_determinism(self, capsys, tmp_path):
        argv = ["exponent", "--pair", "qubit_tilted", "--r", "0.6", "--n-schedule", "1,2,3"]
        run(argv + ["--out", str(tmp_path / "a.csv")], capsys)
        run(argv + ["--out", str(tmp_path / "b.csv")], capsys)
        a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
        assert a == b and a.startswith(b"n,b_n,")


class TestCheck:
    def test_binning_suite(self, capsys):
        code, out, _ = run(["check", "--suite", "binning", "--seed", "1"], capsys)
        assert code == 0 and "FAIL" not in out

    def test_all_suites(self, capsys):
        code, out, _ = run(["check", "--suite", "all", "--seed", "1"], capsys)
        assert code == 0
        assert out.strip().splitlines()[-1].split()[0].split("/")[0] == \
            out.strip().splitlines()[-1].split()[0].split("/")[1]

    def test_deterministic(self, capsys):
        first = run(["check", "--suite", "dpi", "--seed", "9"], capsys)[1]
        second = run(["check", "--suite", "dpi", "--seed", "9"], capsys)[1]
        assert first == second

    def test_failure_exit_code(self, capsys, monkeypatch):
        def failing(seed):
            return [checks.CheckResult("binning", "forced", False, "detail")]

        monkeypatch.setitem(checks._RUNNERS, "binning", failing)
        code, out, _ = run(["check", "--suite", "binning"], capsys)
        assert code == 3 and "FAIL [binning] forced" in out
