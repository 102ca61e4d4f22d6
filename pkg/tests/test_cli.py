import json
import math

import pytest

from dpquant.cli import (EXIT_BOUND, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE,
                         UsageError, _parse_grid, _parse_lattice,
                         _parse_source, main)
from dpquant.prob import Family


def _rows(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    return header, [dict(zip(header, l.split(","))) for l in lines[1:]]


class TestParsing:
    def test_source_gaussian(self):
        m = _parse_source("gaussian:var=4,mean=1")
        assert m.family is Family.GAUSSIAN and m.params == (1.0, 4.0)

    def test_source_pmf(self):
        assert _parse_source("pmf:0.5,0.5") == [0.5, 0.5]

    def test_source_bad(self):
        with pytest.raises(UsageError):
            _parse_source("cauchy:scale=1")
        with pytest.raises(UsageError):
            _parse_source("gaussian:var")

    def test_lattice(self):
        lat = _parse_lattice("cube:step=0.1,dim=3")
        assert lat.dim == 3 and lat.step == pytest.approx(0.1)
        assert _parse_lattice("hex:scale=0.5").kind == "hexagonal"
        with pytest.raises(UsageError):
            _parse_lattice("cube:size=1")

    def test_grid(self):
        g = _parse_grid("0:1:5")
        assert len(g) == 5 and g[0] == 0 and g[-1] == 1
        assert list(_parse_grid("0.5,2")) == [0.5, 2.0]
        with pytest.raises(UsageError):
            _parse_grid("a:b:c")


class TestBounds:
    def test_gaussian_curves(self, tmp_path):
        out = tmp_path / "b.csv"
        assert main(["bounds", "--source", "gaussian:var=1",
                     "--dgrid", "0.01:2:200", "--out", str(out)]) == EXIT_OK
        header, rows = _rows(out)
        assert header == ["D", "rate_nats", "rate_bits", "source"]
        dp = [r for r in rows if r["source"] == "dp_rdf"]
        assert len(dp) == 200
        assert float(dp[-1]["D"]) == 2.0 and float(dp[-1]["rate_nats"]) == 0.0
        # config echoed for reproducibility
        assert any(l.startswith("# source=") for l in out.read_text().splitlines())

    def test_units_bits(self, tmp_path):
        a, b = tmp_path / "n.csv", tmp_path / "b.csv"
        main(["bounds", "--dgrid", "0.5,1", "--out", str(a)])
        main(["bounds", "--dgrid", "0.5,1", "--units", "bits", "--out", str(b)])
        _, ra = _rows(a)
        _, rb = _rows(b)
        for x, y in zip(ra, rb):
            assert float(y["rate_bits"]) == pytest.approx(
                float(x["rate_nats"]) / math.log(2), rel=1e-8)

    def test_discrete_pmf_curve(self, tmp_path):
        out = tmp_path / "pmf.csv"
        assert main(["bounds", "--source", "pmf:0.5,0.5",
                     "--cost", "hamming", "--out", str(out)]) == EXIT_OK
        _, rows = _rows(out)
        near = min(rows, key=lambda r: abs(float(r["D"]) - 0.11))
        # equiprobable binary with Hamming cost: rate = ln2 - Hb(D)
        hb = -(0.11 * math.log(0.11) + 0.89 * math.log(0.89))
        assert abs(float(near["D"]) - 0.11) < 0.02
        assert float(near["rate_nats"]) == pytest.approx(math.log(2) - hb,
                                                         abs=0.02)


class TestEval:
    def test_simple_mse(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["eval", "--scheme", "simple", "--source", "gaussian:var=1",
                     "-n", "100000", "--seed", "7", "--out", str(out)]) == EXIT_OK
        rep = json.loads(out.read_text())
        assert rep["mse_per_dim"] == pytest.approx(2.0, abs=0.05)
        assert rep["config"]["seed"] == "7"

    def test_transform_ks_and_bound(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["eval", "--scheme", "transform", "--lattice",
                     "cube:step=0.1", "-n", "20000", "--seed", "0",
                     "--check-bound", "--out", str(out)]) == EXIT_OK
        rep = json.loads(out.read_text())
        assert all(p for _, p in rep["ks_per_axis"])

    def test_awgn_bands(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["eval", "--scheme", "awgn:eta2=1", "-n", "1000000",
                     "--seed", "0", "--out", str(out)]) == EXIT_OK
        rep = json.loads(out.read_text())
        assert rep["rate_nats_per_dim"] == pytest.approx(0.3466, abs=1e-4)
        assert rep["mse_per_dim"] == pytest.approx(0.5858, abs=0.005)

    def test_check_bound_failure_exit(self, tmp_path, monkeypatch):
        import dpquant.cli as cli
        monkeypatch.setattr(cli, "compare_to_bound",
                            lambda rep: {"above_bound": False,
                                         "margin_nats": -1.0,
                                         "tolerance_nats": 0.0})
        out = tmp_path / "r.json"
        assert main(["eval", "--scheme", "simple", "-n", "10000",
                     "--check-bound", "--out", str(out)]) == EXIT_BOUND

    def test_numeric_failure_exit(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["eval", "--scheme", "simple", "-n", "50",
                     "--out", str(out)]) == EXIT_NUMERIC


class TestSweep:
    def test_deterministic_and_above_bound(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sweep", "--family", "transform", "--grid", "0.5,2",
                "-n", "20000", "--seed", "3"]
        assert main(args + ["--out", str(a)]) == EXIT_OK
        assert main(args + ["--out", str(b)]) == EXIT_OK
        assert a.read_bytes().replace(b"a.csv", b"") == \
            b.read_bytes().replace(b"b.csv", b"")
        header, rows = _rows(a)
        assert "dp_rdf_nats" in header and "rdf_nats" in header
        for r in rows:
            slack = 3 * (float(r["rate_se"]) + float(r["mse_se"]))
            assert float(r["rate_nats"]) >= float(r["dp_rdf_nats"]) - slack

    def test_config_file_and_flag_override(self, tmp_path):
        cfgf = tmp_path / "run.cfg"
        cfgf.write_text("family=simple\nn=20000\nseed=9\nout=ignored.csv\n")
        out = tmp_path / "s.csv"
        assert main(["sweep", "--config", str(cfgf), "--grid", "1",
                     "--out", str(out)]) == EXIT_OK
        text = out.read_text()
        assert "# seed=9" in text and "# family=simple" in text
        _, rows = _rows(out)
        assert rows[0]["scheme"] == "SimpleDpq"
        assert float(rows[0]["rate_nats"]) == 0.0

    def test_dpq_seed_env_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("DPQ_SEED", "42")
        out = tmp_path / "s.csv"
        assert main(["sweep", "--family", "simple", "--grid", "1",
                     "-n", "20000", "--out", str(out)]) == EXIT_OK
        _, rows = _rows(out)
        assert rows[0]["seed"] == "42"


class TestUsageErrors:
    def test_bad_source_exit(self, tmp_path):
        assert main(["bounds", "--source", "cauchy:x=1",
                     "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE

    def test_unknown_flag_exit(self):
        assert main(["bounds", "--frobnicate"]) == EXIT_USAGE

    def test_missing_subcommand_exit(self):
        assert main([]) == EXIT_USAGE
