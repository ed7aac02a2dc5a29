import io
import subprocess
import sys
from pathlib import Path

import pytest

import secureid
from secureid.cli import (
    EXIT_DOMAIN,
    EXIT_OK,
    EXIT_RESOURCE,
    EXIT_THRESHOLD,
    EXIT_USAGE,
    SEED_ENV,
    ExperimentConfig,
    main,
    parse_pairs,
    resolve_seed,
)
from secureid.errors import ConfigFileError
from secureid.quantizer import load_channels

CONFIGS = Path(secureid.__file__).parent / "configs"

SMALL_CFG = """\
main_noise_watts = 1.0
eve_noise_watts = 4.0
power_watts = 4.0
blocklength = 16
rate_fraction = 0.22
colors = 8
bins = 2
identities = 32
trials = 300
pairs = 0-1
eve_pairs = 2-3
random_pairs = 1
"""


def run(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL_CFG)
    return p


class TestCapacity:
    def test_awgn_example(self):
        code, text = run(["capacity", "--awgn", "--sigma2", "1", "--power", "3", "--bits"])
        assert code == EXIT_OK and text.strip() == "awgn_capacity 1.000000"

    def test_dichotomy_zero_when_eve_is_better(self):
        code, text = run(["capacity", "--dichotomy", "--sigma2", "4", "--sigma2-eve", "1", "--power", "1"])
        assert code == EXIT_OK and text.split()[-1] == "0.000000"

    def test_mimo_csv(self):
        code, text = run(["capacity", "--mimo", "--singular", "2,1", "--sigma2", "1", "--power", "1", "--bits", "--csv"])
        lines = text.splitlines()
        assert code == EXIT_OK and lines[0] == "quantity,value,base"
        name, value, unit = lines[1].split(",")
        assert name == "mimo_capacity" and float(value) == pytest.approx(2.339850, abs=1e-6) and unit == "bits"

    def test_requires_a_quantity(self):
        assert run(["capacity"])[0] == EXIT_USAGE

    def test_negative_variance_is_domain_error(self):
        assert run(["capacity", "--awgn", "--sigma2", "-1"])[0] == EXIT_DOMAIN

    def test_no_subcommand(self):
        assert run([])[0] == EXIT_USAGE


def test_fig8_rows():
    code, text = run(["fig8"])
    lines = text.splitlines()
    assert code == EXIT_OK and lines[0] == "P,lower_bound,capacity" and len(lines) == 32
    rows = {float(l.split(",")[0]): [float(v) for v in l.split(",")[1:]] for l in lines[1:]}
    assert rows[0.0][0] == pytest.approx(0.531004, abs=1e-6)
    assert rows[1.0][1] == pytest.approx(0.346574, abs=1e-6)
    assert rows[1.0][0] == pytest.approx(0.877578, abs=1e-6)


class TestConfig:
    def test_unknown_key(self):
        with pytest.raises(ConfigFileError):
            ExperimentConfig.from_text("blocklength = 4\nbogus = 1\n")

    def test_unknown_key_exit_code(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text(SMALL_CFG + "frobnicate = 2\n")
        assert run(["simulate", str(p)])[0] == EXIT_USAGE

    def test_pairs(self):
        assert parse_pairs("0-1, 2-3") == [(0, 1), (2, 3)]
        assert parse_pairs("") == []

    def test_seed_precedence(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "9")
        assert resolve_seed(3, 5) == 3
        assert resolve_seed(None, 5) == 5
        assert resolve_seed(None, None) == 9
        monkeypatch.delenv(SEED_ENV)
        assert resolve_seed(None, None) == 0


class TestSimulate:
    def test_seed_determinism(self, small_cfg):
        a = run(["simulate", str(small_cfg), "--seed", "7"])
        b = run(["simulate", str(small_cfg), "--seed", "7", "--workers", "4"])
        c = run(["simulate", str(small_cfg), "--seed", "8"])
        assert a[0] == EXIT_OK and a[1] == b[1] and a[1] != c[1]

    def test_env_seed(self, small_cfg, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "7")
        assert run(["simulate", str(small_cfg)])[1] == run(["simulate", str(small_cfg), "--seed", "7"])[1]

    def test_outputs_to_files(self, small_cfg, tmp_path):
        csv, summ, code_file = tmp_path / "o.csv", tmp_path / "s.txt", tmp_path / "code.bin"
        rc, text = run(["simulate", str(small_cfg), "--csv", str(csv), "--summary", str(summ), "--save-code", str(code_file)])
        assert rc == EXIT_OK and text == ""
        assert csv.read_text().startswith("kind,") and "lambda1" in summ.read_text()
        assert secureid.IdentificationCode.load(code_file).n_identities == 32

    def test_threshold_exit(self, tmp_path):
        p = tmp_path / "t.cfg"
        p.write_text(SMALL_CFG.replace("eve_noise_watts = 4.0", "eve_noise_watts = 1.0")
                     + "require_secrecy = false\nmax_eve_advantage = 0.01\n")
        assert run(["simulate", str(p)])[0] == EXIT_THRESHOLD

    def test_resource_exit(self, tmp_path):
        p = tmp_path / "r.cfg"
        p.write_text(SMALL_CFG.replace("blocklength = 16", "blocklength = 200") + "max_codewords = 1000\n")
        assert run(["simulate", str(p)])[0] == EXIT_RESOURCE

    @pytest.mark.parametrize("name", ["secure.cfg", "insecure-baseline.cfg"])
    def test_bundled_configs_meet_their_thresholds(self, name):
        assert run(["simulate", str(CONFIGS / name)])[0] == EXIT_OK


class TestQuantize:
    def test_header_spans_large_n(self):
        code, text = run(["quantize", "--sigma2", "1", "--sigma2-eve", "4", "--n", "100", "--delta", "0.1",
                          "-a", "1", "--skip-tv"])
        head = dict(kv.split("=") for kv in text.splitlines()[0][2:].split() if "=" in kv)
        assert code == EXIT_OK
        assert float(head["delta_x"]) == pytest.approx(0.01)
        assert float(head["z0"]) == pytest.approx(11.0)

    def test_blocklength_one_passes(self, tmp_path):
        out, lat = tmp_path / "ch.bin", tmp_path / "lat.csv"
        code, text = run(["quantize", "--sigma2", "1", "--sigma2-eve", "4", "--n", "1", "--delta", "0.1", "-a", "1",
                          "--out", str(out), "--lattice-csv", str(lat)])
        assert code == EXIT_OK
        assert "# channel=main" in text and "# channel=eve" in text
        main_ch, eve_ch = load_channels(out)[1]
        assert main_ch.transition.shape == eve_ch.transition.shape
        assert (main_ch.transition != eve_ch.transition).any()
        assert lat.read_text().startswith("lattice,index,value")

    def test_resource_ceiling(self):
        assert run(["quantize", "--sigma2", "1", "--sigma2-eve", "4", "--n", "1", "--delta", "0.1", "-a", "1",
                    "--max-entries", "10", "--skip-tv"])[0] == EXIT_RESOURCE

    def test_bad_delta(self):
        assert run(["quantize", "--sigma2", "1", "--sigma2-eve", "4", "--n", "1", "--delta", "0", "-a", "1"])[0] == EXIT_DOMAIN


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "secureid", "capacity", "--awgn", "--power", "3", "--bits"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "awgn_capacity 1.000000"
