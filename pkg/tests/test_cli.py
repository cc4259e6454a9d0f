import json

import numpy as np
import pytest
import yaml
from typer.testing import CliRunner

from sindycrypt import __version__
from sindycrypt.client.cli import app
from sindycrypt.common.file_ops import FileOps
from sindycrypt.core.cipher import GrayImage

runner = CliRunner()


@pytest.fixture
def pgm(tmp_path, small_image):
    path = tmp_path / "plain.pgm"
    FileOps.write_pgm(path, small_image)
    return path


@pytest.fixture(scope="module")
def henon_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "henon.csv"
    result = runner.invoke(app, ["generate", "henon", "--n", "10000", "--out", str(path)])
    assert result.exit_code == 0, result.output
    return path


class TestGenerate:
    def test_writes_states(self, tmp_path):
        out = tmp_path / "t.csv"
        result = runner.invoke(app, ["generate", "henon", "--n", "100", "--out", str(out)])
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "# dim=2"
        assert len(lines) == 101
        first = [float(v) for v in lines[1].split(",")]
        assert first == pytest.approx([1.086, 0.03], abs=1e-15)

    def test_unknown_map(self, tmp_path):
        result = runner.invoke(app, ["generate", "tent", "--out", str(tmp_path / "t.csv")])
        assert result.exit_code == 2

    def test_x0_arity(self, tmp_path):
        result = runner.invoke(app, ["generate", "henon", "--x0", "0.1", "--out", str(tmp_path / "t.csv")])
        assert result.exit_code == 2

    def test_divergent_start(self, tmp_path):
        result = runner.invoke(app, ["generate", "henon", "--x0", "10,10", "--out", str(tmp_path / "t.csv")])
        assert result.exit_code == 1

    def test_noise_is_seeded(self, tmp_path):
        outputs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            result = runner.invoke(app, ["generate", "henon", "--n", "50", "--sigma", "1e-3",
                                         "--seed", "7", "--out", str(out)])
            assert result.exit_code == 0, result.output
            outputs.append(out.read_text())
        assert outputs[0] == outputs[1]


class TestIdentify:
    def test_henon(self, tmp_path, henon_csv):
        model = tmp_path / "henon.model"
        result = runner.invoke(app, ["identify", str(henon_csv), "--out", str(model)])
        assert result.exit_code == 0, result.output
        assert "1.4*x^2" in result.output
        assert "y' = 0.3*x" in result.output
        assert "接近剪枝阈值" not in result.output
        assert model.read_text().startswith("# map dim=2 vars=x,y\n")

    def test_coupling_pruned_near_threshold_warns(self, tmp_path):
        data = tmp_path / "logistic3d.csv"
        assert runner.invoke(app, ["generate", "logistic3d", "--out", str(data)]).exit_code == 0
        result = runner.invoke(app, ["identify", str(data)])
        assert result.exit_code == 0, result.output
        assert "接近剪枝阈值" in result.output

        result = runner.invoke(app, ["identify", str(data), "--lambda", "1e-3"])
        assert result.exit_code == 0, result.output
        assert "接近剪枝阈值" not in result.output

    def test_too_little_data(self, tmp_path):
        data = tmp_path / "tiny.csv"
        data.write_text("# dim=2\n0.1,0.1\n1.086,0.03\n-0.6211544,0.3258\n")
        result = runner.invoke(app, ["identify", str(data)])
        assert result.exit_code == 1

    def test_malformed_csv(self, tmp_path):
        data = tmp_path / "bad.csv"
        data.write_text("no header\n")
        assert runner.invoke(app, ["identify", str(data)]).exit_code == 1

    def test_missing_file(self, tmp_path):
        assert runner.invoke(app, ["identify", str(tmp_path / "nope.csv")]).exit_code == 2


class TestCrypt:
    def test_round_trip(self, tmp_path, pgm, small_image):
        cipher, plain = tmp_path / "c.pgm", tmp_path / "p.pgm"
        result = runner.invoke(app, ["encrypt", str(pgm), "--key", "0.2,0.3", "--out", str(cipher)])
        assert result.exit_code == 0, result.output
        result = runner.invoke(app, ["decrypt", str(cipher), "--key", "0.2,0.3", "--out", str(plain)])
        assert result.exit_code == 0, result.output
        assert FileOps.read_pgm(plain).equals(small_image)
        assert not FileOps.read_pgm(cipher).equals(small_image)

    def test_key_file_round_trip(self, tmp_path, pgm, small_image):
        key_path, cipher, plain = tmp_path / "key.txt", tmp_path / "c.pgm", tmp_path / "p.pgm"
        result = runner.invoke(app, ["encrypt", str(pgm), "--key", "0.21,0.31", "--save-key", str(key_path),
                                     "--out", str(cipher)])
        assert result.exit_code == 0, result.output
        assert FileOps.read_key(key_path).initial_state == (0.21, 0.31)
        result = runner.invoke(app, ["decrypt", str(cipher), "--key-file", str(key_path), "--out", str(plain)])
        assert result.exit_code == 0, result.output
        assert FileOps.read_pgm(plain).equals(small_image)

    def test_key_file_errors(self, tmp_path, pgm):
        out = str(tmp_path / "c.pgm")
        wrong_dim, broken = tmp_path / "k3.txt", tmp_path / "bad.txt"
        wrong_dim.write_text("0.1,0.2,0.3\n")
        broken.write_text("0.1,abc\n")
        base = ["encrypt", str(pgm), "--out", out]
        assert runner.invoke(app, base + ["--key-file", str(tmp_path / "nope.txt")]).exit_code == 2
        assert runner.invoke(app, base + ["--key-file", str(wrong_dim)]).exit_code == 2
        assert runner.invoke(app, base + ["--key-file", str(broken)]).exit_code == 1
        assert runner.invoke(app, base + ["--key-file", str(wrong_dim), "--key", "0.2,0.3"]).exit_code == 2

    def test_model_file_as_map(self, tmp_path, pgm, small_image):
        model = tmp_path / "m.model"
        FileOps.write_model(model, FileOps.load_map("lozi")[0])
        cipher, plain = tmp_path / "c.pgm", tmp_path / "p.pgm"
        assert runner.invoke(app, ["encrypt", str(pgm), "-m", str(model), "--out", str(cipher)]).exit_code == 0
        assert runner.invoke(app, ["decrypt", str(cipher), "-m", str(model), "--out", str(plain)]).exit_code == 0
        assert FileOps.read_pgm(plain).equals(small_image)

    def test_dump_keystream(self, tmp_path, pgm, small_image):
        dump = tmp_path / "ks.bin"
        result = runner.invoke(app, ["encrypt", str(pgm), "--out", str(tmp_path / "c.pgm"),
                                     "--dump-keystream", str(dump)])
        assert result.exit_code == 0, result.output
        assert len(dump.read_bytes()) == 4 * small_image.size

    def test_single_pixel(self, tmp_path):
        src, cipher, plain = tmp_path / "one.pgm", tmp_path / "c.pgm", tmp_path / "p.pgm"
        FileOps.write_pgm(src, GrayImage(np.array([[200]], dtype=np.uint8)))
        assert runner.invoke(app, ["encrypt", str(src), "--out", str(cipher)]).exit_code == 0
        assert runner.invoke(app, ["decrypt", str(cipher), "--out", str(plain)]).exit_code == 0
        assert FileOps.read_pgm(plain).pixels.tolist() == [[200]]

    @pytest.mark.parametrize("args", [
        ["--key", "0.2,0.3,0.4"],
        ["--key", "abc"],
        ["--rounds", "3"],
        ["--map", "tent"],
    ])
    def test_usage_errors(self, tmp_path, pgm, args):
        result = runner.invoke(app, ["encrypt", str(pgm), "--out", str(tmp_path / "c.pgm"), *args])
        assert result.exit_code == 2

    def test_malformed_pgm(self, tmp_path):
        bad = tmp_path / "bad.pgm"
        bad.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
        result = runner.invoke(app, ["encrypt", str(bad), "--out", str(tmp_path / "c.pgm")])
        assert result.exit_code == 1

    def test_divergent_key(self, tmp_path, pgm):
        result = runner.invoke(app, ["encrypt", str(pgm), "--key", "10,10", "--out", str(tmp_path / "c.pgm")])
        assert result.exit_code == 1


class TestAnalyze:
    def test_plain_only_report(self, tmp_path, pgm):
        out = tmp_path / "r.json"
        result = runner.invoke(app, ["analyze", str(pgm), "--out", str(out), "--pairs", "200"])
        assert result.exit_code == 0, result.output
        data = json.loads(out.read_text())
        assert data["npcr"] is None and data["cipher"] is None

    def test_report_is_deterministic(self, tmp_path, pgm):
        cipher = tmp_path / "c.pgm"
        assert runner.invoke(app, ["encrypt", str(pgm), "--out", str(cipher)]).exit_code == 0
        reports = []
        for name in ("r1.json", "r2.json"):
            out = tmp_path / name
            result = runner.invoke(app, ["analyze", str(pgm), str(cipher), "--out", str(out), "--seed", "3"])
            assert result.exit_code == 0, result.output
            reports.append(out.read_bytes())
        assert reports[0] == reports[1]
        assert json.loads(reports[0])["npcr"] > 90

    def test_histogram_and_scatter(self, tmp_path, pgm):
        hist, scatter = tmp_path / "h.csv", tmp_path / "scatter"
        result = runner.invoke(app, ["analyze", str(pgm), "--pairs", "10",
                                     "--hist", str(hist), "--scatter", str(scatter)])
        assert result.exit_code == 0, result.output
        assert hist.read_text().splitlines()[0] == "gray,plain"
        assert len(hist.read_text().splitlines()) == 257
        assert len((scatter / "plain_diagonal.csv").read_text().splitlines()) == 11


class TestConfig:
    def test_init(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert runner.invoke(app, ["init"]).exit_code == 0
        assert (tmp_path / "sindycrypt-config.yaml").is_file()
        assert runner.invoke(app, ["init"]).exit_code == 0
        assert runner.invoke(app, ["init", "--force"]).exit_code == 0

    def test_init_reports_invalid_config(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "sindycrypt-config.yaml").write_text("cipher:\n  rounds: 5\n")
        assert runner.invoke(app, ["init"]).exit_code == 1

    def test_init_set_values(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        result = runner.invoke(app, ["init", "--set", "identify.lambda=1e-3", "--set", "cipher.rounds=6"])
        assert result.exit_code == 0, result.output
        assert "identify.lambda = 0.001" in result.output
        saved = yaml.safe_load((tmp_path / "sindycrypt-config.yaml").read_text())
        assert saved["identify"]["lambda"] == 0.001
        assert saved["cipher"]["rounds"] == 6

        result = runner.invoke(app, ["init", "--set", "cipher.burn_in=100"])
        assert result.exit_code == 0, result.output
        saved = yaml.safe_load((tmp_path / "sindycrypt-config.yaml").read_text())
        assert (saved["cipher"]["rounds"], saved["cipher"]["burn_in"]) == (6, 100)

    def test_init_set_rejects_bad_values(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert runner.invoke(app, ["init", "--set", "cipher.rounds"]).exit_code == 2
        assert not (tmp_path / "sindycrypt-config.yaml").exists()
        assert runner.invoke(app, ["init"]).exit_code == 0
        before = (tmp_path / "sindycrypt-config.yaml").read_text()
        assert runner.invoke(app, ["init", "--set", "cipher.rounds=3"]).exit_code == 1
        assert runner.invoke(app, ["init", "--set", "cipher.colour=red"]).exit_code == 1
        assert (tmp_path / "sindycrypt-config.yaml").read_text() == before

    def test_config_supplies_defaults(self, tmp_path, pgm, small_image):
        config = tmp_path / "run.yaml"
        config.write_text(yaml.safe_dump({"cipher": {"key": [0.25, 0.35], "rounds": 6}}))
        cipher, plain = tmp_path / "c.pgm", tmp_path / "p.pgm"
        result = runner.invoke(app, ["--config", str(config), "encrypt", str(pgm), "--out", str(cipher)])
        assert result.exit_code == 0, result.output
        result = runner.invoke(app, ["decrypt", str(cipher), "--key", "0.25,0.35", "--rounds", "6",
                                     "--out", str(plain)])
        assert result.exit_code == 0, result.output
        assert FileOps.read_pgm(plain).equals(small_image)

    def test_missing_config(self, tmp_path, pgm):
        result = runner.invoke(app, ["--config", str(tmp_path / "nope.yaml"), "analyze", str(pgm)])
        assert result.exit_code == 2


def test_version():
    result = runner.invoke(app, ["version"])
    assert result.exit_code == 0
    assert __version__ in result.output
