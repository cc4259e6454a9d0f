import pytest
import yaml

from sindycrypt.common.config_ops import ConfigOps, RunConfig


@pytest.fixture
def config_ops(tmp_path):
    return ConfigOps(work_dir=str(tmp_path))


class TestDefaultConfig:
    def test_create(self, config_ops):
        path = config_ops.create_default_config()
        assert path.name == "sindycrypt-config.yaml"
        assert config_ops.has_config()
        assert config_ops.validate_config() == (True, [])

    def test_defaults_match_models(self, config_ops):
        config_ops.create_default_config()
        loaded = config_ops.load_run_config()
        assert loaded == RunConfig()
        assert loaded.identify.lambda_ == 0.01
        assert loaded.cipher.key == [0.2, 0.3]

    def test_refuses_to_overwrite(self, config_ops):
        config_ops.create_default_config()
        with pytest.raises(FileExistsError):
            config_ops.create_default_config()
        config_ops.create_default_config(overwrite=True)

    def test_missing_file(self, config_ops):
        assert not config_ops.has_config()
        with pytest.raises(FileNotFoundError):
            config_ops.load_config()
        assert config_ops.validate_config() == (False, ["配置文件不存在"])


class TestValues:
    def test_dotted_lookup(self, config_ops):
        config_ops.create_default_config()
        assert config_ops.get_config_value("identify.lambda") == 0.01
        assert config_ops.get_config_value("cipher.rounds") == 4
        assert config_ops.get_config_value("cipher.nothing", "fallback") == "fallback"

    def test_partial_update(self, config_ops):
        config_ops.create_default_config()
        updated = config_ops.update_config({"cipher": {"rounds": 6}})
        assert updated["cipher"]["rounds"] == 6
        assert updated["cipher"]["key"] == [0.2, 0.3]
        assert config_ops.load_run_config().cipher.rounds == 6

    def test_from_path(self, tmp_path):
        target = tmp_path / "nested" / "run.yaml"
        ops = ConfigOps.from_path(str(target))
        ops.create_default_config()
        assert target.is_file()


class TestValidation:
    @pytest.mark.parametrize("section, values", [
        ("cipher", {"rounds": 3}),
        ("identify", {"max_degree": 9}),
        ("identify", {"lambda": 0}),
        ("generate", {"sigma": -1.0}),
        ("analysis", {"unknown": 1}),
    ])
    def test_rejects(self, config_ops, section, values):
        config_ops.create_default_config()
        config = config_ops.load_config()
        config[section].update(values)
        config_ops.save_config(config)
        ok, errors = config_ops.validate_config()
        assert not ok
        assert any(e.startswith(section) for e in errors)
        with pytest.raises(ValueError):
            config_ops.load_run_config()

    def test_invalid_update_leaves_file_untouched(self, config_ops):
        config_ops.create_default_config()
        before = config_ops.config_path.read_text(encoding="utf-8")
        with pytest.raises(ValueError) as info:
            config_ops.update_config({"cipher": {"rounds": 3}})
        assert "cipher.rounds" in str(info.value)
        assert config_ops.config_path.read_text(encoding="utf-8") == before

    def test_broken_yaml(self, config_ops):
        config_ops.config_path.write_text("cipher: [unclosed\n", encoding="utf-8")
        ok, errors = config_ops.validate_config()
        assert not ok
        with pytest.raises(ValueError):
            config_ops.load_run_config()

    def test_lambda_alias(self):
        settings = RunConfig.model_validate(yaml.safe_load("identify:\n  lambda: 0.05\n"))
        assert settings.identify.lambda_ == 0.05
        assert settings.cipher.rounds == 4


class TestAssignments:
    @pytest.mark.parametrize("text, path, update", [
        ("identify.lambda=1e-3", "identify.lambda", {"identify": {"lambda": 0.001}}),
        ("cipher.rounds=6", "cipher.rounds", {"cipher": {"rounds": 6}}),
        ("cipher.key=[0.25, 0.35]", "cipher.key", {"cipher": {"key": [0.25, 0.35]}}),
        ("identify.include_abs=true", "identify.include_abs", {"identify": {"include_abs": True}}),
        ("generate.x0=", "generate.x0", {"generate": {"x0": None}}),
    ])
    def test_parse(self, text, path, update):
        assert ConfigOps.parse_assignment(text) == (path, update)

    @pytest.mark.parametrize("text", ["identify.lambda", "=3", "identify..lambda=1", "cipher.key=[0.1"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            ConfigOps.parse_assignment(text)

    def test_merge(self):
        paths, updates = ConfigOps.parse_assignments(["cipher.rounds=6", "cipher.burn_in=100"])
        assert paths == ["cipher.rounds", "cipher.burn_in"]
        assert updates == {"cipher": {"rounds": 6, "burn_in": 100}}
