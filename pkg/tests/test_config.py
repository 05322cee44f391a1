import pytest

from chromasr.config import RunConfig, load_config, parse_config_text
from chromasr.errors import ConfigError


def test_defaults_follow_protocol():
    cfg = RunConfig().validate()
    assert (cfg.scale_factor, cfg.patch_side, cfg.search_window, cfg.group_size) == (3, 6, 25, 20)
    assert (cfg.pyramid_ratio, cfg.pyramid_levels, cfg.alpha) == (0.8, 6, 0.8)
    assert (cfg.rho0, cfg.max_admm_iters) == (1.0, 360)


@pytest.mark.parametrize("field,value", [
    ("pyramid_ratio", 1.2), ("pyramid_ratio", 0.0), ("eta", 1.0), ("alpha", -0.1),
    ("search_window", 24), ("scale_factor", 1), ("group_size", 0), ("beta", -3.0), ("beta", "big"),
])
def test_invalid_field_is_named(field, value):
    with pytest.raises(ConfigError) as exc:
        RunConfig(**{field: value}).validate()
    assert field in exc.value.fields


def test_several_bad_fields_listed():
    with pytest.raises(ConfigError) as exc:
        RunConfig(eta=0.5, pyramid_ratio=2.0).validate()
    assert set(exc.value.fields) == {"eta", "pyramid_ratio"}


def test_parse_config_text():
    vals = parse_config_text("# comment\nscale_factor = 4\nbeta = 12.5  # inline\nuniform_lambda = yes\n\nbeta_gain=3\n")
    assert vals == {"scale_factor": 4, "beta": 12.5, "uniform_lambda": True, "beta_gain": 3.0}


def test_parse_rejects_unknown_and_malformed():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("nonsense = 1\npatch_side = six\n")
    assert set(exc.value.fields) == {"nonsense", "patch_side"}
    with pytest.raises(ConfigError):
        parse_config_text("just words\n")


def test_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("scale_factor = 4\nseed = 9\n")
    cfg = load_config(str(path), seed=3, workers=None)
    assert cfg.scale_factor == 4 and cfg.seed == 3 and cfg.workers == 0


def test_worker_count():
    assert RunConfig(workers=3).worker_count() == 3
    assert RunConfig().worker_count() >= 1
