import pytest

from selfsim.config import ConfigError, RunConfig, load_config, parse_config_text


def test_defaults():
    cfg = RunConfig()
    assert cfg.N == 1 and cfg.workers == 1
    assert cfg.S_max > 0


def test_parse_aliases_and_comments():
    vals = parse_config_text("dim = 2  # space\nthreads=3\n\ns_max = 30\n")
    assert vals == {"N": 2, "workers": 3, "horizon": 30.0}


@pytest.mark.parametrize("text", ["rtol", "bogus = 1", "N = two"])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


@pytest.mark.parametrize("field", ["rtol", "atol", "alpha_tol", "matching_tol"])
def test_nonpositive_tolerance_rejected(field):
    with pytest.raises(ConfigError):
        RunConfig(**{field: 0.0})


def test_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("workers = 2\nN = 3\n")
    assert load_config(str(path), environ={}).workers == 2
    assert load_config(str(path), environ={"SSS_THREADS": "5"}).workers == 5
    cfg = load_config(str(path), {"workers": 7}, environ={"SSS_THREADS": "5"})
    assert cfg.workers == 7 and cfg.N == 3


def test_bad_env_and_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(environ={"SSS_THREADS": "many"})
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.cfg"), environ={})
