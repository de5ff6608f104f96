import math

import pytest

from ahricci.config import ConfigError, default_config_text, parse_config


def test_minimal_config_uses_defaults():
    cfg = parse_config("[grid]\nn = 4\n")
    assert cfg["grid.n"] == 4 and cfg.sources["grid.n"] == "line 2"
    assert cfg["grid.h"] == 0.05 and "grid.h" in cfg.defaults_used()
    assert cfg.resolved()["grid.n"] == {"value": 4, "source": "line 2"}


def test_mu_out_of_range_names_interval():
    with pytest.raises(ConfigError) as e:
        parse_config("[grid]\nn = 3\n[norm]\nmu = 2.5\n")
    assert "μ ∈ (0, n−1)" in str(e.value) and e.value.lines == (4,)


def test_duplicate_key_names_both_lines():
    with pytest.raises(ConfigError) as e:
        parse_config("[grid]\nn = 3\nr_max = 10\nn = 4\n")
    assert e.value.lines == (2, 4) and "line 2" in str(e.value)


@pytest.mark.parametrize("text,line", [("[grid]\nfoo = 1\n", 2), ("[nope]\n", 1),
                                       ("[grid]\nn = three\n", 2), ("[grid]\njust text\n", 2),
                                       ("t_end = 3\n", 1)])
def test_bad_lines_report_line_numbers(text, line):
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    assert e.value.lines == (line,)


def test_type_error_names_expected_type():
    with pytest.raises(ConfigError, match="expects int"):
        parse_config("[grid]\nn = 3.5\n")


def test_overrides_take_precedence():
    cfg = parse_config("[flow]\nt_end = 2\n", ["flow.t_end=3", "h=0.1"])
    assert cfg["flow.t_end"] == 3.0 and cfg.sources["flow.t_end"] == "override 1"
    assert cfg["grid.h"] == 0.1
    with pytest.raises(ConfigError):
        parse_config("", ["t_end=1"])
    with pytest.raises(ConfigError):
        parse_config("", ["grid.h"])


def test_pi_expressions_and_lists():
    cfg = parse_config("[spectral]\ntheta = pi/3\nlam = 0, -1, -3\n[experiment]\nperturbations = rr-near, sph-near\n")
    assert cfg["spectral.theta"] == pytest.approx(math.pi / 3)
    assert cfg["spectral.lam"] == (0.0, -1.0, -3.0)
    assert cfg["experiment.perturbations"] == ("rr-near", "sph-near")


def test_too_few_nodes_and_gamma_range():
    with pytest.raises(ConfigError, match="16"):
        parse_config("[grid]\nr_max = 5\nh = 1\n")
    with pytest.raises(ConfigError):
        parse_config("[spectral]\ngamma_min = 3\ngamma_max = 1\n")


def test_default_text_roundtrips():
    cfg = parse_config(default_config_text())
    ref = parse_config("")
    assert cfg.values == ref.values
    assert not cfg.defaults_used()


def test_experiment_config_mapping():
    cfg = parse_config("[grid]\nh = 0.1\n[flow]\ngauge = chained\n[experiment]\nt_end = 7\n")
    e = cfg.experiment_config()
    assert e.h == 0.1 and e.t_end == 7.0 and e.gauge == "deturck"
