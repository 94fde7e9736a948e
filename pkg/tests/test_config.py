import math

import pytest

from config import RUNTIME_KEYS, load_config
from models.errors import ConfigError


def test_defaults():
    config = load_config(environ={})
    assert config.f_target == 0.9
    assert config.eta2 == pytest.approx(0.72)
    assert config.caps == [0.01, 0.1, 1.0, math.inf]
    assert config.a == math.inf
    assert config.budget.l_att_km == 22.0


def test_caps_from_a_string():
    config = load_config(overrides={'caps': '0.01, 0.1,1,inf'}, environ={})
    assert config.caps == [0.01, 0.1, 1.0, math.inf]


def test_environment_layer():
    config = load_config(environ={'REPEATER_F_TARGET': '0.8', 'REPEATER_LOG_LEVEL': 'debug', 'OTHER': 'x'})
    assert config.f_target == 0.8
    assert config.log_level == 'DEBUG'


def test_flags_beat_environment():
    environ = {'REPEATER_F_TARGET': '0.8'}
    assert load_config(overrides={'f_target': 0.95}, environ=environ).f_target == 0.95
    assert load_config(overrides={'f_target': None}, environ=environ).f_target == 0.8


def test_attenuation_reaches_the_budget():
    assert load_config(environ={}).budget.attenuation == 'link'
    config = load_config(environ={'REPEATER_ATTENUATION': 'half_link'})
    assert config.budget.attenuation == 'half_link'
    assert config.budget.eta_ld == pytest.approx(0.9 * math.exp(-100.0 / 44.0))


def test_config_file(tmp_path):
    path = tmp_path / 'run.env'
    path.write_text('f_target=0.8\nREPEATER_MAX_DEPTH=2\n')
    config = load_config(str(path), environ={'REPEATER_MAX_DEPTH': '3'})
    assert config.f_target == 0.8
    assert config.max_depth == 3


def test_config_file_with_unknown_key(tmp_path):
    path = tmp_path / 'run.env'
    path.write_text('colour=blue\n')
    with pytest.raises(ConfigError):
        load_config(str(path), environ={})


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / 'absent.env'), environ={})


@pytest.mark.parametrize('overrides', [
    {'f_target': 1.2},
    {'sigma_min': 3.0, 'sigma_max': 1.0},
    {'caps': '0.1,-1'},
    {'scenario': 'laser'},
    {'kappa_t': 80.0},
])
def test_invalid_values(overrides):
    with pytest.raises(ConfigError) as info:
        load_config(overrides=overrides, environ={})
    assert info.value.exit_code == 2


def test_resolved_settings_skip_runtime_keys():
    resolved = load_config(overrides={'output': 'out.csv', 'jobs': 4}, environ={}).resolved()
    assert list(resolved) == sorted(resolved)
    assert not set(RUNTIME_KEYS) & set(resolved)
    assert resolved['f_target'] == 0.9
