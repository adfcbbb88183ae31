"""
Tests for pipeline config loading and validation.
"""

from pathlib import Path

import pytest

from pipeline.config import (
    DEFAULT_OUTPUT_DIR,
    DEFAULT_SETUPS,
    PipelineConfig,
    PipelineConfigError,
    config_from_dict,
    config_hash,
    load_config,
)
from utils.errors import EXIT_CONFIG, exit_code_for

CONFIG_DIR = Path(__file__).resolve().parents[2] / 'config'


def small(**sections):
    """Smallest valid document: an 8x8 plate with a short window."""
    raw = {
        'hfm': {
            'grid': {'nx': 8, 'ny': 8},
            'time': {'dt': 1.0e-7, 'steps': 40, 'keep_every': 2},
        },
        'networks': {'window': 4},
    }
    raw.update(sections)
    return raw


class TestShippedConfigs:
    """The YAML files under config/ all validate."""

    @pytest.mark.parametrize('name', ['desk.yml', 'full.yml', 'smoke.yml'])
    def test_loads(self, name):
        config = load_config(CONFIG_DIR / name)
        assert config.space.names == ('E', 'nu', 'rho', 'T')
        assert len(config.hash) == 64

    def test_desk_values(self):
        config = load_config(CONFIG_DIR / 'desk.yml')
        assert config.hfm.grid.nx == 64
        assert config.hfm.time.n_retained == 200
        assert config.sampling.bo.eps_svd == pytest.approx(7e-4)
        assert config.sampling.bo.eps_tol == pytest.approx(9e-4)
        assert config.sampling.bo.acquisition.kind == 'EI'
        assert config.uq.r == 1000

    def test_full_epochs(self):
        config = load_config(CONFIG_DIR / 'full.yml')
        assert config.networks.cae.epochs == 2000
        assert config.networks.ffnn.epochs == 10000
        assert config.networks.lstm.epochs == 35000
        assert config.networks.cae.learning_rate == pytest.approx(5e-4)

    def test_smoke_seed_reaches_every_section(self):
        config = load_config(CONFIG_DIR / 'smoke.yml')
        assert config.seed == 7
        assert config.sampling.bo.seed == 7
        assert config.networks.seed == 7


class TestConfigFromDict:
    """Tests for section parsing."""

    def test_defaults(self):
        config = config_from_dict(small())
        assert config.seed == 0
        assert config.output_dir == Path(DEFAULT_OUTPUT_DIR)
        assert config.sampling.bo.kernel.kind == 'rbf'
        assert config.sampling.bo.kernel.noise == pytest.approx(1e-8)
        assert config.uq.surrogate == 'bundle'

    def test_network_overrides_merge_with_defaults(self):
        config = config_from_dict(small(networks={'window': 4, 'ffnn': {'epochs': 7}}))
        assert config.networks.ffnn.epochs == 7
        assert config.networks.ffnn.learning_rate == pytest.approx(1e-2)

    def test_exponent_without_sign_is_read_as_float(self):
        config = config_from_dict(small(sampling={'eps_svd': '7e-4'}))
        assert config.sampling.bo.eps_svd == pytest.approx(7e-4)

    def test_parameter_space_list(self):
        features = [{'name': 'a', 'mean': 0.0, 'std': 1.0, 'distribution': 'uniform'}]
        config = config_from_dict(small(parameter_space=features))
        assert config.space.names == ('a',)
        assert config.space.features[0].distribution == 'uniform'

    def test_comparison_setups(self):
        config = config_from_dict(small(sampling={'setups': ['ei-rbf', 'PI-matern15'], 'trials': 3}))
        assert config.sampling.setups == ('ei-rbf', 'PI-matern15')
        assert config.sampling.trials == 3
        assert config_from_dict(small()).sampling.setups == DEFAULT_SETUPS

    def test_single_setup_string(self):
        config = config_from_dict(small(sampling={'setups': 'EI-rbf'}))
        assert config.sampling.setups == ('EI-rbf',)

    def test_report_times_become_tuple(self):
        config = config_from_dict(small(uq={'report_times': [1, 5]}))
        assert config.uq.report_times == (1, 5)


class TestValidation:
    """Out-of-range values fail before any stage runs."""

    @pytest.mark.parametrize('raw, section', [
        ({'bogus': 1}, None),
        ({'seed': -1}, 'seed'),
        ({'uq': {'r': 1}}, 'uq'),
        ({'uq': {'sobol_n': 1000}}, 'uq'),
        ({'uq': {'surrogate': 'kriging'}}, 'uq'),
        ({'uq': {'conf_level': 1.5}}, 'uq'),
        ({'uq': {'di_baseline': 'median'}}, 'uq'),
        ({'sampling': {'eps_svd': 2.0}}, 'sampling'),
        ({'sampling': {'seed': 3}}, 'sampling'),
        ({'sampling': {'acquisition': {'kind': 'UCB'}}}, 'sampling.acquisition'),
        ({'sampling': {'setups': ['EI-linear']}}, 'sampling'),
        ({'sampling': {'setups': []}}, 'sampling'),
        ({'sampling': {'trials': 0}}, 'sampling'),
        ({'networks': {'window': 4, 'cae': {'epochs': 0}}}, 'networks.cae'),
        ({'output': {'float_format': 'nope'}}, 'output'),
    ])
    def test_rejected(self, raw, section):
        with pytest.raises(PipelineConfigError) as info:
            config_from_dict(small(**raw))
        assert info.value.section == section
        assert exit_code_for(info.value) == EXIT_CONFIG

    def test_unknown_key_named(self):
        with pytest.raises(PipelineConfigError, match='typo'):
            config_from_dict(small(uq={'typo': 1}))

    def test_cfl_violation(self):
        raw = small()
        raw['hfm']['time']['dt'] = 1.0e-6
        with pytest.raises(PipelineConfigError, match='CFL') as info:
            config_from_dict(raw)
        assert info.value.section == 'hfm'

    def test_cfl_skipped_for_analytic_space(self):
        raw = small(parameter_space=[{'name': 'x', 'mean': 0.0, 'std': 1.0}])
        raw['hfm']['time']['dt'] = 1.0e-6
        assert config_from_dict(raw).space.names == ('x',)

    def test_window_must_fit_horizon(self):
        with pytest.raises(PipelineConfigError, match='window'):
            config_from_dict(small(networks={'window': 20}))

    def test_node_outside_grid(self):
        with pytest.raises(PipelineConfigError, match='node'):
            config_from_dict(small(uq={'node': 64}))

    def test_report_time_beyond_horizon(self):
        with pytest.raises(PipelineConfigError, match='report_times'):
            config_from_dict(small(uq={'report_times': [20]}))

    def test_source_on_clamped_edge(self):
        raw = small()
        raw['hfm']['source'] = {'ix': 0, 'iy': 3}
        with pytest.raises(PipelineConfigError) as info:
            config_from_dict(raw)
        assert info.value.section == 'hfm.source'


class TestConfigHash:
    """Tests for the provenance hash."""

    def test_stable(self):
        assert config_hash(config_from_dict(small())) == config_hash(config_from_dict(small()))

    def test_changes_with_values(self):
        base = config_from_dict(small())
        other = config_from_dict(small(uq={'r': 50}))
        assert base.hash != other.hash

    def test_output_dir_excluded(self):
        base = config_from_dict(small())
        moved = base.with_overrides(output_dir=Path('/elsewhere'))
        assert moved.output_dir == Path('/elsewhere')
        assert moved.hash == base.hash

    def test_seed_override(self):
        config = config_from_dict(small()).with_overrides(seed=11)
        assert (config.seed, config.sampling.bo.seed, config.networks.seed) == (11, 11, 11)
        assert config.provenance() == {'config_hash': config.hash, 'seed': 11}


class TestPipelineConfig:
    """Tests for derived values."""

    def test_sensor_node_defaults_to_source(self):
        config = config_from_dict(small())
        assert config.sensor_node() == 4 * 8 + 4

    def test_horizon(self):
        assert config_from_dict(small()).horizon() == 20
        assert config_from_dict(small(uq={'n_t': 5})).horizon() == 5

    def test_default_instance(self):
        assert PipelineConfig().space.dim == 4


class TestLoadConfig:
    """Tests for file loading and environment overrides."""

    def test_missing_file(self, tmp_path):
        with pytest.raises(PipelineConfigError, match='not found'):
            load_config(tmp_path / 'absent.yml')

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / 'bad.yml'
        path.write_text('seed: [1, 2\n')
        with pytest.raises(PipelineConfigError, match='parse'):
            load_config(path)

    def test_env_path_and_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv('ROM_CONFIG', str(CONFIG_DIR / 'smoke.yml'))
        monkeypatch.setenv('ROM_OUTPUT_DIR', str(tmp_path / 'out'))
        config = load_config()
        assert config.seed == 7
        assert config.output_dir == tmp_path / 'out'

    def test_arguments_beat_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv('ROM_OUTPUT_DIR', str(tmp_path / 'env'))
        config = load_config(CONFIG_DIR / 'smoke.yml', seed=3, output_dir=tmp_path / 'arg')
        assert config.output_dir == tmp_path / 'arg'
        assert config.seed == 3
