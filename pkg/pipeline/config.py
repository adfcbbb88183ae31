"""
Pipeline configuration.

One sectioned YAML document (parameter_space, hfm, sampling, networks, uq,
output, seed, output_dir) mapped onto frozen dataclasses. Every section is
validated, and cross-section constraints checked, before any stage runs.
"""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Type

import yaml
from dotenv import load_dotenv

from bo.acquisition import AcquisitionConfig
from bo.loop import BoRunConfig, SamplingSetup
from gpr.model import KernelConfig
from hfm.material import max_wave_speed
from hfm.parameters import REFERENCE_NAMES, ParameterSpace
from hfm.solver import GridConfig, SourceConfig, TimeConfig, check_cfl
from nn.training import TrainConfig
from rom.offline import RomTrainConfig
from uq.sobol import SAMPLING_METHODS
from utils.errors import ConfigurationError

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = './config/desk.yml'
DEFAULT_OUTPUT_DIR = './output'
SECTIONS = ('parameter_space', 'hfm', 'sampling', 'networks', 'uq', 'output', 'seed', 'output_dir')
SURROGATES = ('bundle', 'ishigami', 'linear')
DI_BASELINES = ('mean', 'nominal')
DEFAULT_SETUPS = ('EI-rbf', 'EI-matern15', 'EI-product', 'PI-rbf', 'PI-matern15', 'PI-product')


class PipelineConfigError(ConfigurationError):
    """Raised when a config file is missing, malformed or out of range."""

    def __init__(self, message: str, section: Optional[str] = None):
        self.section = section
        prefix = f"[{section}] " if section else ''
        super().__init__(f"{prefix}{message}")


@dataclass(frozen=True)
class HfmSection:
    grid: GridConfig = field(default_factory=GridConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    source: SourceConfig = field(default_factory=SourceConfig)


@dataclass(frozen=True)
class SamplingSection:
    """
    BO loop settings; lhs_count fixes the LHS budget instead of matching a BO run.

    setups and trials drive the comparison mode: every '<acquisition>-<kernel>'
    setup is run against LHS over `trials` seeded trials.
    """
    bo: BoRunConfig = field(default_factory=BoRunConfig)
    lhs_count: Optional[int] = None
    setups: Tuple[str, ...] = DEFAULT_SETUPS
    trials: int = 10

    def __post_init__(self):
        setups = (self.setups,) if isinstance(self.setups, str) else (self.setups or ())
        object.__setattr__(self, 'setups', tuple(str(s) for s in setups))
        if not isinstance(self.trials, int) or isinstance(self.trials, bool):
            raise PipelineConfigError(f"trials must be an integer, got {self.trials!r}", 'sampling')
        if not self.setups:
            raise PipelineConfigError("setups cannot be empty", 'sampling')
        if self.trials < 1:
            raise PipelineConfigError(f"trials must be >= 1, got {self.trials}", 'sampling')
        for label in self.setups:
            try:
                SamplingSetup.parse(label, self.bo)
            except ConfigurationError as e:
                raise PipelineConfigError(str(e), 'sampling') from e
        if self.lhs_count is not None and self.lhs_count < 1:
            raise PipelineConfigError(f"lhs_count must be >= 1, got {self.lhs_count}", 'sampling')

    def sampling_setups(self) -> Tuple[SamplingSetup, ...]:
        return tuple(SamplingSetup.parse(label, self.bo) for label in self.setups)


@dataclass(frozen=True)
class UqSection:
    """
    Monte Carlo, Sobol and damage-index settings.

    node defaults to the source node; n_t defaults to the HFM horizon.
    Damage indices use di_samples draws (r by default) against either
    their ensemble mean or the prediction at the nominal parameters.
    """
    r: int = 1000
    sobol_n: int = 1024
    sobol_method: str = 'sobol'
    num_resamples: int = 100
    conf_level: float = 0.95
    node: Optional[int] = None
    n_t: Optional[int] = None
    report_times: Tuple[int, ...] = ()
    surrogate: str = 'bundle'
    linear_coefficients: Tuple[float, ...] = (1.0,)
    di_samples: Optional[int] = None
    di_baseline: str = 'mean'

    def __post_init__(self):
        if self.r < 2:
            raise PipelineConfigError(f"r must be >= 2, got {self.r}", 'uq')
        if self.sobol_n < 1:
            raise PipelineConfigError(f"sobol_n must be >= 1, got {self.sobol_n}", 'uq')
        if self.sobol_method not in SAMPLING_METHODS:
            raise PipelineConfigError(
                f"sobol_method must be one of {SAMPLING_METHODS}, got '{self.sobol_method}'", 'uq'
            )
        if self.sobol_method == 'sobol' and self.sobol_n & (self.sobol_n - 1):
            raise PipelineConfigError(f"sobol_n must be a power of two, got {self.sobol_n}", 'uq')
        if self.num_resamples < 2:
            raise PipelineConfigError(f"num_resamples must be >= 2, got {self.num_resamples}", 'uq')
        if not 0.0 < self.conf_level < 1.0:
            raise PipelineConfigError(f"conf_level must be in (0, 1), got {self.conf_level}", 'uq')
        if self.node is not None and self.node < 0:
            raise PipelineConfigError(f"node must be >= 0, got {self.node}", 'uq')
        if self.n_t is not None and self.n_t < 1:
            raise PipelineConfigError(f"n_t must be >= 1, got {self.n_t}", 'uq')
        if self.surrogate not in SURROGATES:
            raise PipelineConfigError(
                f"surrogate must be one of {SURROGATES}, got '{self.surrogate}'", 'uq'
            )
        if self.di_samples is not None and self.di_samples < 1:
            raise PipelineConfigError(f"di_samples must be >= 1, got {self.di_samples}", 'uq')
        if self.di_baseline not in DI_BASELINES:
            raise PipelineConfigError(
                f"di_baseline must be one of {DI_BASELINES}, got '{self.di_baseline}'", 'uq'
            )
        if not self.linear_coefficients:
            raise PipelineConfigError("linear_coefficients cannot be empty", 'uq')
        object.__setattr__(self, 'report_times', tuple(int(t) for t in self.report_times))
        object.__setattr__(self, 'linear_coefficients',
                           tuple(float(c) for c in self.linear_coefficients))
        if any(t < 0 for t in self.report_times):
            raise PipelineConfigError(f"report_times must be >= 0, got {self.report_times}", 'uq')


@dataclass(frozen=True)
class OutputSection:
    float_format: str = '%.10g'
    plot_data: bool = True

    def __post_init__(self):
        try:
            self.float_format % 1.0
        except (TypeError, ValueError):
            raise PipelineConfigError(f"Invalid float_format '{self.float_format}'", 'output') from None


@dataclass(frozen=True)
class PipelineConfig:
    parameter_space: ParameterSpace = field(default_factory=ParameterSpace.reference)
    hfm: HfmSection = field(default_factory=HfmSection)
    sampling: SamplingSection = field(default_factory=SamplingSection)
    networks: RomTrainConfig = field(default_factory=RomTrainConfig)
    uq: UqSection = field(default_factory=UqSection)
    output: OutputSection = field(default_factory=OutputSection)
    seed: int = 0
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)

    @property
    def space(self) -> ParameterSpace:
        return self.parameter_space

    @property
    def hash(self) -> str:
        return config_hash(self)

    def provenance(self) -> Dict[str, object]:
        """Sidecar entries tying an artifact to this config."""
        return {'config_hash': self.hash, 'seed': self.seed}

    def horizon(self) -> int:
        """Prediction horizon used by the UQ stages."""
        return self.uq.n_t if self.uq.n_t is not None else self.hfm.time.n_retained

    def sensor_node(self) -> int:
        """Node for damage indices and band plots; the source node by default."""
        if self.uq.node is not None:
            return self.uq.node
        ix, iy = self.hfm.source.location(self.hfm.grid)
        return self.hfm.grid.node_index(ix, iy)

    def to_dict(self) -> Dict[str, Any]:
        """Canonical nested mapping; output_dir is left out so relocating a run keeps its hash."""
        data = asdict(self)
        data.pop('output_dir')
        return data

    def with_overrides(self, seed: Optional[int] = None,
                       output_dir: Optional[Path] = None) -> 'PipelineConfig':
        """Copy with a new root seed (propagated to every stage) and/or output directory."""
        config = self
        if seed is not None:
            config = replace(
                config,
                seed=int(seed),
                sampling=replace(config.sampling, bo=replace(config.sampling.bo, seed=int(seed))),
                networks=replace(config.networks, seed=int(seed)),
            )
        if output_dir is not None:
            config = replace(config, output_dir=Path(output_dir))
        return config


def config_hash(config: PipelineConfig) -> str:
    """SHA-256 of the canonical JSON of a validated config."""
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def _section(raw: Mapping[str, Any], key: str) -> Dict[str, Any]:
    value = raw.get(key) or {}
    if not isinstance(value, Mapping):
        raise PipelineConfigError(f"Section must be a mapping, got {type(value).__name__}", key)
    return dict(value)


def _build(cls: Type, values: Mapping[str, Any], section: str):
    """Instantiate a config dataclass, rejecting unknown keys."""
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise PipelineConfigError(f"Unknown keys {unknown} for {cls.__name__}", section)
    types = {f.name: f.type for f in fields(cls)}
    converted = {}
    for key, value in values.items():
        if isinstance(value, list):
            value = tuple(value)
        elif types[key] is float and isinstance(value, (str, int)) and not isinstance(value, bool):
            # YAML 1.1 reads '7e-4' as a string
            try:
                value = float(value)
            except ValueError:
                raise PipelineConfigError(f"{key} must be a number, got {value!r}", section) from None
        converted[key] = value
    try:
        return cls(**converted)
    except PipelineConfigError:
        raise
    except ConfigurationError as e:
        raise PipelineConfigError(str(e), section) from e
    except (TypeError, ValueError) as e:
        raise PipelineConfigError(f"Invalid {cls.__name__}: {e}", section) from e


def _parameter_space(raw: Mapping[str, Any]) -> ParameterSpace:
    entries = raw.get('parameter_space')
    if entries is None:
        return ParameterSpace.reference()
    if isinstance(entries, Mapping):
        entries = entries.get('features')
    if not isinstance(entries, list):
        raise PipelineConfigError("Expected a list of features", 'parameter_space')
    try:
        return ParameterSpace.from_config(entries)
    except ConfigurationError as e:
        raise PipelineConfigError(str(e), 'parameter_space') from e
    except (TypeError, ValueError, AttributeError) as e:
        raise PipelineConfigError(f"Invalid feature entry: {e}", 'parameter_space') from e


def _hfm(raw: Mapping[str, Any]) -> HfmSection:
    section = _section(raw, 'hfm')
    unknown = sorted(set(section) - {'grid', 'time', 'source'})
    if unknown:
        raise PipelineConfigError(f"Unknown keys {unknown}", 'hfm')
    return HfmSection(
        grid=_build(GridConfig, _section(section, 'grid'), 'hfm.grid'),
        time=_build(TimeConfig, _section(section, 'time'), 'hfm.time'),
        source=_build(SourceConfig, _section(section, 'source'), 'hfm.source'),
    )


def _sampling(raw: Mapping[str, Any], seed: int) -> SamplingSection:
    section = _section(raw, 'sampling')
    kernel = _build(KernelConfig, {'kind': 'rbf', 'noise': 1e-8, **_section(section, 'kernel')},
                    'sampling.kernel')
    acquisition = _build(AcquisitionConfig, _section(section, 'acquisition'), 'sampling.acquisition')
    lhs_count = section.pop('lhs_count', None)
    setups = section.pop('setups', DEFAULT_SETUPS)
    trials = section.pop('trials', 10)
    section.pop('kernel', None)
    section.pop('acquisition', None)
    if 'seed' in section:
        raise PipelineConfigError("Use the top-level seed", 'sampling')
    bo = _build(BoRunConfig, {**section, 'kernel': kernel, 'acquisition': acquisition, 'seed': seed},
                'sampling')
    return SamplingSection(bo=bo, lhs_count=lhs_count, setups=setups, trials=trials)


def _networks(raw: Mapping[str, Any], seed: int) -> RomTrainConfig:
    section = _section(raw, 'networks')
    defaults = RomTrainConfig()
    models = {}
    for name in ('cae', 'ffnn', 'lstm'):
        overrides = _section(section, name)
        models[name] = _build(TrainConfig, {**asdict(getattr(defaults, name)), **overrides},
                              f'networks.{name}')
        section.pop(name, None)
    if 'seed' in section:
        raise PipelineConfigError("Use the top-level seed", 'networks')
    return _build(RomTrainConfig, {**section, **models, 'seed': seed}, 'networks')


def _check_cross_section(config: PipelineConfig) -> None:
    space, hfm = config.parameter_space, config.hfm
    if all(name in space.names for name in REFERENCE_NAMES):
        try:
            check_cfl(max_wave_speed(space), hfm.grid, hfm.time)
        except ConfigurationError as e:
            raise PipelineConfigError(f"{e} at the fastest wave speed in the parameter box", 'hfm') from e
    else:
        logger.debug(f"Parameter space {space.names} has no material features; CFL check skipped")

    try:
        hfm.source.location(hfm.grid)
    except ConfigurationError as e:
        raise PipelineConfigError(str(e), 'hfm.source') from e

    n_retained = hfm.time.n_retained
    if config.networks.window >= n_retained:
        raise PipelineConfigError(
            f"window ({config.networks.window}) must be < retained steps ({n_retained})", 'networks'
        )
    if config.uq.node is not None and config.uq.node >= hfm.grid.n_nodes:
        raise PipelineConfigError(f"node {config.uq.node} outside [0, {hfm.grid.n_nodes})", 'uq')
    late = [t for t in config.uq.report_times if t >= config.horizon()]
    if late:
        raise PipelineConfigError(f"report_times {late} beyond horizon {config.horizon()}", 'uq')


def config_from_dict(raw: Mapping[str, Any]) -> PipelineConfig:
    """
    Build and validate a PipelineConfig from a parsed document.

    Raises:
        PipelineConfigError: Naming the first offending section
    """
    if not isinstance(raw, Mapping):
        raise PipelineConfigError("Config document must be a mapping")
    unknown = sorted(set(raw) - set(SECTIONS))
    if unknown:
        raise PipelineConfigError(f"Unknown sections {unknown}; valid: {SECTIONS}")

    seed = raw.get('seed', 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise PipelineConfigError(f"seed must be a non-negative integer, got {seed!r}", 'seed')

    config = PipelineConfig(
        parameter_space=_parameter_space(raw),
        hfm=_hfm(raw),
        sampling=_sampling(raw, seed),
        networks=_networks(raw, seed),
        uq=_build(UqSection, _section(raw, 'uq'), 'uq'),
        output=_build(OutputSection, _section(raw, 'output'), 'output'),
        seed=seed,
        output_dir=Path(str(raw.get('output_dir', DEFAULT_OUTPUT_DIR))),
    )
    _check_cross_section(config)
    return config


def load_config(path: Optional[Path] = None, seed: Optional[int] = None,
                output_dir: Optional[Path] = None) -> PipelineConfig:
    """
    Load, validate and override a YAML pipeline config.

    Precedence for the path and output directory: arguments, then the
    ROM_CONFIG / ROM_OUTPUT_DIR environment variables, then the file.

    Args:
        path: Config file; defaults to ROM_CONFIG or ./config/desk.yml
        seed: Root seed override
        output_dir: Output directory override

    Raises:
        PipelineConfigError: If the file is missing, unparsable or invalid
    """
    if path is None:
        path = Path(os.getenv('ROM_CONFIG', DEFAULT_CONFIG_PATH))
    config_file = Path(path)
    if not config_file.exists():
        raise PipelineConfigError(f"Config file not found: {config_file}")

    try:
        with open(config_file, 'r', encoding='utf-8') as f:
            raw = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise PipelineConfigError(f"Failed to parse {config_file}: {e}") from e

    config = config_from_dict(raw)
    if output_dir is None and os.getenv('ROM_OUTPUT_DIR'):
        output_dir = Path(os.environ['ROM_OUTPUT_DIR'])
    config = config.with_overrides(seed=seed, output_dir=output_dir)
    logger.info(f"Loaded config {config_file} (hash {config.hash[:12]}, seed {config.seed})")
    return config
