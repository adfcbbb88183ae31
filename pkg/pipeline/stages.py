"""
Stage runners behind the CLI commands.

Each runner takes a validated PipelineConfig, writes its artifacts under
config.output_dir with the config hash in every sidecar, and returns a
result dictionary whose 'status' is 'completed' or 'failed'. Failures carry
'error_message' and the CLI 'exit_code' instead of raising.
"""

import logging
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from bo.loop import (
    compare_sampling,
    draw_test_set,
    evaluate_hfm,
    run_bo,
    run_lhs_baseline,
    run_trials,
)
from hfm.material import is_physical
from hfm.parameters import REFERENCE_NAMES, ParameterSpace, ParameterVector
from hfm.snapshots import load_snapshot, save_snapshot, snapshot_metadata
from hfm.solver import SnapshotMatrix, simulate
from pipeline.config import PipelineConfig, PipelineConfigError
from pipeline.seeds import derive_rng
from reduce.projection import reconstruction_error
from reduce.svd_update import ReducedBasis, load_basis, save_basis
from reports.plot_data import (
    bo_error_curve,
    cpr_evolution,
    di_scatter,
    node_band,
    setup_error_evolution,
    sobol_bars,
    write_plot_data,
)
from reports.tables import read_csv, write_csv
from rom.bundle import RomBundle, bundle_hash, load_bundle, save_bundle
from rom.metrics import nrmse_series
from rom.offline import fit_bundle
from rom.online import predict
from storage.array_store import file_digest, save_array
from storage.path_policy import (
    comparison_paths,
    sample_stage,
    snapshot_path,
    stage_dir,
    training_set_paths,
)
from uq.damage import damage_index
from uq.montecarlo import evaluate_all, monte_carlo_uq
from uq.sampling import sample_gaussian_array
from uq.sobol import evaluate_design, saltelli_sample, sobol_analysis
from uq.surrogates import BundleSurrogate, IshigamiSurrogate, LinearToySurrogate, Surrogate
from utils.errors import ArtifactIOError, RomToolkitError, exit_code_for

logger = logging.getLogger(__name__)

SAMPLE_MODES = ('bo', 'lhs', 'compare')


def _run_stage(stage: str, config: PipelineConfig,
               body: Callable[[Dict[str, Any]], None]) -> Dict[str, Any]:
    """Run `body`, which fills the result dict, and record status and timing."""
    started = time.perf_counter()
    result: Dict[str, Any] = {
        'stage': stage,
        'status': 'running',
        'config_hash': config.hash,
        'seed': config.seed,
        'output_dir': str(config.output_dir),
        'artifacts': [],
        'error_message': None,
        'exit_code': 0,
    }
    try:
        body(result)
        result['status'] = 'completed'
        logger.info(f"Stage {stage} completed: {len(result['artifacts'])} artifacts")
    except (RomToolkitError, OSError) as e:
        result['status'] = 'failed'
        result['error_message'] = str(e)
        result['exit_code'] = exit_code_for(e)
        logger.error(f"Stage {stage} failed: {e}")
    result['duration_seconds'] = time.perf_counter() - started
    return result


# --- helpers ---------------------------------------------------------------

def hfm_callback(config: PipelineConfig) -> Callable[[ParameterVector], SnapshotMatrix]:
    hfm = config.hfm

    def run(theta: ParameterVector) -> SnapshotMatrix:
        return simulate(theta, hfm.grid, hfm.time, hfm.source)

    return run


def feasibility(space: ParameterSpace) -> Optional[Callable[[np.ndarray], bool]]:
    """is_physical for material spaces; None (everything feasible) otherwise."""
    if all(name in space.names for name in REFERENCE_NAMES):
        return lambda row: is_physical(space.vector(row))
    return None


def read_theta_file(path: Path, space: ParameterSpace) -> np.ndarray:
    """
    (count, xi) parameters from a CSV whose header names every feature.

    Raises:
        PipelineConfigError: If the file is missing or unparseable, lacks a feature,
            or has non-numeric or non-finite values
    """
    path = Path(path)
    if not path.exists():
        raise PipelineConfigError(f"Parameter file not found: {path}")
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise PipelineConfigError(f"Cannot parse parameter file {path}: {e}") from e
    missing = [name for name in space.names if name not in frame.columns]
    if missing:
        raise PipelineConfigError(f"Parameter file {path} lacks columns {missing}")
    try:
        values = frame[list(space.names)].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise PipelineConfigError(f"Parameter file {path} has non-numeric values: {e}") from e
    if values.shape[0] == 0:
        raise PipelineConfigError(f"Parameter file {path} has no rows")
    if not np.all(np.isfinite(values)):
        raise PipelineConfigError(f"Parameter file {path} has non-finite values")
    return values


def _theta_frame(thetas: Sequence[ParameterVector], index_name: str = 'index') -> pd.DataFrame:
    rows = []
    for index, theta in enumerate(thetas):
        row = {index_name: index}
        row.update(theta.as_dict())
        rows.append(row)
    return pd.DataFrame(rows)


def _write_snapshots(directory: Path, prefix: str, snapshots: Sequence[SnapshotMatrix],
                     config: PipelineConfig, extra: Optional[Dict[str, Any]] = None) -> List[Path]:
    paths = []
    for index, snapshot in enumerate(snapshots):
        path = snapshot_path(directory, index, prefix)
        meta = snapshot_metadata(snapshot, config.hfm.grid, config.hfm.time, config.hfm.source,
                                 extra={**config.provenance(), 'index': index, **(extra or {})})
        save_snapshot(path, snapshot, meta)
        paths.append(path)
    return paths


def load_snapshot_dir(directory: Path, prefix: str = 'snapshot') -> List[SnapshotMatrix]:
    """Snapshots <prefix>_0000.roms, <prefix>_0001.roms, ... until the first gap."""
    snapshots = []
    while True:
        path = snapshot_path(directory, len(snapshots), prefix)
        if not path.exists():
            return snapshots
        snapshot, _ = load_snapshot(path)
        snapshots.append(snapshot)


def _as_matrices(params: Sequence[ParameterVector], values: Sequence[np.ndarray],
                 times: np.ndarray) -> List[SnapshotMatrix]:
    return [SnapshotMatrix(S, times, theta) for theta, S in zip(params, values)]


def _csv(result: Dict[str, Any], config: PipelineConfig, path: Path, frame: pd.DataFrame,
         extra: Optional[Dict[str, Any]] = None) -> None:
    write_csv(path, frame, {**config.provenance(), **(extra or {})}, config.output.float_format)
    result['artifacts'].append(str(path))


def _plot_data(result: Dict[str, Any], config: PipelineConfig,
               tables: Dict[str, pd.DataFrame]) -> None:
    if not config.output.plot_data or not tables:
        return
    written = write_plot_data(stage_dir(config.output_dir, 'plot_data'), tables,
                              config.provenance(), config.output.float_format)
    result['artifacts'].extend(str(p) for p in written.values())


def _surrogate(config: PipelineConfig, bundle_dir: Optional[Path]
               ) -> Tuple[Surrogate, ParameterSpace, Optional[np.ndarray], Optional[RomBundle]]:
    """Surrogate, its parameter space and output time stamps (None for analytic models)."""
    kind = config.uq.surrogate
    if kind == 'ishigami':
        model = IshigamiSurrogate()
        return model, model.space(), None, None
    if kind == 'linear':
        return LinearToySurrogate(config.uq.linear_coefficients), config.space, None, None

    bundle = load_bundle(Path(bundle_dir) if bundle_dir else stage_dir(config.output_dir, 'bundle'))
    if bundle.feature_names != config.space.names:
        raise PipelineConfigError(
            f"Bundle features {bundle.feature_names} differ from config features {config.space.names}"
        )
    n_t = config.horizon()
    return BundleSurrogate(bundle, n_t), config.space, bundle.times(n_t), bundle


# --- stages ----------------------------------------------------------------

def run_simulate(config: PipelineConfig, thetas: np.ndarray) -> Dict[str, Any]:
    """One snapshot file pair per parameter row."""

    def body(result):
        rows = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
        params = [config.space.vector(row) for row in rows]
        callback = hfm_callback(config)
        snapshots = [callback(theta) for theta in params]
        paths = _write_snapshots(stage_dir(config.output_dir, 'simulate'), 'snapshot', snapshots, config)
        result['artifacts'].extend(str(p) for p in paths)
        result['n_snapshots'] = len(paths)

    return _run_stage('simulate', config, body)


def _write_training_set(result: Dict[str, Any], config: PipelineConfig, set_dir: Path,
                        params: Sequence[ParameterVector], snapshots: Sequence[np.ndarray],
                        test_params: Sequence[ParameterVector], test_snapshots: Sequence[np.ndarray],
                        basis: ReducedBasis) -> Dict[str, Path]:
    paths = training_set_paths(set_dir)
    times = config.hfm.time.times()
    result['artifacts'].extend(str(p) for p in _write_snapshots(
        paths['training_dir'], 'snapshot', _as_matrices(params, snapshots, times), config))
    result['artifacts'].extend(str(p) for p in _write_snapshots(
        paths['test_dir'], 'snapshot', _as_matrices(test_params, test_snapshots, times), config))
    save_basis(paths['basis'], basis, paths['singular_values'], extra=config.provenance())
    result['artifacts'].extend([str(paths['basis']), str(paths['singular_values'])])

    _csv(result, config, paths['training_set_csv'], _theta_frame(params))
    _csv(result, config, paths['test_set_csv'], _theta_frame(test_params))
    U = basis.matrix(test_snapshots[0].shape[0])
    errors = _theta_frame(test_params, 'test_index')
    errors['error'] = [reconstruction_error(S, U) for S in test_snapshots]
    _csv(result, config, paths['test_errors_csv'], errors)
    return paths


def _sample_bo(result: Dict[str, Any], config: PipelineConfig) -> None:
    space = config.space
    outcome = run_bo(config.sampling.bo, space, hfm_callback(config), feasibility(space))
    set_dir = stage_dir(config.output_dir, sample_stage('bo'))
    paths = _write_training_set(result, config, set_dir, outcome.training_params,
                                outcome.training_snapshots, outcome.test_params,
                                outcome.test_snapshots, outcome.basis)

    labels = _theta_frame(outcome.dataset.thetas)
    labels['error'] = outcome.dataset.errors
    _csv(result, config, paths['labels_csv'], labels)
    trace = outcome.trace.to_frame()
    _csv(result, config, paths['trace_csv'], trace)

    result.update({
        'n_training': len(outcome.training_params),
        'test_error': outcome.test_error,
        'rank': outcome.basis.rank,
        'converged': outcome.converged,
    })
    _plot_data(result, config, {
        'bo_error': bo_error_curve(trace),
        'cpr': cpr_evolution(trace, config.hfm.time.n_retained),
    })


def _lhs_count(config: PipelineConfig, count: Optional[int]) -> int:
    if count is not None:
        return count
    if config.sampling.lhs_count is not None:
        return config.sampling.lhs_count
    bo_dir = training_set_paths(stage_dir(config.output_dir, sample_stage('bo')))['training_dir']
    n_bo = len(load_snapshot_dir(bo_dir))
    if n_bo == 0:
        raise PipelineConfigError(
            "LHS budget unknown: pass a count, set sampling.lhs_count or run the BO sampling first",
            'sampling',
        )
    return n_bo


def _sample_lhs(result: Dict[str, Any], config: PipelineConfig, count: Optional[int]) -> None:
    space = config.space
    feasible = feasibility(space)
    callback = hfm_callback(config)
    count = _lhs_count(config, count)

    bo_paths = training_set_paths(stage_dir(config.output_dir, sample_stage('bo')))
    shared_tests = load_snapshot_dir(bo_paths['test_dir'])
    if shared_tests:
        test_params = [s.theta for s in shared_tests]
        test_snapshots = [s.values for s in shared_tests]
    else:
        test_params = draw_test_set(space, config.sampling.bo.n_test, config.seed, feasible)
        test_snapshots = [evaluate_hfm(callback, theta) for theta in test_params]

    outcome = run_lhs_baseline(space, count, callback, config.sampling.bo.eps_svd,
                               test_snapshots, config.seed, feasible)
    set_dir = stage_dir(config.output_dir, sample_stage('lhs'))
    paths = _write_training_set(result, config, set_dir, outcome.training_params,
                                outcome.training_snapshots, test_params, test_snapshots,
                                outcome.basis)

    if shared_tests and bo_paths['basis'].exists():
        bo_basis = load_basis(bo_paths['basis'], bo_paths['singular_values'])
        comparison = compare_sampling(test_params, test_snapshots, bo_basis, outcome.basis)
        _csv(result, config, paths['comparison_csv'], comparison)
        _plot_data(result, config, {'sampling_comparison': comparison})

    result.update({
        'n_training': count,
        'test_error': outcome.test_error,
        'rank': outcome.basis.rank,
    })


def _sample_compare(result: Dict[str, Any], config: PipelineConfig, trials: Optional[int]) -> None:
    n_trials = config.sampling.trials if trials is None else trials
    if n_trials < 1:
        raise PipelineConfigError(f"trials must be >= 1, got {n_trials}", 'sampling')
    space = config.space
    setups = config.sampling.sampling_setups()
    outcome = run_trials(config.sampling.bo, space, hfm_callback(config), setups, n_trials,
                         feasibility(space))
    summary = outcome.summary()

    paths = comparison_paths(stage_dir(config.output_dir, sample_stage('compare')))
    _csv(result, config, paths['trials_csv'], outcome.trials)
    _csv(result, config, paths['evolution_csv'], outcome.evolution)
    _csv(result, config, paths['summary_csv'], summary)

    result.update({
        'n_trials': n_trials,
        'setups': [setup.name for setup in setups],
        'meets_comparison': {row.setup: bool(row.meets_comparison)
                             for row in summary.itertuples(index=False)},
    })
    _plot_data(result, config, {
        'setup_evolution': setup_error_evolution(outcome.evolution),
        'setup_summary': summary,
    })


def run_sample(config: PipelineConfig, mode: str = 'bo', count: Optional[int] = None,
               trials: Optional[int] = None) -> Dict[str, Any]:
    """
    Build a training set by adaptive sampling (mode 'bo') or a one-shot LHS.

    The LHS set reuses the BO test set when one exists and then also writes
    the per-test-parameter comparison of both bases. Mode 'compare' runs
    every configured setup against LHS over seeded trials instead.
    """

    def body(result):
        if mode not in SAMPLE_MODES:
            raise PipelineConfigError(f"Unknown sampling mode '{mode}', expected {SAMPLE_MODES}")
        result['mode'] = mode
        if mode == 'bo':
            _sample_bo(result, config)
        elif mode == 'lhs':
            _sample_lhs(result, config, count)
        else:
            _sample_compare(result, config, trials)

    return _run_stage(f'sample_{mode}', config, body)


def run_train(config: PipelineConfig, set_dir: Optional[Path] = None) -> Dict[str, Any]:
    """Fit the ROM bundle on a training-set directory (the BO set by default)."""

    def body(result):
        paths = training_set_paths(Path(set_dir) if set_dir else
                                   stage_dir(config.output_dir, sample_stage('bo')))
        snapshots = load_snapshot_dir(paths['training_dir'])
        if not snapshots:
            raise ArtifactIOError(f"No training snapshots in {paths['training_dir']}")
        if any(s.theta is None for s in snapshots):
            raise ArtifactIOError(f"Training snapshot sidecars in {paths['training_dir']} lack θ")
        basis = load_basis(paths['basis'], paths['singular_values'])

        provenance = {**config.provenance(), 'basis_digest': file_digest(paths['basis'])}
        offline = fit_bundle([s.theta for s in snapshots], [s.values for s in snapshots],
                             snapshots[0].times, basis, config.networks, config.space, provenance)
        bundle_dir = stage_dir(config.output_dir, 'bundle')
        save_bundle(bundle_dir, offline.bundle)
        result['artifacts'].append(str(bundle_dir))

        metrics = pd.DataFrame({'metric': sorted(offline.metrics),
                                'value': [offline.metrics[k] for k in sorted(offline.metrics)]})
        _csv(result, config, bundle_dir / 'training_metrics.csv', metrics)

        rows = []
        for network in sorted(offline.histories):
            history = offline.histories[network]
            for epoch, loss in enumerate(history.train_loss, 1):
                val = history.val_loss[epoch - 1] if epoch <= len(history.val_loss) else np.nan
                rows.append({'network': network, 'epoch': epoch, 'train_loss': loss, 'val_loss': val})
        _csv(result, config, bundle_dir / 'loss_history.csv', pd.DataFrame(rows))

        result['metrics'] = dict(offline.metrics)
        result['bundle_hash'] = bundle_hash(offline.bundle)

    return _run_stage('train', config, body)


def run_predict(config: PipelineConfig, thetas: Optional[np.ndarray] = None,
                bundle_dir: Optional[Path] = None, truth_dir: Optional[Path] = None) -> Dict[str, Any]:
    """
    Predict fields for each θ; with truth snapshots also write per-step nRMSE.

    Without explicit θ the truth snapshots' own θ are used.
    """

    def body(result):
        bundle = load_bundle(Path(bundle_dir) if bundle_dir else stage_dir(config.output_dir, 'bundle'))
        truths = load_snapshot_dir(Path(truth_dir)) if truth_dir else []
        if truth_dir and not truths:
            raise ArtifactIOError(f"No truth snapshots in {truth_dir}")

        if thetas is None:
            if not truths:
                raise PipelineConfigError("Nothing to predict: give parameters or truth snapshots")
            if any(t.theta is None for t in truths):
                raise ArtifactIOError(f"Truth snapshot sidecars in {truth_dir} lack θ")
            rows = [t.theta.as_array() for t in truths]
        else:
            rows = list(np.atleast_2d(np.asarray(thetas, dtype=np.float64)))
        if truths and len(truths) != len(rows):
            raise PipelineConfigError(f"{len(rows)} parameters for {len(truths)} truth snapshots")

        out_dir = stage_dir(config.output_dir, 'predict')
        digest = bundle_hash(bundle)
        predictions = []
        errors = []
        for index, row in enumerate(rows):
            truth = truths[index] if truths else None
            n_t = truth.n_times if truth is not None else config.horizon()
            prediction = predict(bundle, row, n_t)
            predictions.append(prediction)
            if truth is None:
                continue
            if truth.theta is not None and not np.allclose(truth.theta.as_array(), row):
                raise PipelineConfigError(f"Parameter row {index} does not match truth θ={truth.theta}")
            series = nrmse_series(truth.values, prediction.values)
            errors.append(pd.DataFrame({'sample': index, 't_index': np.arange(n_t),
                                        'time': truth.times, 'nrmse': series}))

        paths = _write_snapshots(out_dir, 'prediction', predictions, config, {'bundle_hash': digest})
        result['artifacts'].extend(str(p) for p in paths)
        result['n_predictions'] = len(paths)
        if errors:
            frame = pd.concat(errors, ignore_index=True)
            _csv(result, config, out_dir / 'nrmse.csv', frame, {'bundle_hash': digest})
            final = frame.groupby('sample')['nrmse'].last()
            result['median_final_nrmse'] = float(final.median())

    return _run_stage('predict', config, body)


def _uq_samples(config: PipelineConfig, space: ParameterSpace, r: int) -> np.ndarray:
    return sample_gaussian_array(space, r, derive_rng(config.seed, 'uq.samples'))


def _samples_frame(samples: np.ndarray, names: Sequence[str]) -> pd.DataFrame:
    frame = pd.DataFrame(samples, columns=list(names))
    frame.insert(0, 'sample', np.arange(samples.shape[0]))
    return frame


def run_uq(config: PipelineConfig, bundle_dir: Optional[Path] = None, jobs: int = 1) -> Dict[str, Any]:
    """Monte Carlo mean/std fields over r Gaussian draws."""

    def body(result):
        surrogate, space, times, bundle = _surrogate(config, bundle_dir)
        samples = _uq_samples(config, space, config.uq.r)
        outcome = monte_carlo_uq(surrogate, samples, jobs=jobs, seed=config.seed)

        out_dir = stage_dir(config.output_dir, 'uq')
        extra = {'surrogate': config.uq.surrogate, 'r': outcome.r}
        if bundle is not None:
            extra['bundle_hash'] = bundle_hash(bundle)
        fields = outcome.to_frame(times)
        _csv(result, config, out_dir / 'uq_fields.csv', fields, extra)
        _csv(result, config, out_dir / 'samples.csv', _samples_frame(samples, space.names), extra)
        for name, values in (('mean', outcome.mean), ('std', outcome.std)):
            path = out_dir / f'{name}.roms'
            save_array(path, np.atleast_2d(values), {**config.provenance(), **extra, 'kind': name})
            result['artifacts'].append(str(path))

        node = config.sensor_node() if bundle is not None else 0
        result['max_std'] = float(np.max(outcome.std))
        _plot_data(result, config, {'uq_band': node_band(fields, node)})

    return _run_stage('uq', config, body)


def run_sobol(config: PipelineConfig, bundle_dir: Optional[Path] = None, jobs: int = 1) -> Dict[str, Any]:
    """First-order and total Sobol indices per time step at the sensor node."""

    def body(result):
        surrogate, space, times, bundle = _surrogate(config, bundle_dir)
        extra: Dict[str, Any] = {'surrogate': config.uq.surrogate}
        if bundle is not None:
            node = config.sensor_node()
            surrogate = surrogate.at_node(node)
            extra.update({'node': node, 'bundle_hash': bundle_hash(bundle)})

        design = saltelli_sample(space, config.uq.sobol_n, derive_rng(config.seed, 'sobol.design'),
                                 config.uq.sobol_method)
        evaluations = evaluate_design(surrogate, design, jobs)
        outcome = sobol_analysis(evaluations, config.uq.num_resamples, config.uq.conf_level,
                                 derive_rng(config.seed, 'sobol.bootstrap'))
        if times is not None and times.size != outcome.first.shape[1]:
            times = None
        extra.update({'estimator': outcome.estimator, 'n_base': outcome.n_base})
        frame = outcome.to_frame(times)
        _csv(result, config, stage_dir(config.output_dir, 'sobol') / 'sobol.csv', frame, extra)

        report_times = list(config.uq.report_times) or [outcome.first.shape[1] - 1]
        result['n_evaluations'] = int(design.points.shape[0])
        _plot_data(result, config, {'sobol_bars': sobol_bars(frame, report_times)})

    return _run_stage('sobol', config, body)


def run_di(config: PipelineConfig, bundle_dir: Optional[Path] = None, node: Optional[int] = None,
           jobs: int = 1) -> Dict[str, Any]:
    """Damage index of every UQ draw at one node."""

    def body(result):
        surrogate, space, _, bundle = _surrogate(config, bundle_dir)
        extra: Dict[str, Any] = {'surrogate': config.uq.surrogate, 'baseline': config.uq.di_baseline}
        chosen = None
        if bundle is not None:
            chosen = node if node is not None else config.sensor_node()
            surrogate = surrogate.at_node(chosen)
            extra.update({'node': chosen, 'bundle_hash': bundle_hash(bundle)})

        r = config.uq.di_samples or config.uq.r
        samples = _uq_samples(config, space, r)
        series = np.vstack([out.ravel() for out in evaluate_all(surrogate, list(samples), jobs)])
        if config.uq.di_baseline == 'mean':
            baseline = series.mean(axis=0)
        else:
            baseline = np.asarray(surrogate.evaluate(space.means), dtype=np.float64).ravel()

        outcome = damage_index(series, baseline)
        frame = outcome.to_frame(samples, space.names)
        _csv(result, config, stage_dir(config.output_dir, 'di') / 'di.csv', frame,
             {**extra, 'normalization': outcome.normalization})
        result['node'] = chosen
        result['n_samples'] = r
        _plot_data(result, config, {'di_scatter': di_scatter(frame)})

    return _run_stage('di', config, body)


def run_report(config: PipelineConfig) -> Dict[str, Any]:
    """Rebuild every plot-data table from the stage outputs present on disk."""

    def body(result):
        out = config.output_dir
        tables: Dict[str, pd.DataFrame] = {}

        trace_path = training_set_paths(stage_dir(out, sample_stage('bo')))['trace_csv']
        if trace_path.exists():
            trace = read_csv(trace_path)
            tables['bo_error'] = bo_error_curve(trace)
            tables['cpr'] = cpr_evolution(trace, config.hfm.time.n_retained)
        comparison_path = training_set_paths(stage_dir(out, sample_stage('lhs')))['comparison_csv']
        if comparison_path.exists():
            tables['sampling_comparison'] = read_csv(comparison_path)
        compare = comparison_paths(stage_dir(out, sample_stage('compare')))
        if compare['evolution_csv'].exists():
            tables['setup_evolution'] = setup_error_evolution(read_csv(compare['evolution_csv']))
        if compare['summary_csv'].exists():
            tables['setup_summary'] = read_csv(compare['summary_csv'])
        fields_path = stage_dir(out, 'uq') / 'uq_fields.csv'
        if fields_path.exists():
            fields = read_csv(fields_path)
            node = config.sensor_node() if config.uq.surrogate == 'bundle' else 0
            tables['uq_band'] = node_band(fields, node)
        sobol_path = stage_dir(out, 'sobol') / 'sobol.csv'
        if sobol_path.exists():
            sobol = read_csv(sobol_path)
            report_times = list(config.uq.report_times) or [int(sobol['t_index'].max())]
            tables['sobol_bars'] = sobol_bars(sobol, report_times)
        di_path = stage_dir(out, 'di') / 'di.csv'
        if di_path.exists():
            tables['di_scatter'] = di_scatter(read_csv(di_path))

        if not tables:
            raise ArtifactIOError(f"No stage outputs found under {out}")
        written = write_plot_data(stage_dir(out, 'plot_data'), tables, config.provenance(),
                                  config.output.float_format)
        result['artifacts'].extend(str(p) for p in written.values())
        result['tables'] = sorted(written)

    return _run_stage('report', config, body)
