"""
Adaptive training-set selection: GPR-driven sampling fused with streaming SVD.

Loop: seed with an LHS design, simulate, build the basis, label each
training parameter with its reconstruction error, then repeatedly fit a GP
on those labels, simulate the parameter with the highest acquisition,
update the basis and relabel every training parameter against it, until the
mean test error drops below the tolerance.
"""

import logging
import math
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from bo.acquisition import AcquisitionConfig, propose_next
from bo.design import lhs_design
from gpr.model import KernelConfig, fit
from hfm.parameters import ParameterSpace, ParameterVector
from hfm.solver import SnapshotMatrix
from pipeline.seeds import derive_rng, derive_seed
from reduce.projection import LabeledDataset, mean_test_error, reconstruction_error
from reduce.svd_update import ReducedBasis, direct_truncated_basis, update_with_snapshot
from uq.sampling import sample_feasible
from utils.errors import ConfigurationError, NumericalFailure

logger = logging.getLogger(__name__)

MAX_DESIGN_REDRAWS = 100
# Label spreads below this are round-off, not signal
TARGET_STD_FLOOR = 1e-12

HfmCallback = Callable[[ParameterVector], Union[SnapshotMatrix, np.ndarray]]
Feasibility = Optional[Callable[[np.ndarray], bool]]


class BoConfigError(ConfigurationError):
    pass


class HfmCallbackError(NumericalFailure):
    """Raised when the HFM fails for a requested parameter vector."""

    def __init__(self, theta: ParameterVector, cause: BaseException):
        self.theta = theta
        super().__init__(f"HFM failed for θ={theta}: {cause}")


class MaxIterationsWarning(UserWarning):
    """The loop stopped on the iteration guard before reaching the tolerance."""
    pass


@dataclass(frozen=True)
class BoRunConfig:
    """
    Inputs of the adaptive sampling loop.

    max_iterations caps the total number of training parameters.
    """
    n_initial: int = 4
    n_test: int = 10
    eps_svd: float = 7e-4
    eps_tol: float = 9e-4
    max_iterations: int = 100
    batches_per_solution: int = 4
    kernel: KernelConfig = field(default_factory=lambda: KernelConfig(kind='rbf', noise=1e-8))
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    seed: int = 0
    record_wall_time: bool = False

    def __post_init__(self):
        if self.n_initial < 2:
            raise BoConfigError(f"n_initial must be >= 2 for the GP fit, got {self.n_initial}")
        if self.n_test < 1:
            raise BoConfigError(f"n_test must be >= 1, got {self.n_test}")
        if not 0.0 < self.eps_svd < 1.0:
            raise BoConfigError(f"eps_svd must be in (0, 1), got {self.eps_svd}")
        if not self.eps_tol > 0:
            raise BoConfigError(f"eps_tol must be > 0, got {self.eps_tol}")
        if self.max_iterations < self.n_initial:
            raise BoConfigError(
                f"max_iterations ({self.max_iterations}) must be >= n_initial ({self.n_initial})"
            )
        if self.batches_per_solution < 1:
            raise BoConfigError("batches_per_solution must be >= 1")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    theta: ParameterVector
    test_error: float
    rank: int
    n_training: int
    seconds: float = math.nan
    max_test_error: float = math.nan


@dataclass
class BoTrace:
    """Per-iteration records; iteration 0 rows are the initial design."""
    records: List[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def iterations(self) -> int:
        return max((r.iteration for r in self.records), default=0)

    def test_errors(self) -> List[float]:
        """Test error after each iteration (initial design counts once)."""
        by_iteration = {}
        for record in self.records:
            by_iteration[record.iteration] = record.test_error
        return [by_iteration[i] for i in sorted(by_iteration)]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for r in self.records:
            row = {'iteration': r.iteration, 'n_training': r.n_training}
            row.update(r.theta.as_dict())
            row.update({'test_error': r.test_error, 'max_test_error': r.max_test_error,
                        'rank': r.rank, 'seconds': r.seconds})
            rows.append(row)
        return pd.DataFrame(rows)


@dataclass
class BoResult:
    training_params: List[ParameterVector]
    training_snapshots: List[np.ndarray]
    basis: ReducedBasis
    dataset: LabeledDataset
    trace: BoTrace
    test_params: List[ParameterVector]
    test_snapshots: List[np.ndarray]
    test_error: float
    converged: bool


@dataclass
class LhsResult:
    training_params: List[ParameterVector]
    training_snapshots: List[np.ndarray]
    basis: ReducedBasis
    test_error: float


def evaluate_hfm(hfm: HfmCallback, theta: ParameterVector) -> np.ndarray:
    """Run the callback and return the snapshot values; failures name θ."""
    try:
        result = hfm(theta)
    except Exception as e:
        raise HfmCallbackError(theta, e) from e
    values = result.values if isinstance(result, SnapshotMatrix) else np.asarray(result, float)
    if values.ndim != 2 or not np.all(np.isfinite(values)):
        raise HfmCallbackError(theta, NumericalFailure("snapshot is not a finite 2D array"))
    return values


def initial_design(space: ParameterSpace, count: int, seed: int,
                   feasible: Feasibility = None) -> np.ndarray:
    """LHS design; redrawn with the next derived seed until every row is feasible."""
    for attempt in range(MAX_DESIGN_REDRAWS):
        design = lhs_design(space, count, derive_rng(seed, 'bo.initial', attempt))
        if feasible is None or all(feasible(row) for row in design):
            return design
        logger.debug(f"Initial design attempt {attempt} had infeasible rows, redrawing")
    raise BoConfigError(f"No feasible {count}-point LHS design after {MAX_DESIGN_REDRAWS} draws")


def draw_test_set(space: ParameterSpace, n_test: int, seed: int,
                  feasible: Feasibility = None) -> List[ParameterVector]:
    return space.vectors(sample_feasible(space, n_test, derive_rng(seed, 'bo.test'), feasible))


def _basis_matrix(basis: ReducedBasis, n_rows: int) -> np.ndarray:
    return basis.matrix(n_rows)


def _test_errors(tests: Sequence[np.ndarray], U: np.ndarray) -> Tuple[float, float]:
    """Mean and maximum reconstruction error over the test snapshots."""
    mean = mean_test_error(tests, U)
    return mean, max(reconstruction_error(S, U) for S in tests)


def _standardized_targets(errors: Sequence[float]) -> np.ndarray:
    y = np.asarray(errors, dtype=np.float64)
    std = y.std()
    return (y - y.mean()) / (std if std > TARGET_STD_FLOOR else 1.0)


def run_bo(config: BoRunConfig, space: ParameterSpace, hfm: HfmCallback,
           feasible: Feasibility = None,
           test_params: Optional[List[ParameterVector]] = None) -> BoResult:
    """
    Run the adaptive sampling loop.

    Args:
        config: Loop settings
        space: Parameter box searched by the LHS designs
        hfm: Callback mapping θ to its snapshot matrix
        feasible: Optional row predicate applied to every design and pool
        test_params: Fixed test set; drawn from the Gaussian model when None

    Returns:
        BoResult with the training set, final basis, labels and trace

    Raises:
        HfmCallbackError: If the HFM fails for any requested θ
    """
    clock = time.perf_counter
    started = clock()

    def elapsed() -> float:
        return clock() - started if config.record_wall_time else math.nan

    design = initial_design(space, config.n_initial, config.seed, feasible)
    if test_params is None:
        test_params = draw_test_set(space, config.n_test, config.seed, feasible)

    training_params = space.vectors(design)
    training = [evaluate_hfm(hfm, theta) for theta in training_params]
    tests = [evaluate_hfm(hfm, theta) for theta in test_params]
    n_rows = training[0].shape[0]

    basis = ReducedBasis.empty(config.eps_svd)
    for S in training:
        basis = update_with_snapshot(basis, S, config.batches_per_solution)
    U = _basis_matrix(basis, n_rows)

    dataset = LabeledDataset()
    for theta, S in zip(training_params, training):
        dataset.add(theta, reconstruction_error(S, U))
    test_error, max_error = _test_errors(tests, U)

    trace = BoTrace()
    for theta in training_params:
        trace.append(TraceRecord(0, theta, test_error, basis.rank, len(training), elapsed(),
                                 max_error))
    logger.info(f"Initial design of {len(training)} points: test error {test_error:.3e}, "
                f"rank {basis.rank}")

    iteration = 0
    while test_error >= config.eps_tol and len(training) < config.max_iterations:
        iteration += 1
        targets = _standardized_targets(dataset.errors)
        model = fit(dataset.inputs(), targets, config.kernel,
                    seed=int(derive_rng(config.seed, 'bo.gpr', iteration).integers(2 ** 31)))
        theta = propose_next(model, config.acquisition, space, float(targets.max()),
                             derive_rng(config.seed, 'bo.pool', iteration), feasible)

        S = evaluate_hfm(hfm, theta)
        training_params.append(theta)
        training.append(S)
        basis = update_with_snapshot(basis, S, config.batches_per_solution)
        U = _basis_matrix(basis, n_rows)

        dataset.thetas.append(theta)
        dataset.relabel(training, U)
        test_error, max_error = _test_errors(tests, U)

        trace.append(TraceRecord(iteration, theta, test_error, basis.rank, len(training), elapsed(),
                                 max_error))
        logger.info(f"Iteration {iteration}: θ={theta} test error {test_error:.3e} rank {basis.rank}")

    converged = test_error < config.eps_tol
    if not converged:
        message = (f"Stopped at {len(training)} training parameters with test error "
                   f"{test_error:.3e} >= tolerance {config.eps_tol:.1e}")
        logger.warning(message)
        warnings.warn(message, MaxIterationsWarning)

    return BoResult(
        training_params=training_params,
        training_snapshots=training,
        basis=basis,
        dataset=dataset,
        trace=trace,
        test_params=list(test_params),
        test_snapshots=tests,
        test_error=test_error,
        converged=converged,
    )


def run_lhs_baseline(space: ParameterSpace, count: int, hfm: HfmCallback, eps_svd: float,
                     test_snapshots: Sequence[np.ndarray], seed: int,
                     feasible: Feasibility = None) -> LhsResult:
    """
    One-shot LHS training set with a single truncated SVD of all snapshots.

    Args:
        space: Parameter box
        count: Number of training parameters
        hfm: HFM callback
        eps_svd: Truncation tolerance
        test_snapshots: Test matrices shared with the adaptive run
        seed: Root seed (the design uses label 'lhs.design')
        feasible: Optional row predicate
    """
    design = None
    for attempt in range(MAX_DESIGN_REDRAWS):
        candidate = lhs_design(space, count, derive_rng(seed, 'lhs.design', attempt))
        if feasible is None or all(feasible(row) for row in candidate):
            design = candidate
            break
    if design is None:
        raise BoConfigError(f"No feasible {count}-point LHS design after {MAX_DESIGN_REDRAWS} draws")

    params = space.vectors(design)
    snapshots = [evaluate_hfm(hfm, theta) for theta in params]
    basis = direct_truncated_basis(np.hstack(snapshots), eps_svd)
    U = _basis_matrix(basis, snapshots[0].shape[0])
    test_error = mean_test_error(list(test_snapshots), U)
    logger.info(f"LHS baseline with {count} points: test error {test_error:.3e}, rank {basis.rank}")
    return LhsResult(params, snapshots, basis, test_error)


def compare_sampling(test_params: Sequence[ParameterVector], test_snapshots: Sequence[np.ndarray],
                     bo_basis: ReducedBasis, lhs_basis: ReducedBasis) -> pd.DataFrame:
    """Per-test-parameter reconstruction errors of both training strategies."""
    n_rows = test_snapshots[0].shape[0]
    U_bo = _basis_matrix(bo_basis, n_rows)
    U_lhs = _basis_matrix(lhs_basis, n_rows)
    rows = []
    for index, (theta, S) in enumerate(zip(test_params, test_snapshots)):
        row = {'test_index': index}
        row.update(theta.as_dict())
        row['bo_error'] = reconstruction_error(S, U_bo)
        row['lhs_error'] = reconstruction_error(S, U_lhs)
        rows.append(row)
    return pd.DataFrame(rows)


# --- setup and trial comparison ----------------------------------------------

# Errors closer than this fraction of eps_tol count as ties
TIE_FRACTION = 1e-3


@dataclass(frozen=True)
class SamplingSetup:
    """One kernel/acquisition pairing of the adaptive loop, named e.g. 'EI-rbf'."""
    kernel: KernelConfig
    acquisition: AcquisitionConfig

    @property
    def name(self) -> str:
        return f"{self.acquisition.kind}-{self.kernel.kind}"

    @classmethod
    def parse(cls, label: str, base: BoRunConfig) -> 'SamplingSetup':
        """
        'EI-rbf', 'PI-matern15', ... on top of the base kernel and acquisition.

        Raises:
            BoConfigError: If the label is not '<acquisition>-<kernel>'
        """
        parts = str(label).split('-')
        if len(parts) != 2:
            raise BoConfigError(f"Setup '{label}' must look like 'EI-rbf'")
        try:
            return cls(kernel=replace(base.kernel, kind=parts[1].lower()),
                       acquisition=replace(base.acquisition, kind=parts[0]))
        except ConfigurationError as e:
            raise BoConfigError(f"Setup '{label}': {e}") from e


@dataclass
class ComparisonResult:
    """
    Outcome of run_trials.

    trials has one row per (setup, trial); evolution has the per-iteration
    mean and max test errors of every BO run.
    """
    trials: pd.DataFrame
    evolution: pd.DataFrame

    def summary(self, min_win_fraction: float = 0.7) -> pd.DataFrame:
        return summarize_trials(self.trials, min_win_fraction)


def _with_known_snapshots(hfm: HfmCallback, params: Sequence[ParameterVector],
                          snapshots: Sequence[np.ndarray]) -> HfmCallback:
    known: Dict[Tuple[float, ...], np.ndarray] = {p.values: S for p, S in zip(params, snapshots)}

    def run(theta: ParameterVector):
        hit = known.get(theta.values)
        return hit if hit is not None else hfm(theta)

    return run


def lhs_budget_to_tolerance(space: ParameterSpace, hfm: HfmCallback, eps_svd: float,
                            eps_tol: float, test_snapshots: Sequence[np.ndarray], seed: int,
                            low: int, high: int, feasible: Feasibility = None) -> Optional[int]:
    """
    Smallest LHS budget in [low, high] whose basis meets eps_tol on the test set.

    Bisects on the budget, so it assumes the LHS test error falls as the
    budget grows. Returns None when even `high` points miss the tolerance.
    """
    if not 1 <= low <= high:
        raise BoConfigError(f"Budget range must satisfy 1 <= low <= high, got [{low}, {high}]")

    def meets(count: int) -> bool:
        outcome = run_lhs_baseline(space, count, hfm, eps_svd, test_snapshots, seed, feasible)
        return outcome.test_error < eps_tol

    if not meets(high):
        return None
    if meets(low):
        return low
    failing, passing = low, high
    while passing - failing > 1:
        middle = (failing + passing) // 2
        if meets(middle):
            passing = middle
        else:
            failing = middle
    return passing


def run_trials(config: BoRunConfig, space: ParameterSpace, hfm: HfmCallback,
               setups: Sequence[SamplingSetup], n_trials: int,
               feasible: Feasibility = None, search_lhs_budget: bool = True) -> ComparisonResult:
    """
    Compare BO setups against LHS over seeded trials.

    Each trial derives its own seed from config.seed and draws one test set
    shared by every setup and by LHS, so within a trial the setups also
    start from the same initial design. For every setup the BO run is
    matched by an LHS design of the same size. With search_lhs_budget the
    smallest LHS budget reaching eps_tol is searched once per trial.

    Args:
        config: Base loop settings; kernel and acquisition come from each setup
        space: Parameter box
        hfm: HFM callback
        setups: Kernel/acquisition pairings to run
        n_trials: Number of seeded trials
        feasible: Optional row predicate
        search_lhs_budget: Whether to look for the LHS budget reaching eps_tol

    Returns:
        ComparisonResult with per-trial rows and BO error evolution
    """
    if n_trials < 1:
        raise BoConfigError(f"n_trials must be >= 1, got {n_trials}")
    if not setups:
        raise BoConfigError("At least one sampling setup is required")

    rows: List[Dict[str, object]] = []
    curves: List[pd.DataFrame] = []
    for trial in range(n_trials):
        seed = derive_seed(config.seed, f'compare.trial.{trial}')
        test_params = draw_test_set(space, config.n_test, seed, feasible)
        test_snapshots = [evaluate_hfm(hfm, theta) for theta in test_params]
        trial_hfm = _with_known_snapshots(hfm, test_params, test_snapshots)

        lhs_budget = math.inf
        if search_lhs_budget:
            found = lhs_budget_to_tolerance(space, trial_hfm, config.eps_svd, config.eps_tol,
                                            test_snapshots, seed, config.n_initial,
                                            config.max_iterations, feasible)
            lhs_budget = math.inf if found is None else float(found)

        for setup in setups:
            run_config = replace(config, kernel=setup.kernel, acquisition=setup.acquisition,
                                 seed=seed)
            with warnings.catch_warnings():
                warnings.simplefilter('ignore', MaxIterationsWarning)
                bo = run_bo(run_config, space, trial_hfm, feasible, list(test_params))
            budget = len(bo.training_params)
            lhs = run_lhs_baseline(space, budget, trial_hfm, config.eps_svd, test_snapshots,
                                   seed, feasible)
            rows.append({
                'setup': setup.name,
                'trial': trial,
                'seed': seed,
                'bo_evaluations': budget,
                'bo_converged': bo.converged,
                'bo_evaluations_to_tol': float(budget) if bo.converged else math.inf,
                'lhs_evaluations_to_tol': lhs_budget,
                'bo_test_error': bo.test_error,
                'lhs_test_error': lhs.test_error,
                'bo_no_worse': bo.test_error <= lhs.test_error + TIE_FRACTION * config.eps_tol,
            })
            curve = (bo.trace.to_frame()
                     .groupby('iteration', as_index=False)
                     .agg(n_training=('n_training', 'max'), test_error=('test_error', 'last'),
                          max_test_error=('max_test_error', 'last')))
            curve.insert(0, 'trial', trial)
            curve.insert(0, 'setup', setup.name)
            curves.append(curve)
            logger.info(f"Trial {trial} {setup.name}: BO {budget} points, error "
                        f"{bo.test_error:.3e} vs LHS {lhs.test_error:.3e}")

    return ComparisonResult(trials=pd.DataFrame(rows),
                            evolution=pd.concat(curves, ignore_index=True))


def summarize_trials(trials: pd.DataFrame, min_win_fraction: float = 0.7) -> pd.DataFrame:
    """
    Per-setup medians, error sums and win counts over the trials.

    A setup meets the comparison when its median evaluations to reach the
    tolerance do not exceed the LHS median and BO is no worse than LHS at
    matched budget in at least min_win_fraction of the trials.
    """
    if not 0.0 < min_win_fraction <= 1.0:
        raise BoConfigError(f"min_win_fraction must be in (0, 1], got {min_win_fraction}")
    rows = []
    for name, group in trials.groupby('setup', sort=False):
        n = len(group)
        wins = int(group['bo_no_worse'].sum())
        median_bo = float(np.median(group['bo_evaluations_to_tol'].to_numpy(dtype=float)))
        median_lhs = float(np.median(group['lhs_evaluations_to_tol'].to_numpy(dtype=float)))
        rows.append({
            'setup': name,
            'trials': n,
            'median_bo_evaluations_to_tol': median_bo,
            'median_lhs_evaluations_to_tol': median_lhs,
            'bo_error_sum': float(group['bo_test_error'].sum()),
            'lhs_error_sum': float(group['lhs_test_error'].sum()),
            'bo_no_worse_trials': wins,
            'meets_comparison': bool(median_bo <= median_lhs
                                     and wins >= math.ceil(min_win_fraction * n - 1e-9)),
        })
    return pd.DataFrame(rows)
