"""
Plot-data tables: the data behind each figure, one CSV per figure.

No plotting happens here. Each helper takes the long-format table a stage
already wrote and reduces it to the columns a plotting script needs.
"""

import logging
from pathlib import Path
from typing import Dict, Mapping, Sequence

import pandas as pd

from reports.tables import DEFAULT_FLOAT_FORMAT, ReportWriteError, write_csv
from storage.array_store import MetaValue

logger = logging.getLogger(__name__)


def _require(frame: pd.DataFrame, columns: Sequence[str], table: str) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ReportWriteError(f"{table} table lacks columns {missing}")


def node_band(fields: pd.DataFrame, node: int) -> pd.DataFrame:
    """
    Mean ± std series at one node from a (node, t_index, [time,] mean, std) table.

    Raises:
        ReportWriteError: If the node is absent
    """
    _require(fields, ('node', 't_index', 'mean', 'std'), 'UQ')
    band = fields[fields['node'] == node].sort_values('t_index').reset_index(drop=True)
    if band.empty:
        raise ReportWriteError(f"Node {node} not present in the UQ table")
    band['lower'] = band['mean'] - band['std']
    band['upper'] = band['mean'] + band['std']
    return band


def di_scatter(di: pd.DataFrame) -> pd.DataFrame:
    """DI against every feature; the sample index is dropped."""
    _require(di, ('sample', 'DI'), 'DI')
    return di.drop(columns=['sample']).reset_index(drop=True)


def sobol_bars(sobol: pd.DataFrame, t_indices: Sequence[int]) -> pd.DataFrame:
    """S and S_T per feature at the chosen time indices."""
    _require(sobol, ('feature', 't_index', 'S', 'S_T'), 'Sobol')
    present = set(sobol['t_index'])
    bad = [t for t in t_indices if t not in present]
    if bad:
        raise ReportWriteError(f"Time indices {bad} not present in the Sobol table")
    return sobol[sobol['t_index'].isin(list(t_indices))].reset_index(drop=True)


def bo_error_curve(trace: pd.DataFrame) -> pd.DataFrame:
    """Test error, rank and training count after each BO iteration."""
    _require(trace, ('iteration', 'n_training', 'rank', 'test_error'), 'trace')
    return (trace.groupby('iteration', as_index=False)
                 .agg(n_training=('n_training', 'max'), rank=('rank', 'last'),
                      test_error=('test_error', 'last')))


def cpr_evolution(trace: pd.DataFrame, n_times: int) -> pd.DataFrame:
    """Compression ratio rank / (n_training * N_t) after each BO iteration."""
    if n_times < 1:
        raise ReportWriteError(f"n_times must be >= 1, got {n_times}")
    curve = bo_error_curve(trace)
    curve['columns_seen'] = curve['n_training'] * n_times
    curve['cpr'] = curve['rank'] / curve['columns_seen']
    return curve[['iteration', 'n_training', 'columns_seen', 'rank', 'cpr']]


def setup_error_evolution(evolution: pd.DataFrame) -> pd.DataFrame:
    """
    Max test error per setup and iteration across trials.

    Trials that stopped early drop out of later iterations; the trials
    column says how many contributed to each row.
    """
    _require(evolution, ('setup', 'trial', 'iteration', 'test_error', 'max_test_error'),
             'evolution')
    return (evolution.groupby(['setup', 'iteration'], as_index=False, sort=False)
                     .agg(trials=('trial', 'nunique'),
                          median_max_error=('max_test_error', 'median'),
                          min_max_error=('max_test_error', 'min'),
                          max_max_error=('max_test_error', 'max'),
                          median_test_error=('test_error', 'median')))


def write_plot_data(directory: Path, tables: Mapping[str, pd.DataFrame],
                    meta: Mapping[str, MetaValue],
                    float_format: str = DEFAULT_FLOAT_FORMAT) -> Dict[str, Path]:
    """Write each table as <directory>/<name>.csv; returns name -> path."""
    directory = Path(directory)
    written = {}
    for name in sorted(tables):
        path = directory / f'{name}.csv'
        write_csv(path, tables[name], {**meta, 'figure': name}, float_format)
        written[name] = path
    logger.info(f"Wrote {len(written)} plot-data tables to {directory}")
    return written
