#!/usr/bin/env python3
"""
Command-line front end for the ROM toolkit.

Each command loads and validates the pipeline config, runs one stage and
exits with the stage's exit code (0 ok, 2 config, 3 numerical, 4 I/O).

Examples:
  python cli.py --config config/smoke.yml simulate --theta 68.9,0.33,2700,25
  python cli.py sample --mode bo
  python cli.py sample --mode lhs --count 20
  python cli.py train
  python cli.py predict --truth output/sample_bo/test
  python cli.py uq --jobs 4
  python cli.py sobol
  python cli.py di --node 2080
  python cli.py report
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import click
import numpy as np

from pipeline import stages
from pipeline.config import PipelineConfig, load_config
from utils.errors import RomToolkitError, exit_code_for
from utils.logging_setup import configure_logging

logger = logging.getLogger('cli')


def _finish(result: Dict[str, Any]) -> None:
    """Print a one-line summary and exit with the stage code."""
    duration = result.get('duration_seconds', 0.0)
    if result['status'] == 'completed':
        click.echo(f"{result['stage']}: completed in {duration:.1f}s, "
                   f"{len(result['artifacts'])} artifacts under {result['output_dir']}")
    else:
        click.echo(f"{result['stage']}: failed ({result['error_message']})", err=True)
    sys.exit(result['exit_code'])


def _theta_rows(config: PipelineConfig, theta: Optional[str],
                theta_file: Optional[Path]) -> Optional[np.ndarray]:
    if theta and theta_file:
        raise click.UsageError("Use either --theta or --theta-file, not both")
    if theta_file:
        return stages.read_theta_file(theta_file, config.space)
    if theta:
        try:
            return np.array([[float(v) for v in theta.split(',')]])
        except ValueError:
            raise click.BadParameter(f"Expected comma-separated numbers, got '{theta}'",
                                     param_hint='--theta') from None
    return None


@click.group()
@click.option('--config', 'config_path', type=click.Path(path_type=Path), default=None,
              help='Pipeline YAML (default: $ROM_CONFIG or ./config/desk.yml)')
@click.option('--seed', type=int, default=None, help='Root seed override')
@click.option('--out', 'output_dir', type=click.Path(path_type=Path), default=None,
              help='Output directory (default: $ROM_OUTPUT_DIR or the config value)')
@click.option('--jobs', type=click.IntRange(min=1), default=1, show_default=True,
              help='Worker threads for surrogate evaluations')
@click.option('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR ($ROM_LOG_LEVEL)')
@click.pass_context
def cli(ctx, config_path, seed, output_dir, jobs, log_level):
    """BO-ML-ROM toolkit: sampling, ROM training, UQ and sensitivity analysis."""
    configure_logging(log_level)
    try:
        config = load_config(config_path, seed=seed, output_dir=output_dir)
    except RomToolkitError as e:
        click.echo(f"Config error: {e}", err=True)
        sys.exit(exit_code_for(e))
    ctx.obj = {'config': config, 'jobs': jobs}


@cli.command()
@click.option('--theta', default=None, help='One parameter vector, comma separated')
@click.option('--theta-file', type=click.Path(path_type=Path), default=None,
              help='CSV with one column per feature')
@click.pass_obj
def simulate(obj, theta, theta_file):
    """Run the high-fidelity model for each θ."""
    config = obj['config']
    try:
        rows = _theta_rows(config, theta, theta_file)
    except RomToolkitError as e:
        click.echo(str(e), err=True)
        sys.exit(exit_code_for(e))
    if rows is None:
        rows = config.space.means[None, :]
        logger.info("No θ given; simulating the nominal parameters")
    _finish(stages.run_simulate(config, rows))


@cli.command()
@click.option('--mode', type=click.Choice(stages.SAMPLE_MODES), default='bo', show_default=True)
@click.option('--count', type=click.IntRange(min=1), default=None,
              help='LHS budget (default: sampling.lhs_count or the BO training-set size)')
@click.option('--trials', type=click.IntRange(min=1), default=None,
              help='Seeded trials per setup in compare mode (default: sampling.trials)')
@click.pass_obj
def sample(obj, mode, count, trials):
    """Build a training set by Bayesian optimization or Latin hypercube, or compare setups."""
    _finish(stages.run_sample(obj['config'], mode, count, trials))


@cli.command()
@click.option('--set', 'set_dir', type=click.Path(path_type=Path), default=None,
              help='Training-set directory (default: <out>/sample_bo)')
@click.pass_obj
def train(obj, set_dir):
    """Fit the autoencoder, FFNN and LSTM and write the ROM bundle."""
    _finish(stages.run_train(obj['config'], set_dir))


@cli.command()
@click.option('--bundle', 'bundle_dir', type=click.Path(path_type=Path), default=None)
@click.option('--theta', default=None, help='One parameter vector, comma separated')
@click.option('--theta-file', type=click.Path(path_type=Path), default=None)
@click.option('--truth', 'truth_dir', type=click.Path(path_type=Path), default=None,
              help='Snapshot directory to score predictions against')
@click.pass_obj
def predict(obj, bundle_dir, theta, theta_file, truth_dir):
    """Predict full fields with the ROM; with --truth also write nRMSE."""
    config = obj['config']
    try:
        rows = _theta_rows(config, theta, theta_file)
    except RomToolkitError as e:
        click.echo(str(e), err=True)
        sys.exit(exit_code_for(e))
    _finish(stages.run_predict(config, rows, bundle_dir, truth_dir))


@cli.command()
@click.option('--bundle', 'bundle_dir', type=click.Path(path_type=Path), default=None)
@click.pass_obj
def uq(obj, bundle_dir):
    """Monte Carlo mean and std of the predicted fields."""
    _finish(stages.run_uq(obj['config'], bundle_dir, obj['jobs']))


@cli.command()
@click.option('--bundle', 'bundle_dir', type=click.Path(path_type=Path), default=None)
@click.pass_obj
def sobol(obj, bundle_dir):
    """First-order and total Sobol indices at the sensor node."""
    _finish(stages.run_sobol(obj['config'], bundle_dir, obj['jobs']))


@cli.command()
@click.option('--bundle', 'bundle_dir', type=click.Path(path_type=Path), default=None)
@click.option('--node', type=click.IntRange(min=0), default=None,
              help='Node index (default: uq.node or the source node)')
@click.pass_obj
def di(obj, bundle_dir, node):
    """Damage indices of the UQ draws at one node."""
    _finish(stages.run_di(obj['config'], bundle_dir, node, obj['jobs']))


@cli.command()
@click.pass_obj
def report(obj):
    """Rebuild the plot-data tables from the stage outputs on disk."""
    _finish(stages.run_report(obj['config']))


if __name__ == '__main__':
    cli()
