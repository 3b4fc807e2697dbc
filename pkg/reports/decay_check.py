# reports/decay_check.py

"""Spontaneous decay of |1> under RK4 against exp(-gamma_1 t), at dt and 2 dt."""

from typing import List, Optional

import numpy as np

from ptgain.errors import ConfigError
from ptgain.experiment import CurveTable, ExperimentConfig, write_tables
from ptgain.lindblad import LindbladModel, integrate_master
from ptgain.logs import log_info
from ptgain.quantum_core import LOWER, DensityMatrix


def decay_error(gamma_1: float, dt: float, T: float) -> tuple:
    """(times, numeric P1, exact P1) for decay from |1>."""
    model = LindbladModel(np.zeros((2, 2)), [(gamma_1, LOWER)])
    result = integrate_master(model, DensityMatrix.pure(2, 1), dt, T)
    P1 = result.populations(renormalized=False)[:, 1]
    return result.times, P1, np.exp(-gamma_1 * result.times)


def run_decay_check(config: ExperimentConfig) -> List[CurveTable]:
    if config.T < 2 * config.dt:
        raise ConfigError(f"T must cover at least two steps of 2*dt, got T={config.T:g}, dt={config.dt:g}", 'T')
    t, numeric, exact = decay_error(config.gamma_1, config.dt, config.T)
    curve = CurveTable.from_columns("decay_check", {
        't': t,
        'P1_numeric': numeric,
        'P1_exact': exact,
        'abs_error': np.abs(numeric - exact),
    })

    _, coarse, coarse_exact = decay_error(config.gamma_1, 2 * config.dt, config.T)
    errors = [float(np.max(curve.column('abs_error'))), float(np.max(np.abs(coarse - coarse_exact)))]
    # round-off floor at fine steps
    ratio = errors[1] / errors[0] if errors[0] > 0 else 0.0
    log_info(f"Decay check: max error {errors[0]:.3e} at dt={config.dt:g}, {errors[1]:.3e} at 2dt, ratio {ratio:.2f}")
    summary = CurveTable.from_columns("decay_check_summary", {
        'dt': [config.dt, 2 * config.dt],
        'max_error': errors,
        'error_ratio': [ratio, ratio],
    })
    return [curve, summary]


def run(config: ExperimentConfig, out_dir: Optional[str] = None) -> List[str]:
    tables = run_decay_check(config)
    plots = {'decay_check': ['P1_numeric', 'P1_exact']}
    return write_tables(tables, out_dir or config.output_dir, config.svg, plots)
