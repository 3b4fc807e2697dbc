# reports/fig2_feedback_ensemble.py

"""
Excited-state population under homodyne feedback: ensemble average of the feedback
SME against the unconditional feedback master equation, one table per (F, G).
"""

from typing import List, Optional

import numpy as np

from ptgain.experiment import CurveTable, ExperimentConfig, write_tables
from ptgain.feedback_sme import FeedbackConfig, ensemble_average, integrate_unconditional
from ptgain.logs import log_info, log_warning
from ptgain.quantum_core import LOWER, SIGMA_X, DensityMatrix

MAD_TOLERANCE = 0.05


def table_name(selector: str, G: float) -> str:
    return f"fig2_F-{selector}_G-{G:g}"

# --------------------------- Ensemble Processing ---------------------------

def process_pair(config: ExperimentConfig, selector: str, G: float) -> CurveTable:
    """Columns t, P1_sme_mean, P1_sme_stderr, P1_unconditional."""
    cfg = FeedbackConfig(config.gamma_1, LOWER, config.operator(selector), G, config.signal)
    H_sys = config.omega_sys * SIGMA_X
    rho0 = DensityMatrix.pure(2, 1)

    log_info(f"Processing F={selector}, G={G:g}: {config.N_traj} trajectories, dt={config.dt:g}, T={config.T:g}")
    ensemble = ensemble_average(
        cfg, H_sys, rho0, config.dt, config.T, config.N_traj, config.master_seed,
        record_every=config.record_every, chunk_size=config.chunk_size, workers=config.workers,
    )
    unconditional = integrate_unconditional(cfg, H_sys, rho0, config.dt, config.T, config.record_every)

    table = CurveTable.from_columns(table_name(selector, G), {
        't': ensemble.times,
        'P1_sme_mean': ensemble.population(1),
        'P1_sme_stderr': ensemble.population_stderr(1),
        'P1_unconditional': unconditional.populations()[:, 1],
    })
    mad = float(np.mean(np.abs(table.column('P1_sme_mean') - table.column('P1_unconditional'))))
    if mad > MAD_TOLERANCE:
        log_warning(f"F={selector}, G={G:g}: mean absolute deviation {mad:.4f} exceeds {MAD_TOLERANCE}")
    else:
        log_info(f"F={selector}, G={G:g}: mean absolute deviation {mad:.4f}")
    return table


def summarize(tables: List[CurveTable], pairs: List[tuple]) -> CurveTable:
    rows = {'F': [], 'G': [], 'mean_abs_deviation': [], 'max_abs_deviation': [], 'max_stderr': []}
    for table, (selector, G) in zip(tables, pairs):
        deviation = np.abs(table.column('P1_sme_mean') - table.column('P1_unconditional'))
        rows['F'].append(selector)
        rows['G'].append(G)
        rows['mean_abs_deviation'].append(float(np.mean(deviation)))
        rows['max_abs_deviation'].append(float(np.max(deviation)))
        rows['max_stderr'].append(float(np.max(table.column('P1_sme_stderr'))))
    return CurveTable.from_columns("fig2_summary", rows)


def run_fig2(config: ExperimentConfig) -> List[CurveTable]:
    """One curve table per (F, G) pair, followed by the summary table."""
    pairs = [(selector, G) for selector in config.F for G in config.G]
    tables = [process_pair(config, selector, G) for selector, G in pairs]
    return tables + [summarize(tables, pairs)]


def run(config: ExperimentConfig, out_dir: Optional[str] = None) -> List[str]:
    tables = run_fig2(config)
    plots = {t.name: ['P1_sme_mean', 'P1_unconditional'] for t in tables[:-1]}
    return write_tables(tables, out_dir or config.output_dir, config.svg, plots)
