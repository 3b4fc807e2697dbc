# reports/fig3_pt_gain.py

"""
Balanced gain/loss dynamics three ways: the ideal PT Hamiltonian, the effective
feedback Hamiltonian and the three-level Lambda system, all under no-jump evolution
from (|0><0| + |1><1|)/2. The ideal curve is also given in closed form through
exp(-iHt). One table per (Omega_a, gamma_a) panel plus a summary.
"""

import string
from typing import List, Optional

import numpy as np

from ptgain.errors import ConfigError
from ptgain.experiment import CurveTable, ExperimentConfig, write_tables
from ptgain.lindblad import EvolutionResult, NonHermitianModel, integrate_nonhermitian, max_abs_difference
from ptgain.logs import log_info
from ptgain.pt_models import LambdaParams, balanced_models, exact_nonhermitian_state, gamma_eff, lambda_validity
from ptgain.quantum_core import SIGMA_X, DensityMatrix


def panel_label(index: int) -> str:
    return string.ascii_lowercase[index] if index < 26 else str(index)


def _evolve(H, rho0, config: ExperimentConfig) -> EvolutionResult:
    return integrate_nonhermitian(NonHermitianModel(H), rho0, config.dt, config.T, config.record_every)


def _exact_populations(H, rho0, times) -> np.ndarray:
    """Renormalized populations from exp(-iHt) at each recorded time."""
    states = np.array([exact_nonhermitian_state(H, rho0, t) for t in times])
    diag = np.real(np.diagonal(states, axis1=1, axis2=2))
    return diag / diag.sum(axis=1)[:, None]

# --------------------------- Panel Processing ---------------------------

def process_panel(config: ExperimentConfig, index: int, omega_a: float, gamma_a: float) -> tuple:
    """Returns the curve table and the summary row of one panel."""
    label = panel_label(index)
    if omega_a <= 0:
        raise ConfigError(f"panel ({label}) needs omega_a > 0 to engineer gain, got {omega_a}", 'lambda_pairs')
    p = LambdaParams(omega_a, config.delta_a, gamma_a, config.gamma_10)
    H_sys = config.omega_sys * SIGMA_X
    G, H_ideal, H_eff, H_orig = balanced_models(p, H_sys)
    validity = lambda_validity(p)
    log_info(
        f"Processing panel ({label}): omega_a={omega_a:g}, gamma_a={gamma_a:g}, gamma_eff={gamma_eff(p):.6g}, "
        f"G={G:.6g}, validity={validity:.3g}"
    )

    ideal = _evolve(H_ideal, DensityMatrix.from_diagonal([0.5, 0.5]), config)
    effective = _evolve(H_eff, DensityMatrix.from_diagonal([0.5, 0.5]), config)
    original = _evolve(H_orig, DensityMatrix.from_diagonal([0.5, 0.5, 0.0]), config)

    P_ideal = ideal.populations()
    P_eff = effective.populations()
    P_orig = original.populations()
    P_exact = _exact_populations(H_ideal, DensityMatrix.from_diagonal([0.5, 0.5]), ideal.times)
    table = CurveTable.from_columns(f"fig3_panel-{label}", {
        't': ideal.times,
        'P0_ideal': P_ideal[:, 0],
        'P1_ideal': P_ideal[:, 1],
        'P1_ideal_exact': P_exact[:, 1],
        'P0_eff': P_eff[:, 0],
        'P1_eff': P_eff[:, 1],
        'P0_orig': P_orig[:, 0],
        'P1_orig': P_orig[:, 1],
        'Pa_orig': P_orig[:, 2],
        'trace_ideal': ideal.traces,
        'trace_eff': effective.traces,
        'trace_orig': original.traces,
    })
    summary = {
        'panel': label,
        'omega_a': omega_a,
        'gamma_a': gamma_a,
        'omega_over_gamma': omega_a / gamma_a,
        'gamma_eff': gamma_eff(p),
        'G': G,
        'validity': validity,
        'linf_orig_eff': max_abs_difference(P_orig[:, 1], P_eff[:, 1]),
        'linf_eff_ideal': max_abs_difference(P_eff[:, 1], P_ideal[:, 1]),
        'linf_ideal_exact': max_abs_difference(P_ideal[:, 1], P_exact[:, 1]),
    }
    log_info(f"Panel ({label}): L-inf(P1_orig - P1_eff) = {summary['linf_orig_eff']:.3e}")
    return table, summary


def run_fig3(config: ExperimentConfig) -> List[CurveTable]:
    tables, rows = [], []
    for index, (omega_a, gamma_a) in enumerate(config.panels()):
        table, summary = process_panel(config, index, omega_a, gamma_a)
        tables.append(table)
        rows.append(summary)
    columns = {key: [row[key] for row in rows] for key in rows[0]}
    return tables + [CurveTable.from_columns("fig3_summary", columns)]


def run(config: ExperimentConfig, out_dir: Optional[str] = None) -> List[str]:
    tables = run_fig3(config)
    plots = {t.name: ['P1_ideal', 'P1_eff', 'P1_orig'] for t in tables[:-1]}
    return write_tables(tables, out_dir or config.output_dir, config.svg, plots)


def discrepancies(tables: List[CurveTable]) -> np.ndarray:
    """L-inf distance between the three-level and effective P1 curves, per panel."""
    return np.array([max_abs_difference(t.column('P1_orig'), t.column('P1_eff')) for t in tables])
