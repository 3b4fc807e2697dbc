# reports/spectrum_sweep.py

from typing import List, Optional

import numpy as np

from ptgain.experiment import CurveTable, ExperimentConfig, write_tables
from ptgain.logs import log_info
from ptgain.pt_models import PTParams, PTPhase, pt_spectrum


def run_spectrum(config: ExperimentConfig) -> List[CurveTable]:
    """Eigenvalues of Omega sigma_x + i gamma sigma_z over Omega/gamma in [ratio_min, ratio_max]."""
    ratios = np.linspace(config.ratio_min, config.ratio_max, config.points)
    gamma = config.pt_gamma
    columns = {k: [] for k in ('ratio', 'omega_sys', 'gamma', 're_lambda_1', 'im_lambda_1',
                               're_lambda_2', 'im_lambda_2', 'phase')}
    for ratio in ratios:
        omega = float(ratio) * gamma
        spectrum = pt_spectrum(PTParams(omega, gamma))
        values = spectrum.eigenvalues
        columns['ratio'].append(float(ratio))
        columns['omega_sys'].append(omega)
        columns['gamma'].append(gamma)
        columns['re_lambda_1'].append(values[0].real)
        columns['im_lambda_1'].append(values[0].imag)
        columns['re_lambda_2'].append(values[1].real)
        columns['im_lambda_2'].append(values[1].imag)
        columns['phase'].append(spectrum.phase.value)
    n_ep = columns['phase'].count(PTPhase.EXCEPTIONAL_POINT.value)
    log_info(f"Spectrum sweep: {config.points} points, gamma={gamma:g}, {n_ep} at the exceptional point")
    return [CurveTable.from_columns("spectrum", columns)]


def run(config: ExperimentConfig, out_dir: Optional[str] = None) -> List[str]:
    tables = run_spectrum(config)
    plots = {'spectrum': ['re_lambda_1', 'im_lambda_1', 're_lambda_2', 'im_lambda_2']}
    return write_tables(tables, out_dir or config.output_dir, config.svg, plots)
