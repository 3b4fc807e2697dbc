# reports/__init__.py

from reports import decay_check, fig2_feedback_ensemble, fig3_pt_gain, spectrum_sweep

REPORTS = {
    'fig2': fig2_feedback_ensemble,
    'fig3': fig3_pt_gain,
    'spectrum': spectrum_sweep,
    'decay-check': decay_check,
}
