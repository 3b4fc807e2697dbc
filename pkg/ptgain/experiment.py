# ptgain/experiment.py

"""
Experiment configuration, curve tables and their CSV / SVG emitters.
"""

import copy
import os
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np
import pandas as pd
import yaml
from yaml.loader import SafeLoader

from ptgain.errors import ConfigError, OutputError
from ptgain.feedback_sme import DEFAULT_CHUNK, SIGNALS
from ptgain.logs import log_info
from ptgain.quantum_core import IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, Operator

EXPERIMENTS = ("fig2", "fig3", "spectrum", "decay-check")

F_SELECTORS: Dict[str, Operator] = {
    'sx': SIGMA_X,
    'sy': SIGMA_Y,
    'sz': SIGMA_Z,
    'id': IDENTITY,
    'raise-lower': SIGMA_X,
}

DEFAULT_LAMBDA_PAIRS = [[0.5, 2.5], [1.0, 10.0], [1.5, 22.5], [2.0, 40.0]]
# fig2 runs for this many lifetimes 1/gamma_1 unless T is given
FIG2_LIFETIMES = 5.0


class ConfigLoader(SafeLoader):
    """SafeLoader that also reads JSON exponent floats such as 1e-4."""


ConfigLoader.add_implicit_resolver(
    'tag:yaml.org,2002:float',
    re.compile(r'''^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
                |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                |[-+]?\.(?:inf|Inf|INF)
                |\.(?:nan|NaN|NAN))$''', re.X),
    list('-+0123456789.'),
)

# --------------------------- Defaults ---------------------------

COMMON_DEFAULTS: Dict[str, Any] = {
    'dt': 1e-3,
    'T': 1.0,
    'N_traj': 1000,
    'master_seed': 0,
    'gamma_1': 1.0,
    'gamma_10': 0.1,
    'omega_a': 0.5,
    'gamma_a': 2.5,
    'delta_a': 0.0,
    'omega_sys': 0.0,
    'G': [0.0, 0.3, 0.6, 1.0],
    'F': ['sx', 'sy', 'sz', 'id'],
    'output_dir': 'out',
    'record_every': 1,
    'chunk_size': DEFAULT_CHUNK,
    'workers': None,
    'signal': 'homodyne',
    'lambda_pairs': DEFAULT_LAMBDA_PAIRS,
    'ratio_min': 0.0,
    'ratio_max': 2.0,
    'points': 51,
    'pt_gamma': 0.5,
    'svg': False,
    'log_file': 'ptgain.log',
}

EXPERIMENT_DEFAULTS: Dict[str, Dict[str, Any]] = {
    'fig2': {'dt': 1e-4, 'T': FIG2_LIFETIMES, 'record_every': 100},
    'fig3': {'dt': 1e-3, 'T': 20.0, 'omega_sys': 0.1, 'record_every': 10},
    'spectrum': {},
    'decay-check': {'dt': 0.05, 'T': 1.0},
}

FLOAT_FIELDS = ('dt', 'T', 'gamma_1', 'gamma_10', 'omega_a', 'gamma_a', 'delta_a', 'omega_sys',
                'ratio_min', 'ratio_max', 'pt_gamma')
NON_NEGATIVE = ('T', 'gamma_1', 'gamma_10', 'omega_a', 'omega_sys', 'ratio_min')
POSITIVE_INT_FIELDS = ('N_traj', 'record_every', 'chunk_size')


@dataclass
class ExperimentConfig:
    experiment: str
    dt: float
    T: float
    N_traj: int
    master_seed: int
    gamma_1: float
    gamma_10: float
    omega_a: float
    gamma_a: float
    delta_a: float
    omega_sys: float
    G: List[float]
    F: List[str]
    output_dir: str
    record_every: int
    chunk_size: int
    workers: Optional[int]
    signal: str
    lambda_pairs: List[List[float]]
    ratio_min: float
    ratio_max: float
    points: int
    pt_gamma: float
    svg: bool
    log_file: str
    explicit: Tuple[str, ...] = field(default=(), repr=False)

    def panels(self) -> List[Tuple[float, float]]:
        """(Omega_a, gamma_a) pairs for the Lambda-system runs."""
        if 'lambda_pairs' not in self.explicit and ({'omega_a', 'gamma_a'} & set(self.explicit)):
            return [(self.omega_a, self.gamma_a)]
        return [(float(o), float(g)) for o, g in self.lambda_pairs]

    def operator(self, selector: str) -> Operator:
        return F_SELECTORS[selector]

    def with_seed(self, seed: int) -> "ExperimentConfig":
        updated = copy.deepcopy(self)
        updated.master_seed = _check_seed(seed, None)
        return updated

# --------------------------- Validation ---------------------------

def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_seed(value, line: Optional[int]) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < 2 ** 64:
        raise ConfigError(f"must be an unsigned 64-bit integer, got {value!r}", 'master_seed', line)
    return value


def _validate(values: Dict[str, Any], lines: Dict[str, int]) -> Dict[str, Any]:
    out = dict(values)
    for name in FLOAT_FIELDS:
        value = out[name]
        if not _is_number(value) or not np.isfinite(value):
            raise ConfigError(f"must be a finite number, got {value!r}", name, lines.get(name))
        out[name] = float(value)
    for name in NON_NEGATIVE:
        if out[name] < 0:
            raise ConfigError(f"must be >= 0, got {out[name]}", name, lines.get(name))
    if not out['dt'] > 0:
        raise ConfigError(f"must be > 0, got {out['dt']}", 'dt', lines.get('dt'))
    if not out['gamma_a'] > 0:
        raise ConfigError(f"must be > 0, got {out['gamma_a']}", 'gamma_a', lines.get('gamma_a'))
    if not out['pt_gamma'] > 0:
        raise ConfigError(f"must be > 0, got {out['pt_gamma']}", 'pt_gamma', lines.get('pt_gamma'))
    if not out['ratio_max'] > out['ratio_min']:
        raise ConfigError("must exceed ratio_min", 'ratio_max', lines.get('ratio_max'))

    for name in POSITIVE_INT_FIELDS + ('points',):
        value = out[name]
        minimum = 2 if name == 'points' else 1
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise ConfigError(f"must be an integer >= {minimum}, got {value!r}", name, lines.get(name))
    out['master_seed'] = _check_seed(out['master_seed'], lines.get('master_seed'))
    workers = out['workers']
    if workers is not None and (isinstance(workers, bool) or not isinstance(workers, int) or workers < 1):
        raise ConfigError(f"must be null or an integer >= 1, got {workers!r}", 'workers', lines.get('workers'))

    gains = out['G'] if isinstance(out['G'], list) else [out['G']]
    if not gains or not all(_is_number(g) and np.isfinite(g) for g in gains):
        raise ConfigError(f"must be a number or a non-empty list of numbers, got {out['G']!r}", 'G', lines.get('G'))
    out['G'] = [float(g) for g in gains]

    selectors = out['F'] if isinstance(out['F'], list) else [out['F']]
    if not selectors:
        raise ConfigError("must name at least one feedback operator", 'F', lines.get('F'))
    for s in selectors:
        if not isinstance(s, str) or s not in F_SELECTORS:
            raise ConfigError(f"unknown selector {s!r}, expected one of {sorted(F_SELECTORS)}", 'F', lines.get('F'))
    out['F'] = list(selectors)

    if out['signal'] not in SIGNALS:
        raise ConfigError(f"must be one of {list(SIGNALS)}, got {out['signal']!r}", 'signal', lines.get('signal'))
    if not isinstance(out['svg'], bool):
        raise ConfigError(f"must be true or false, got {out['svg']!r}", 'svg', lines.get('svg'))
    for name in ('output_dir', 'log_file'):
        if not isinstance(out[name], str) or not out[name]:
            raise ConfigError(f"must be a non-empty string, got {out[name]!r}", name, lines.get(name))

    pairs = out['lambda_pairs']
    if not isinstance(pairs, list) or not pairs:
        raise ConfigError("must be a non-empty list of [omega_a, gamma_a] pairs", 'lambda_pairs', lines.get('lambda_pairs'))
    for pair in pairs:
        if (not isinstance(pair, list) or len(pair) != 2 or not all(_is_number(v) for v in pair)
                or not pair[0] >= 0 or not pair[1] > 0):
            raise ConfigError(
                f"each pair needs omega_a >= 0 and gamma_a > 0, got {pair!r}", 'lambda_pairs', lines.get('lambda_pairs')
            )
    out['lambda_pairs'] = [[float(o), float(g)] for o, g in pairs]
    return out

# --------------------------- Loading ---------------------------

def default_config(experiment: str) -> ExperimentConfig:
    return build_config(experiment, {})


def build_config(experiment: str, document: Dict[str, Any], lines: Optional[Dict[str, int]] = None) -> ExperimentConfig:
    """Merges a parsed document over the experiment defaults and validates the result."""
    lines = lines or {}
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}, expected one of {list(EXPERIMENTS)}", 'experiment')
    declared = document.get('experiment', experiment)
    if declared != experiment:
        raise ConfigError(
            f"document is for {declared!r} but {experiment!r} was requested", 'experiment', lines.get('experiment')
        )
    unknown = [key for key in document if key != 'experiment' and key not in COMMON_DEFAULTS]
    if unknown:
        raise ConfigError("unknown key", str(unknown[0]), lines.get(unknown[0]))

    values = copy.deepcopy(COMMON_DEFAULTS)
    values.update(EXPERIMENT_DEFAULTS[experiment])
    values.update({k: v for k, v in document.items() if k != 'experiment'})
    checked = _validate(values, lines)
    if experiment == 'fig3' and checked['delta_a'] != 0.0:
        raise ConfigError("balanced-gain panels need a resonant drive, expected 0", 'delta_a', lines.get('delta_a'))
    if experiment == 'fig2' and 'T' not in document and checked['gamma_1'] > 0:
        checked['T'] = FIG2_LIFETIMES / checked['gamma_1']
    explicit = tuple(sorted(k for k in document if k != 'experiment'))
    return ExperimentConfig(experiment=experiment, explicit=explicit, **checked)


def _key_lines(text: str) -> Dict[str, int]:
    node = yaml.compose(text, Loader=ConfigLoader)
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {key.value: key.start_mark.line + 1 for key, _ in node.value if isinstance(key, yaml.ScalarNode)}


def load_config(path: str, experiment: str) -> ExperimentConfig:
    """Reads a JSON (or YAML) experiment document."""
    try:
        with open(path, encoding='utf-8') as file:
            text = file.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file '{path}': {e.strerror}") from e
    try:
        document = yaml.load(text, Loader=ConfigLoader)
        lines = _key_lines(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ConfigError(f"malformed document: {getattr(e, 'problem', e)}", None,
                          mark.line + 1 if mark is not None else None) from e
    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ConfigError("top level must be an object", None, 1)
    log_info(f"Loaded {experiment} config from {path}")
    return build_config(experiment, document, lines)

# --------------------------- Tables ---------------------------

@dataclass
class CurveTable:
    name: str
    frame: pd.DataFrame

    def __post_init__(self):
        numeric = self.frame.select_dtypes(include=[np.number])
        if not np.all(np.isfinite(numeric.to_numpy(dtype=float))):
            bad = [c for c in numeric.columns if not np.all(np.isfinite(numeric[c].to_numpy(dtype=float)))]
            raise ValueError(f"Table '{self.name}' has non-finite values in columns {bad}")

    @classmethod
    def from_columns(cls, name: str, columns: Dict[str, Sequence]) -> "CurveTable":
        lengths = {k: len(v) for k, v in columns.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"Table '{name}' has columns of unequal length: {lengths}")
        return cls(name, pd.DataFrame({k: np.asarray(v) for k, v in columns.items()}))

    @property
    def columns(self) -> List[str]:
        return list(self.frame.columns)

    def __len__(self) -> int:
        return len(self.frame)

    def column(self, name: str) -> np.ndarray:
        return self.frame[name].to_numpy()


def emit_csv(table: CurveTable, path: str) -> str:
    """UTF-8, comma-delimited, LF line endings, 17 significant digits."""
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        table.frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n', encoding='utf-8')
    except OSError as e:
        raise OutputError(f"Could not write CSV ({e.strerror})", path) from e
    log_info(f"Wrote {len(table)} rows of '{table.name}' to {path}")
    return path


def read_csv(path: str, name: Optional[str] = None) -> CurveTable:
    try:
        frame = pd.read_csv(path, float_precision='round_trip', encoding='utf-8')
    except OSError as e:
        raise OutputError(f"Could not read CSV ({e.strerror})", path) from e
    return CurveTable(name or os.path.splitext(os.path.basename(path))[0], frame)


def emit_svg(table: CurveTable, path: str, x: str = 't', columns: Optional[Sequence[str]] = None,
             ylabel: str = '') -> str:
    """Static line plot of the selected columns against `x`."""
    if columns is None:
        columns = [c for c in table.columns if c != x and pd.api.types.is_numeric_dtype(table.frame[c])]
    plt.rcParams['svg.hashsalt'] = 'ptgain'
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    try:
        for c in columns:
            ax.plot(table.column(x), table.column(c), label=c, linewidth=1.2)
        ax.set_xlabel(x)
        ax.set_ylabel(ylabel)
        ax.set_title(table.name)
        if columns:
            ax.legend(fontsize='small')
        fig.tight_layout()
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        fig.savefig(path, format='svg', metadata={'Date': None})
    except OSError as e:
        raise OutputError(f"Could not write SVG ({e.strerror})", path) from e
    finally:
        plt.close(fig)
    log_info(f"Wrote plot of '{table.name}' to {path}")
    return path


def write_tables(tables: Sequence[CurveTable], out_dir: str, svg: bool = False,
                 plot_columns: Optional[Dict[str, Sequence[str]]] = None) -> List[str]:
    """Writes <out_dir>/<name>.csv per table, plus an SVG for tables named in `plot_columns`."""
    paths = []
    for table in tables:
        paths.append(emit_csv(table, os.path.join(out_dir, f"{table.name}.csv")))
        if svg and plot_columns and table.name in plot_columns:
            paths.append(emit_svg(table, os.path.join(out_dir, f"{table.name}.svg"),
                                  columns=plot_columns[table.name]))
    return paths
