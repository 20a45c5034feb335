"""
Report builders shared by the management commands and the Celery task.

Each builder takes a RunConfig, resolves the code and returns a
JSON-serialisable dictionary with a reproducibility header.
"""
import logging
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from django.conf import settings
from django.db import DatabaseError

from core.exceptions import DependentWeights, RankDeficient, UnknownCode
from core.services import reports
from core.services.codes import BUILTIN_CODES, apply_ordering, builtin, code_to_dict, load_code
from core.services.criteria import (
    hrqf_matrix,
    hrqf_predicted_pattern,
    unsymmetrised_component_test,
    verdict_table,
)
from core.services.decoder import Constellation, monte_carlo
from core.services.structure import (
    SEARCH_MODES,
    ChannelModel,
    classify,
    default_channel,
    empirical_pattern,
    ordering_search,
    predicted_pattern_theorem4,
)

logger = logging.getLogger(__name__)

COMMANDS = ('analyze', 'pattern', 'order_search', 'decode_sim')
FORMATS = ('ascii', 'json', 'csv')
DEFAULT_SNR_GRID = (0.0, 10.0, 20.0)


@dataclass
class RunConfig:
    """Parameters of one run; unset numeric fields fall back to settings."""
    command: str
    code: str
    n_r: int = None
    trials: int = None
    seed: int = None
    q: int = 2
    snr: tuple = DEFAULT_SNR_GRID
    mode: str = 'exhaustive'
    objective: str = 'complexity'
    format: str = 'ascii'
    predicted: bool = False
    oracle_check: bool = False
    structured: bool = True
    # 1-based order of the rows of H_eq, pattern only
    row_permutation: tuple = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command '{self.command}'")
        if self.format not in FORMATS:
            raise ValueError(f"Unknown output format '{self.format}'")
        if self.trials is None:
            self.trials = settings.STBC_FSD_TRIALS
        if self.seed is None:
            self.seed = settings.STBC_FSD_SEED
        for name in ('n_r', 'trials', 'q'):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.q % 2:
            raise ValueError(f"q must be even, got {self.q}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.mode not in SEARCH_MODES:
            raise ValueError(f"Unknown search mode '{self.mode}'")
        self.snr = tuple(float(v) for v in self.snr)
        for value in self.snr:
            # +inf is the noiseless point
            if math.isnan(value) or value == -math.inf:
                raise ValueError(f"SNR must be a number of dB or inf, got {value}")

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    def to_dict(self):
        data = asdict(self)
        data['snr'] = [v if math.isfinite(v) else str(v) for v in self.snr]
        return data


def parse_snr_grid(text):
    """'a:step:b' (inclusive), a comma list or a single value; 'inf' means no noise."""
    text = text.strip()
    if ':' in text:
        try:
            start, step, stop = (float(part) for part in text.split(':'))
        except ValueError:
            raise ValueError(f"SNR grid must look like a:step:b, got '{text}'")
        if not all(math.isfinite(v) for v in (start, step, stop)):
            raise ValueError(f"SNR range bounds and step must be finite, got '{text}'")
        if step <= 0:
            raise ValueError(f"SNR step must be positive, got {step}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + k * step for k in range(max(count, 0)))
    return tuple(float(part) for part in text.split(','))


def resolve_code(source):
    """
    Built-in name first, then a code file path, then a stored CodeDefinition.

    Raises:
        UnknownCode: when nothing matches
        CodeSchemaError: when a file or stored definition is invalid
    """
    if source.lower() in BUILTIN_CODES:
        return builtin(source)
    path = Path(source)
    if path.suffix == '.json' or path.exists():
        return load_code(path)

    from core.models import CodeDefinition
    try:
        definition = CodeDefinition.objects.get(name=source)
    except CodeDefinition.DoesNotExist:
        raise UnknownCode(
            f"Unknown code '{source}': not a built-in ({', '.join(BUILTIN_CODES)}), "
            f"a file or a stored definition"
        )
    except DatabaseError as e:
        logger.warning(f"Could not look up stored code '{source}': {e}")
        raise UnknownCode(f"Unknown code '{source}'")
    return definition.to_code()


def _channel(code, config):
    channel = default_channel(code, config.seed)
    if config.n_r is not None:
        channel = ChannelModel(n_r=config.n_r, seed=config.seed)
    return channel


def _header(config, code, channel):
    return {
        'command': config.command,
        'code': code.name,
        'nt': code.nt,
        'T': code.T,
        'kappa': code.kappa,
        'n_r': channel.n_r,
        'trials': config.trials,
        'seed': config.seed,
        'q': config.q,
    }


def analyze(config, code=None):
    """
    Verdicts, HRQF, predicted and measured patterns, classification.

    The channel-free sections are always built. When the weights are
    linearly dependent R cannot be measured: the measured pattern and the
    classification are None and ``rank_warning`` says why.
    """
    code = code or resolve_code(config.code)
    channel = _channel(code, config)
    verdicts = verdict_table(code)
    U = hrqf_matrix(code)
    predicted = predicted_pattern_theorem4(code)
    hrqf = hrqf_predicted_pattern(code)

    rank_warning = None
    empirical = report = None
    try:
        empirical = empirical_pattern(code, channel, config.trials)
    except (DependentWeights, RankDeficient) as e:
        rank_warning = str(e)
        logger.warning(f"Cannot measure R for {code.name}: {e}")
    if empirical is not None:
        report = classify(code, empirical, q=config.q, hrqf=hrqf)

    gaps = []
    for v in verdicts:
        if v.hr_orthogonal and not v.component_test:
            gaps.append({
                'i': v.i,
                'j': v.j,
                'hrqf_value': v.hrqf_value,
                'component_residual': unsymmetrised_component_test(code, v.i, v.j).residual,
                'empirical_zero': None if empirical is None else bool(empirical.mask[v.i - 1, v.j - 1]),
            })

    contained = None if empirical is None else predicted.issubset(empirical)
    if contained is False:
        logger.error(
            f"Predicted zeros of {code.name} not all measured: {reports.pattern_diff(predicted, empirical)}"
        )

    return {
        'header': _header(config, code, channel),
        'verdicts': [v.to_dict() for v in verdicts],
        'hrqf_matrix': [[float(u) for u in row] for row in U],
        'hrqf_zero_pairs': [[v.i, v.j] for v in verdicts if v.hr_orthogonal],
        'patterns': {
            'empirical': None if empirical is None else empirical.to_dict(),
            'predicted': predicted.to_dict(),
            'hrqf': hrqf.to_dict(),
        },
        'prediction_contained': contained,
        'classification': None if report is None else report.to_dict(),
        'hr_component_gaps': gaps,
        'rank_warning': rank_warning,
        'code_warnings': list(code.warnings),
    }


def pattern(config, code=None):
    """Measured mask, optionally with the predicted and HRQF masks and their differences."""
    code = code or resolve_code(config.code)
    channel = _channel(code, config)
    rows = [p - 1 for p in config.row_permutation] if config.row_permutation else None
    empirical = empirical_pattern(code, channel, config.trials, row_permutation=rows)
    result = {
        'header': _header(config, code, channel),
        'labels': list(code.symbol_labels),
        'patterns': {'empirical': empirical.to_dict()},
    }
    if config.predicted:
        predicted = predicted_pattern_theorem4(code)
        hrqf = hrqf_predicted_pattern(code)
        result['patterns'].update({'predicted': predicted.to_dict(), 'hrqf': hrqf.to_dict()})
        result['diff'] = {
            'predicted_vs_empirical': reports.pattern_diff(predicted, empirical),
            'hrqf_vs_empirical': reports.pattern_diff(hrqf, empirical),
        }
    return result


def order_search(config, code=None):
    code = code or resolve_code(config.code)
    channel = _channel(code, config)
    found = ordering_search(
        code, channel, objective=config.objective, q=config.q, mode=config.mode, trials=config.trials,
    )
    return {
        'header': {**_header(config, code, channel), 'mode': found.mode, 'objective': config.objective},
        'ordering': list(found.ordering.perm),
        'labels': [code.symbol_labels[k] for k in found.ordering.indices],
        'before_exponent': found.before_exponent,
        'after_exponent': found.after_exponent,
        'candidates_evaluated': found.candidates_evaluated,
        'trace': found.trace,
        'pattern': found.pattern.to_dict(),
        'classification': found.report.to_dict(),
        'reordered_code': code_to_dict(apply_ordering(code, found.ordering)),
    }


def decode_sim(config, code=None):
    code = code or resolve_code(config.code)
    channel = _channel(code, config)
    rows = monte_carlo(
        code,
        Constellation(config.q),
        config.snr,
        config.trials,
        seed=config.seed,
        n_r=channel.n_r,
        structured=config.structured,
        oracle_check=config.oracle_check,
    )
    return {
        'header': {**_header(config, code, channel), 'structured': config.structured},
        'rows': rows,
    }


BUILDERS = {
    'analyze': analyze,
    'pattern': pattern,
    'order_search': order_search,
    'decode_sim': decode_sim,
}


def run(config, code=None):
    """Build the report for ``config.command``."""
    logger.info(f"Running {config.command} on {config.code}")
    return BUILDERS[config.command](config, code)


def render(config, report):
    """Text for ``config.format``."""
    if config.format == 'json':
        return reports.to_json(report)
    if config.command == 'decode_sim':
        if config.format == 'csv':
            return reports.curve_csv(report['rows'])
        return reports.render_header(report['header']) + '\n' + reports.render_curve(report['rows']) + '\n'
    if config.format == 'csv':
        raise ValueError("CSV output is only available for decode_sim")
    if config.command == 'analyze':
        return reports.render_analysis(report) + '\n'
    if config.command == 'pattern':
        return _render_pattern(report) + '\n'
    return _render_order_search(report) + '\n'


def _render_pattern(report):
    lines = [reports.render_header(report['header'])]
    patterns = report['patterns']
    if len(patterns) == 1:
        lines.append(reports.render_pattern(
            reports.pattern_from_dict(patterns['empirical']), labels=report['labels']))
    else:
        lines.append(reports.render_side_by_side(
            {name: reports.pattern_from_dict(data) for name, data in patterns.items()}))
        for name, diff in report['diff'].items():
            lines.append(
                f"{name}: only predicted {diff['only_left'] or 'none'}, "
                f"only measured {diff['only_right'] or 'none'}"
            )
    return '\n'.join(lines)


def _render_order_search(report):
    c = report['classification']
    return '\n'.join([
        reports.render_header(report['header']),
        f"ordering: {report['ordering']}",
        f"labels: {' '.join(report['labels'])}",
        f"exponent: {report['before_exponent']:g} -> {report['after_exponent']:g}",
        f"family: {c['family']}",
        reports.render_pattern(reports.pattern_from_dict(report['pattern'])),
    ])
