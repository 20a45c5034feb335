"""Text renderings of patterns, verdict tables, analysis reports and curves."""
import csv
import io
import json

import numpy as np

from core.services.patterns import ZeroPattern

ZERO = '0'
NONZERO = 'x'
DIAGONAL = '#'
BELOW = '.'

CURVE_FIELDS = ('snr_db', 'ber', 'ser', 'mean_nodes', 'p95_nodes', 'max_nodes', 'node_bound', 'oracle_agreement')


def pattern_rows(pattern):
    """One string per row of R: '0' structural zero, 'x' generic, '#' diagonal, '.' below."""
    rows = []
    for i in range(pattern.dim):
        cells = []
        for j in range(pattern.dim):
            if j < i:
                cells.append(BELOW)
            elif j == i:
                cells.append(DIAGONAL)
            else:
                cells.append(ZERO if pattern.mask[i, j] else NONZERO)
        rows.append(' '.join(cells))
    return rows


def parse_pattern(text, source='ascii'):
    """Inverse of :func:`pattern_rows`."""
    lines = [line.split() for line in text.strip().splitlines() if line.strip()]
    mask = np.array([[cell == ZERO for cell in line] for line in lines], dtype=bool)
    return ZeroPattern(mask, source=source)


def pattern_from_dict(data, source='json'):
    return ZeroPattern.from_zeros(data['dim'], data['zeros'], source=source)


def render_pattern(pattern, title=None, labels=None):
    lines = []
    if title:
        lines.append(title)
    width = max((len(label) for label in labels), default=0) if labels else 0
    for label, row in zip(labels or [''] * pattern.dim, pattern_rows(pattern)):
        lines.append(f"{label:>{width}}  {row}" if width else row)
    return '\n'.join(lines)


def render_side_by_side(patterns, gap=4):
    """Several masks of the same size next to each other, under their names."""
    blocks = [(name, pattern_rows(pattern)) for name, pattern in patterns.items()]
    width = max(len(rows[0]) if rows else 0 for _, rows in blocks)
    width = max([width] + [len(name) for name, _ in blocks])
    spacer = ' ' * gap
    lines = [spacer.join(f"{name:<{width}}" for name, _ in blocks).rstrip()]
    for k in range(len(blocks[0][1])):
        lines.append(spacer.join(f"{rows[k]:<{width}}" for _, rows in blocks).rstrip())
    return '\n'.join(lines)


def pattern_diff(left, right):
    """Zeros present in only one of two patterns, 1-based."""
    only_left = sorted(set(left.zeros()) - set(right.zeros()))
    only_right = sorted(set(right.zeros()) - set(left.zeros()))
    return {'only_left': [list(z) for z in only_left], 'only_right': [list(z) for z in only_right]}


def render_verdicts(verdicts):
    """Table of PairVerdict dictionaries."""
    header = f"{'pair':>8}  c1  c2  HR  both  either    comp  {'U_ij':>10}"
    lines = [header, '-' * len(header)]
    mark = {True: 'y', False: '-'}
    for v in verdicts:
        pair = f"({v['i']},{v['j']})"
        lines.append(
            f"{pair:>8}  {mark[v['cond_c1']]:>2}  {mark[v['cond_c2']]:>2}  "
            f"{mark[v['hr_orthogonal']]:>2}  {mark[v['both_conditions']]:>4}  "
            f"{mark[v['either_condition']]:>6}  {mark[v['component_test']]:>6}  {v['hrqf_value']:>10.4g}"
        )
    return '\n'.join(lines)


def render_header(header):
    return '# ' + '  '.join(f"{key}={value}" for key, value in header.items())


def _format_zeros(zeros):
    return ', '.join(f"({i},{j})" for i, j in zeros) or 'none'


def render_analysis(report):
    """ASCII form of the dictionary built by pipeline.analyze."""
    c = report['classification']
    lines = [
        render_header(report['header']),
        '',
        'Pairwise verdicts',
        render_verdicts(report['verdicts']),
        '',
        f"HRQF zeros (U_ij = 0): {_format_zeros(report['hrqf_zero_pairs'])}",
        '',
        render_side_by_side({
            name: pattern_from_dict(report['patterns'][name])
            for name in ('empirical', 'predicted', 'hrqf')
            if report['patterns'][name] is not None
        }),
        '',
    ]
    if c is None:
        lines.append(f"rank warning: {report['rank_warning']}")
    else:
        lines.extend([
            f"family: {c['family']}",
            f"witness: L={c['witness']['L']} g={c['witness']['g']} groups={c['witness']['groups']}",
        ])
        if c['bo_params']:
            lines.append(f"block-orthogonal (Gamma, k, gamma): {tuple(c['bo_params'])}")
        complexity = c['complexity']
        lines.extend([
            f"complexity exponent at q={complexity['q']}: {complexity['exponent']:g} "
            f"(exhaustive {complexity['exhaustive_exponent']:g}), node bound {complexity['node_bound']}",
            "HRQF mismatches: " + (', '.join(
                f"({m['i']},{m['j']}) {m['direction']}" for m in c['hrqf_mismatches']) or 'none'),
        ])
    for gap in report['hr_component_gaps']:
        lines.append(
            f"pair ({gap['i']},{gap['j']}): HR holds (U = {gap['hrqf_value']:.3g}), printed component test "
            f"fails (residual {gap['component_residual']:.3g}), R zero measured: {gap['empirical_zero']}"
        )
    if report['code_warnings']:
        lines.append('warnings: ' + '; '.join(report['code_warnings']))
    return '\n'.join(lines)


def to_json(data):
    return json.dumps(data, indent=2, sort_keys=False) + '\n'


def curve_csv(rows):
    buffer = io.StringIO()
    fields = [f for f in CURVE_FIELDS if any(f in row for row in rows)]
    writer = csv.DictWriter(buffer, fieldnames=fields, extrasaction='ignore', lineterminator='\n')
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def render_curve(rows):
    lines = [f"{'snr_db':>7} {'ber':>10} {'ser':>10} {'mean_nodes':>11} {'p95_nodes':>10} {'oracle':>7}"]
    for row in rows:
        agreement = row.get('oracle_agreement')
        lines.append(
            f"{row['snr_db']:>7g} {row['ber']:>10.3e} {row['ser']:>10.3e} "
            f"{row['mean_nodes']:>11.1f} {row['p95_nodes']:>10.1f} "
            f"{'-' if agreement is None else f'{agreement:.1%}':>7}"
        )
    return '\n'.join(lines)
