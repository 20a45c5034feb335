"""JSON API for codes and analysis runs"""
import json
import logging

from django.contrib.auth.decorators import login_required
from django.http import JsonResponse
from django.shortcuts import get_object_or_404
from django.views.decorators.http import require_GET, require_http_methods

from core.exceptions import StbcError
from core.models import AnalysisRun, CodeDefinition
from core.services.codes import BUILTIN_CODES, builtin, code_to_dict
from core.services.pipeline import RunConfig
from core.tasks import run_analysis_task

logger = logging.getLogger(__name__)

RUN_PARAMETERS = ('n_r', 'trials', 'seed', 'q', 'snr', 'mode', 'objective', 'predicted', 'oracle_check',
                  'structured', 'row_permutation')


def _code_summary(data, source):
    return {
        'name': data['name'],
        'nt': data['nt'],
        'T': data['T'],
        'kappa': data['kappa'],
        'source': source,
        'description': data.get('description', ''),
    }


def _run_data(run):
    return {
        'id': run.id,
        'kind': run.kind,
        'code': run.code_source,
        'parameters': run.parameters,
        'status': run.status,
        'error_message': run.error_message,
        'report': run.report if run.status == 'done' else None,
        'created_at': run.created_at.isoformat(),
        'finished_at': run.finished_at.isoformat() if run.finished_at else None,
    }


@login_required
@require_GET
def code_list_api(request):
    """Built-in and stored codes"""
    codes = [_code_summary(code_to_dict(builtin(name)), 'builtin') for name in BUILTIN_CODES]
    codes += [_code_summary(d.as_dict(), 'stored') for d in CodeDefinition.objects.all()]
    return JsonResponse({'codes': codes})


@login_required
@require_GET
def code_detail_api(request, name):
    """Full definition of one code"""
    if name.lower() in BUILTIN_CODES:
        return JsonResponse(code_to_dict(builtin(name)))
    definition = get_object_or_404(CodeDefinition, name=name)
    return JsonResponse(definition.as_dict())


@login_required
@require_http_methods(['GET', 'POST'])
def run_list_api(request):
    """List recent runs, or create one and queue it"""
    if request.method == 'GET':
        runs = AnalysisRun.objects.all()[:50]
        return JsonResponse({'runs': [_run_data(run) for run in runs]})

    try:
        payload = json.loads(request.body or b'{}')
    except json.JSONDecodeError:
        return JsonResponse({'error': 'Request body must be JSON'}, status=400)

    kind = payload.get('kind')
    code = payload.get('code')
    if not kind or not code:
        return JsonResponse({'error': "Both 'kind' and 'code' are required"}, status=400)
    if code.lower() not in BUILTIN_CODES and not CodeDefinition.objects.filter(name=code).exists():
        return JsonResponse({'error': f"Unknown code '{code}'"}, status=404)

    parameters = {k: v for k, v in payload.get('parameters', {}).items() if k in RUN_PARAMETERS}
    try:
        RunConfig(command=kind, code=code, **parameters)
    except (StbcError, TypeError, ValueError) as e:
        return JsonResponse({'error': str(e)}, status=400)

    run = AnalysisRun.objects.create(kind=kind, code_source=code, parameters=parameters)
    result = run_analysis_task.delay(run.id)
    run.task_id = getattr(result, 'id', '') or ''
    run.save(update_fields=['task_id'])
    logger.info(f"Queued run {run.id}: {kind} on {code}")

    return JsonResponse(_run_data(run), status=202)


@login_required
@require_GET
def run_detail_api(request, run_id):
    """Status and report of one run"""
    run = get_object_or_404(AnalysisRun, id=run_id)
    return JsonResponse(_run_data(run))
