"""Celery tasks for asynchronous analysis runs"""
from celery import shared_task
from django.core.exceptions import ObjectDoesNotExist, ValidationError
from django.utils import timezone
import logging

from core.exceptions import StbcError

logger = logging.getLogger(__name__)


def _fail(run, message):
    run.status = 'error'
    run.error_message = message
    run.finished_at = timezone.now()
    run.save()


@shared_task(bind=True, max_retries=3)
def run_analysis_task(self, run_id):
    """
    Execute an AnalysisRun through the same pipeline as the management commands.

    Args:
        run_id: ID of the AnalysisRun model

    Returns:
        dict: Result with success status and message
    """
    from core.models import AnalysisRun
    from core.services import pipeline

    try:
        run = AnalysisRun.objects.get(id=run_id)
        run.status = 'running'
        run.error_message = ''
        run.save()

        try:
            config = pipeline.RunConfig.from_dict(run.config_dict())
            report = pipeline.run(config)
        except ValidationError as e:
            message = '; '.join(e.messages)
            _fail(run, message)
            logger.error(f"Run {run_id}: invalid code definition: {message}")
            return {'success': False, 'error': message}
        except (StbcError, ValueError) as e:
            _fail(run, str(e))
            logger.error(f"Run {run_id} ({run.kind} on {run.code_source}) failed: {e}")
            return {'success': False, 'error': str(e)}

        run.report = report
        run.status = 'done'
        run.finished_at = timezone.now()
        run.save()

        logger.info(f"Finished run {run_id} ({run.kind} on {run.code_source})")
        return {'success': True, 'run_id': run_id}

    except ObjectDoesNotExist:
        logger.error(f"Run {run_id} not found")
        return {'success': False, 'error': 'Run not found'}

    except Exception as e:
        logger.error(f"Unexpected error in run {run_id}: {e}")
        # Retry the task
        try:
            raise self.retry(exc=e, countdown=60)
        except self.MaxRetriesExceededError:
            if 'run' in locals():
                _fail(run, f"Failed after retries: {str(e)}")
            return {'success': False, 'error': f'Max retries exceeded: {str(e)}'}
