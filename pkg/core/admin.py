"""Admin interface for stored codes and analysis runs"""
from django.contrib import admin

from core.models import AnalysisRun, CodeDefinition
from core.tasks import run_analysis_task


@admin.register(CodeDefinition)
class CodeDefinitionAdmin(admin.ModelAdmin):
    """Admin interface for CodeDefinition model"""
    list_display = ('name', 'nt', 't', 'kappa', 'get_rate', 'updated_at')
    search_fields = ('name', 'description')
    readonly_fields = ('created_at', 'updated_at')

    fieldsets = (
        ('Basic Information', {
            'fields': ('name', 'description')
        }),
        ('Dimensions', {
            'fields': ('nt', 't', 'kappa')
        }),
        ('Weight Matrices', {
            'fields': ('symbol_labels', 'weights', 'ordering'),
            'description': 'weights: 2*kappa matrices, rows of [re, im] pairs; ordering is optional and 1-based'
        }),
        ('Metadata', {
            'fields': ('created_at', 'updated_at'),
            'classes': ('collapse',)
        }),
    )

    def get_rate(self, obj):
        return f"{obj.kappa / obj.t:g}"
    get_rate.short_description = 'Rate'


@admin.register(AnalysisRun)
class AnalysisRunAdmin(admin.ModelAdmin):
    """Admin interface for AnalysisRun model"""
    list_display = ('id', 'kind', 'code_source', 'status', 'get_family', 'created_at', 'finished_at')
    list_filter = ('kind', 'status', 'created_at')
    search_fields = ('code_source', 'error_message')
    readonly_fields = ('report', 'task_id', 'created_at', 'updated_at', 'finished_at')

    fieldsets = (
        ('Run', {
            'fields': ('kind', 'code_source', 'parameters', 'status')
        }),
        ('Result', {
            'fields': ('report',),
            'classes': ('collapse',)
        }),
        ('Error Information', {
            'fields': ('error_message',),
            'classes': ('collapse',)
        }),
        ('Metadata', {
            'fields': ('task_id', 'created_at', 'updated_at', 'finished_at'),
            'classes': ('collapse',)
        }),
    )

    def get_family(self, obj):
        """Decodability family of finished analyze runs"""
        return (obj.report.get('classification') or {}).get('family', '-')
    get_family.short_description = 'Family'

    actions = ['requeue_runs']

    def requeue_runs(self, request, queryset):
        """Bulk action to run the selected again"""
        for run in queryset:
            run.status = 'pending'
            run.report = {}
            run.save()
            run_analysis_task.delay(run.id)
        self.message_user(request, f"{queryset.count()} runs queued.")
    requeue_runs.short_description = "Queue selected runs again"
