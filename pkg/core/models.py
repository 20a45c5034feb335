from django.core.validators import MinValueValidator
from django.db import models

from core.services.codes import code_from_dict, code_to_dict


class CodeDefinition(models.Model):
    """User-supplied code stored in the code-file layout"""
    name = models.CharField(max_length=100, unique=True)
    nt = models.IntegerField(validators=[MinValueValidator(1)], help_text='Transmit antennas')
    t = models.IntegerField(validators=[MinValueValidator(1)], help_text='Channel uses per codeword')
    kappa = models.IntegerField(validators=[MinValueValidator(1)], help_text='Complex symbols per codeword')
    symbol_labels = models.JSONField(default=list, blank=True)
    weights = models.JSONField(
        default=list,
        help_text='2*kappa matrices of nt rows and T entries, each entry [re, im]'
    )
    ordering = models.JSONField(
        default=list,
        blank=True,
        help_text='Optional 1-based canonical index of each weight matrix'
    )
    description = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ['name']

    def __str__(self):
        return f"{self.name} ({self.nt}x{self.t}, kappa={self.kappa})"

    def as_dict(self):
        data = {
            'name': self.name,
            'nt': self.nt,
            'T': self.t,
            'kappa': self.kappa,
            'symbol_labels': self.symbol_labels,
            'weights': self.weights,
            'description': self.description,
        }
        if self.ordering:
            data['ordering'] = self.ordering
        return data

    def to_code(self):
        """Validated StbcCode; raises CodeSchemaError on a broken definition."""
        return code_from_dict(self.as_dict())

    def clean(self):
        self.to_code()

    @classmethod
    def from_code(cls, code, name=None):
        """Create or update the row for ``code``."""
        data = code_to_dict(code)
        definition, _ = cls.objects.update_or_create(
            name=name or code.name,
            defaults={
                'nt': data['nt'],
                't': data['T'],
                'kappa': data['kappa'],
                'symbol_labels': data['symbol_labels'],
                'weights': data['weights'],
                'ordering': data.get('ordering', []),
                'description': data.get('description', ''),
            },
        )
        return definition


class AnalysisRun(models.Model):
    """One analysis, pattern, ordering search or simulation run"""
    KIND_CHOICES = [
        ('analyze', 'Analyze'),
        ('pattern', 'Zero pattern'),
        ('order_search', 'Ordering search'),
        ('decode_sim', 'Decoding simulation'),
    ]

    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('running', 'Running'),
        ('done', 'Done'),
        ('error', 'Error'),
    ]

    kind = models.CharField(max_length=20, choices=KIND_CHOICES)
    code_source = models.CharField(max_length=255, help_text='Built-in or stored code name')
    parameters = models.JSONField(default=dict, blank=True)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='pending')
    report = models.JSONField(default=dict, blank=True)
    error_message = models.TextField(blank=True)
    task_id = models.CharField(max_length=255, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['status'], name='run_status_idx'),
            models.Index(fields=['kind', 'status'], name='run_kind_status_idx'),
            models.Index(fields=['code_source'], name='run_code_idx'),
        ]

    def __str__(self):
        return f"{self.kind} on {self.code_source} ({self.status})"

    def config_dict(self):
        return {**self.parameters, 'command': self.kind, 'code': self.code_source, 'format': 'json'}
