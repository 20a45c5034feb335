# Generated by Django 4.2.25 on 2026-10-19 09:12

import django.core.validators
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='CodeDefinition',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=100, unique=True)),
                ('nt', models.IntegerField(help_text='Transmit antennas', validators=[django.core.validators.MinValueValidator(1)])),
                ('t', models.IntegerField(help_text='Channel uses per codeword', validators=[django.core.validators.MinValueValidator(1)])),
                ('kappa', models.IntegerField(help_text='Complex symbols per codeword', validators=[django.core.validators.MinValueValidator(1)])),
                ('symbol_labels', models.JSONField(blank=True, default=list)),
                ('weights', models.JSONField(default=list, help_text='2*kappa matrices of nt rows and T entries, each entry [re, im]')),
                ('ordering', models.JSONField(blank=True, default=list, help_text='Optional 1-based canonical index of each weight matrix')),
                ('description', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'ordering': ['name'],
            },
        ),
        migrations.CreateModel(
            name='AnalysisRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(choices=[('analyze', 'Analyze'), ('pattern', 'Zero pattern'), ('order_search', 'Ordering search'), ('decode_sim', 'Decoding simulation')], max_length=20)),
                ('code_source', models.CharField(help_text='Built-in or stored code name', max_length=255)),
                ('parameters', models.JSONField(blank=True, default=dict)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('running', 'Running'), ('done', 'Done'), ('error', 'Error')], default='pending', max_length=20)),
                ('report', models.JSONField(blank=True, default=dict)),
                ('error_message', models.TextField(blank=True)),
                ('task_id', models.CharField(blank=True, max_length=255)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['status'], name='run_status_idx'), models.Index(fields=['kind', 'status'], name='run_kind_status_idx'), models.Index(fields=['code_source'], name='run_code_idx')],
            },
        ),
    ]
