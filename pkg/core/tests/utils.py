"""Shared helpers for the test suite"""
import json
from pathlib import Path

import numpy as np

from core.services.codes import StbcCode
from core.services.patterns import ZeroPattern

FIXTURES = Path(__file__).resolve().parent / 'fixtures'


def fixture_path(name):
    return FIXTURES / name


def reference_pattern(code_name):
    data = json.loads(fixture_path('patterns.json').read_text())[code_name]
    return ZeroPattern.from_zeros(data['dim'], data['zeros'], source='fixture')


def complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_code(rng, nt, T, kappa=None, paired=True, name='synthetic'):
    """
    Random code; with ``paired`` the weights come as (B, iB) pairs, which
    are mutually orthogonal for every channel.
    """
    kappa = kappa or nt * T
    if paired:
        weights = []
        for _ in range(kappa):
            B = complex_gaussian(rng, (nt, T))
            weights.extend([B, 1j * B])
    else:
        weights = list(complex_gaussian(rng, (2 * kappa, nt, T)))
    return StbcCode(name=name, nt=nt, T=T, kappa=kappa, weights=weights)
