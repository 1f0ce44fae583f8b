import os

import pytest

from core.field import get_field
from core.utils import make_rng
from services import sample_service as samples

SAMPLES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'samples')


def sample_path(name):
    return os.path.join(SAMPLES_DIR, name)


@pytest.fixture
def sample_file():
    """samples/ 下的文件路径"""
    return sample_path


@pytest.fixture
def f2():
    return get_field('F2')


@pytest.fixture
def rationals():
    return get_field('Q')


@pytest.fixture
def rng():
    return make_rng(20240601)


@pytest.fixture
def circle():
    return samples.boundary_triangle()


@pytest.fixture
def chain2():
    return samples.two_chain()
