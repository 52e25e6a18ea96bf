# tests/generators/conftest.py
import pytest

from src.generators.instance_generator import LmabInstanceGenerator


@pytest.fixture(scope="module")  # un generador por archivo de test
def generator():
    return LmabInstanceGenerator(seed=42)


@pytest.fixture(scope="module")
def batch(generator):
    return generator.generate_batch(20, M=3, A=4, Z=3, H=4, rank=2)
