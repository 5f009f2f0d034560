import mpmath
import pytest


@pytest.fixture(autouse=True)
def _restore_precision():
    saved = mpmath.mp.prec
    yield
    mpmath.mp.prec = saved
