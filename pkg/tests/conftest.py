import mpmath
import pytest
from hypothesis import settings

settings.register_profile("afinv", max_examples=40, deadline=None)
settings.load_profile("afinv")


@pytest.fixture(autouse=True)
def _fixed_precision():
    # every test starts from the same global precision
    with mpmath.workdps(50):
        yield
