import pytest

from kglie.expr import configure


@pytest.fixture(autouse=True)
def default_settings():
    previous = configure(seed=0, trials=25, precision=256, tolerance=1e-9)
    yield
    configure(**previous.__dict__)
