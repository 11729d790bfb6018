import json
from fractions import Fraction

import pytest

from maxlab.database import open_session
from maxlab.schemas import dump_function
from maxlab.services.functions import PiecewiseLinearFunction, StepFunction, delta_at_origin
from maxlab.services.generators import RandomBVSpec


@pytest.fixture
def delta():
    return delta_at_origin()


@pytest.fixture
def tent():
    return PiecewiseLinearFunction.tent()


@pytest.fixture
def unit_step():
    return StepFunction.indicator(Fraction(0), Fraction(1), Fraction(1))


@pytest.fixture
def spec():
    return RandomBVSpec(seed=7, width_range=(1, 6))


@pytest.fixture
def db():
    session = open_session("sqlite://")
    try:
        yield session
    finally:
        session.close()


@pytest.fixture
def function_file(tmp_path):
    """Write a function payload to a JSON file and return its path."""

    def write(f, name="f.json"):
        path = tmp_path / name
        path.write_text(json.dumps(dump_function(f)))
        return str(path)

    return write
