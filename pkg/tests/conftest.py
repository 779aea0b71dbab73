import pathlib

import pytest

from tanglekit import scenes

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def model_a_15():
    return scenes.build_model_a(1.5)


@pytest.fixture(scope="session")
def model_a_05():
    return scenes.build_model_a(0.5)


@pytest.fixture(scope="session")
def model_b_unit():
    return scenes.build_model_b(1.0, 1.0, 1.0, 0.5)


@pytest.fixture(scope="session")
def model_c_tight():
    return scenes.build_model_c(1.0, 0.05, 1.0)


@pytest.fixture(scope="session")
def solution_script_path():
    return FIXTURES / "modelA_r0.5_solution.json"
