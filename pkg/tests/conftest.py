from fractions import Fraction

import pytest

import instances


@pytest.fixture
def spaces():
    return instances.worked_spaces()


@pytest.fixture
def reference():
    return instances.worked_reference()


@pytest.fixture
def grid():
    return instances.worked_grid()


@pytest.fixture
def targets():
    return instances.worked_targets()


@pytest.fixture
def perturbed():
    return instances.worked_perturbed()


@pytest.fixture
def half():
    return Fraction(1, 2)
