"""Shared fixtures: the small fields every test module works over."""

import pytest

from fq_core import make_field


@pytest.fixture
def F2():
    return make_field(2)


@pytest.fixture
def F3():
    return make_field(3)


@pytest.fixture
def F4():
    return make_field(2, 2)


@pytest.fixture
def F5():
    return make_field(5)
