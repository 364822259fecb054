"""Shared fixtures: certified matrices used across the test packages."""

import pytest

from anisotropic_tl.linalg.expansive import certify_expansive
from anisotropic_tl.linalg.models import ExpansiveMatrix


@pytest.fixture
def two_id() -> ExpansiveMatrix:
    return certify_expansive([[2.0, 0.0], [0.0, 2.0]])


@pytest.fixture
def diag24() -> ExpansiveMatrix:
    return certify_expansive([[2.0, 0.0], [0.0, 4.0]])


@pytest.fixture
def jordan2() -> ExpansiveMatrix:
    return certify_expansive([[2.0, 1.0], [0.0, 2.0]])


@pytest.fixture
def two_rot() -> ExpansiveMatrix:
    return certify_expansive([[0.0, -2.0], [2.0, 0.0]])
