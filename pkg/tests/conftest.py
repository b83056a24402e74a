import itertools
from pathlib import Path

import numpy as np
import pytest

from matpressure.matfam import MatrixFamily

DATA = Path(__file__).parent / "data"


def fam(*mats, field=None):
    return MatrixFamily.from_matrices([np.asarray(m, dtype=complex if field == "complex" else float)
                                       for m in mats], field=field)


def brute_log_partition(family, q, n, norm="operator"):
    """log sum ||M_J||^q by explicit loops over words, the slow way."""
    total = 0.0
    for word in itertools.product(range(family.ell), repeat=n):
        M = np.eye(family.d)
        for j in word:
            M = M @ family.matrices[j]
        nrm = np.linalg.norm(M, 2) if norm == "operator" else np.linalg.norm(M, "fro")
        total += nrm ** q
    return np.log(total) if total > 0 else -np.inf


@pytest.fixture
def diag_family():
    return fam(np.diag([1.0, 2.0]), np.diag([3.0, 2.0]))


@pytest.fixture
def shear_pair():
    return fam([[1, 1], [0, 1]], [[1, 0], [1, 1]])


@pytest.fixture
def trivial_pair():
    return fam([[0, 1], [0, 0]], [[0, 2], [0, 0]])


@pytest.fixture
def scalar_13():
    return fam([[1.0]], [[3.0]])


@pytest.fixture
def identity_pair():
    return fam(np.eye(2), np.eye(2))
