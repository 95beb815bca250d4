from __future__ import annotations

import numpy as np
import pytest

from onebit_mbqc.circuit import Circuit
from onebit_mbqc.statevec import StateVector, apply


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of ``c`` in the simulator's basis (qubit 0 least significant)."""
    dim = 2**c.width
    cols = []
    for k in range(dim):
        psi = StateVector(np.eye(dim, dtype=complex)[k])
        for g in c.gates:
            psi = apply(psi, g)
        cols.append(psi.amps)
    return np.array(cols).T


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``min_phi |a - e^{i phi} b|_max`` for unitaries of equal shape."""
    a, b = np.asarray(a), np.asarray(b)
    overlap = np.vdot(b.reshape(-1), a.reshape(-1))
    phase = overlap / abs(overlap) if abs(overlap) > 1e-12 else 1.0
    return float(np.max(np.abs(a - phase * b)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20261016)
