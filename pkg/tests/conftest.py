import math

import numpy as np
import pytest
from hypothesis import strategies as st

from aqslab.aqs import RotationFamily, SchemeConfig, preset

SQ2, SQ3 = math.sqrt(2), math.sqrt(3)

# Literal matrices written out by hand, independent of the package constructors.
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
PAULIS = [I2, X, Y, Z]
T_LITERAL = (1j / SQ3) * (X - Y + Z)
WA_LITERAL = np.array([[1, np.exp(1j * math.pi / 4)], [np.exp(-1j * math.pi / 4), -1]]) / SQ2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def t_z4():
    return SchemeConfig(RotationFamily.UNBIASED_Z4, preset("t"))


@pytest.fixture
def wa_z4():
    return SchemeConfig(RotationFamily.UNBIASED_Z4, preset("wa"))


@pytest.fixture
def wa_z2():
    return SchemeConfig(RotationFamily.BIASED_Z2, preset("wa"))


def equal_up_to_phase(a, b, tol=1e-9):
    """Test-side oracle: |<a,b>| equals |a||b| iff a and b are parallel."""
    a, b = np.ravel(a), np.ravel(b)
    return abs(abs(np.vdot(a, b)) - np.linalg.norm(a) * np.linalg.norm(b)) <= tol


unit_floats = st.floats(min_value=-1, max_value=1, allow_nan=False, allow_infinity=False)
phases = st.floats(min_value=-math.pi, max_value=math.pi, allow_nan=False)


@st.composite
def coeff_vectors(draw):
    v = np.array([draw(unit_floats) for _ in range(4)])
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = np.array([1.0, 0, 0, 0]), 1.0
    return v / n
