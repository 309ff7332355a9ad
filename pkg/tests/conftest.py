import pathlib

import numpy as np
import pytest

from etcontrol import SynthesisParams, UncertaintyModel

REPO_ROOT = pathlib.Path(__file__).resolve().parents[1]
CONFIG_DIR = REPO_ROOT / "configs"


@pytest.fixture
def reference_system():
    """Two-state benchmark with mismatched uncertainty and a narrow window.

    The design window condition fails here by construction (the Riccati
    solution is much larger than 1/epsilon), which several tests rely on.
    """
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    model = UncertaintyModel(
        basis=(np.array([[1.0, 1.0], [0.0, 0.0]]),),
        p_lo=[0.0],
        p_hi=[0.8],
        F=6.09 * np.ones((2, 2)),
    )
    params = SynthesisParams(
        Q=np.eye(2),
        R1=np.array([[1.0]]),
        R2=np.eye(2),
        alpha=10.0,
        beta=5.0,
        epsilon=0.1,
        sigma=0.1,
    )
    return A, B, model, params


@pytest.fixture
def demo_system():
    """Two-state instance where every design condition holds."""
    A = np.array([[0.0, 0.3], [0.3, 0.0]])
    B = np.array([[0.0], [1.0]])
    model = UncertaintyModel(
        basis=(np.array([[0.1, 0.1], [0.0, 0.0]]),),
        p_lo=[-0.3],
        p_hi=[0.3],
        F=0.02 * np.eye(2),
    )
    params = SynthesisParams(
        Q=0.01 * np.eye(2),
        R1=np.array([[0.01]]),
        R2=np.eye(2),
        alpha=1.0,
        beta=0.2,
        epsilon=10.0,
        sigma=0.5,
    )
    return A, B, model, params


@pytest.fixture
def scalar_system():
    """Scalar instance sitting comfortably inside the design window."""
    A = np.array([[0.5]])
    B = np.array([[1.0]])
    model = UncertaintyModel(
        basis=(np.array([[1.0]]),),
        p_lo=[-0.2],
        p_hi=[0.2],
        F=np.array([[0.05]]),
    )
    params = SynthesisParams(
        Q=np.array([[0.1]]),
        R1=np.array([[0.01]]),
        R2=np.array([[1.0]]),
        alpha=1.0,
        beta=0.1,
        epsilon=4.0,
        sigma=0.5,
    )
    return A, B, model, params
