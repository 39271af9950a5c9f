import numpy as np
import pytest


def correlated_acts(rng, features: int, samples: int, decay: float = 1.5) -> np.ndarray:
    """Calibration-like activations: correlated features with power-law scales.

    Real layer inputs are strongly anisotropic; i.i.d. Gaussian columns make
    the reconstruction problem too easy to exercise the refit meaningfully.
    """
    mix = rng.standard_normal((features, features)) / np.sqrt(features)
    scales = np.power(np.arange(1, features + 1, dtype=float), -decay)
    return mix @ (scales[:, None] * rng.standard_normal((features, samples)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
