import math

import pytest

from polariton import MediumParams


TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def paper_medium():
    """The builtin vapor-cell parameter set."""
    return MediumParams(n=1e12, wavelength=7.95e-5, gamma_r=TWO_PI * 5.75,
                        gamma_opt=TWO_PI * 100.0, gamma_0=1.0 / 150.0,
                        L_cell=4.0)


@pytest.fixture(scope="session")
def mild_medium():
    """Shallow, narrow-line medium: cheap to integrate in unit tests."""
    return MediumParams(n=1e10, wavelength=7.95e-5, gamma_r=TWO_PI * 5.75,
                        gamma_opt=TWO_PI * 10.0, gamma_0=0.0, L_cell=4.0)
