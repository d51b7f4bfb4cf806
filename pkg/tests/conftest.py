import numpy as np
import pytest
from hypothesis import settings

from softedge.fredholm import limit_curve
from softedge.painleve import ode_curve

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# Tracy-Widom (GUE) values from an independent dense rule: 200 nodes, tail 30
TW_ORACLE = {
    1.0: {-3.0: 0.08031955293934821, -2.0: 0.41322414250515416, 0.0: 0.9693728283552675, 2.0: 0.9998875536983094},
    0.6: {-3.0: 0.4053484684675548, -2.0: 0.6445936173787443, 0.0: 0.9816231662689856, 2.0: 0.9999325322178314},
}

WIDE = np.round(np.arange(-10.0, 6.0 + 1e-9, 0.05), 10)
WINDOW = np.round(np.arange(-6.0, 2.0 + 1e-9, 0.1), 10)


@pytest.fixture(scope="session")
def gue_wide():
    """Operator-route GUE curve with correction on [-10, 6]."""
    return limit_curve("gue", 1.0, WIDE)


@pytest.fixture(scope="session")
def gue_window():
    return limit_curve("gue", 1.0, WINDOW)


@pytest.fixture(scope="session")
def gue_ode_window():
    return ode_curve("gue", 1.0, WINDOW)
