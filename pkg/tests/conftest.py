import math

import pytest
from hypothesis import strategies as st

from focusplan import ActuatorCalibration, LensSpec, slice_forward


@pytest.fixture
def experiment():
    return LensSpec(focal_length=25.0, f_number=4.6, coc=0.02, near_focus_limit=250.0)


@pytest.fixture
def table_plan(experiment):
    return slice_forward(experiment)


@pytest.fixture
def cal10():
    return ActuatorCalibration(lens_at_code_max=27.78, lens_at_code_min=25.09, code_max=1023)


@st.composite
def lens_specs(draw, near_frac=st.floats(0.0, 1.0)):
    """Specs over f in [2, 100], N in [1, 16], c in [0.001, 0.05], S_n in (1.5f, 0.9H)."""
    f = draw(st.floats(2.0, 100.0))
    N = draw(st.floats(1.0, 16.0))
    c = draw(st.floats(0.001, 0.05))
    H = f * f / (N * c) + f
    lo, hi = 1.5 * f, 0.9 * H
    t = draw(near_frac)
    # log-uniform so the near end is not starved
    s_n = math.exp(math.log(lo) + t * (math.log(hi) - math.log(lo)))
    s_n = min(max(s_n, lo * (1 + 1e-9)), hi * (1 - 1e-9))
    return LensSpec(f, N, c, s_n)
