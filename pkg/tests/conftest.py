import pytest

from tpjc.model import choose_truncation, params_from_ratios

FIG1 = {"a": 0.02, "b": 0.04, "c": 0.1}
FIG2 = {"a": 1.0, "b": 2.0, "c": 3.0}


@pytest.fixture
def fig1b():
    return params_from_ratios(kappa=0.04, beta_diff=0.02, nbar=1.0)


def dim_for(params, eps=1e-14):
    return choose_truncation(params.alpha, 0.0, eps) + 1
