import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import eigen_2x2
from tpjc.errors import DispersiveError, ParameterError
from tpjc.model import ModelParams, RawCouplings, build_params, params_from_ratios
from tpjc.spectrum import (
    block_hamiltonian,
    dispersive_eigenvalues,
    dispersive_report,
    effective_diagonal,
    exact_eigenvalues,
)


def manual(omega=1.0, omega0=2.5, beta1=0.0, beta2=0.0, lam=0.0, detuning=None, kappa=0.0):
    """ModelParams without raw couplings, for hand-picked (beta, lambda, detuning)."""
    if detuning is None:
        detuning = omega0 - 2 * omega
    gap = detuning - beta2
    shift = beta1 * beta2 / gap if gap else 0.0
    return ModelParams(beta1=beta1, beta2=beta2, omega_shift=shift, kappa=kappa, alpha=1.0,
                       detuning=detuning, lambda_eff=lam, omega=omega, omega0=omega0)


def symmetric():
    return build_params(raw=RawCouplings(omega=1.0, omega0=2.5, lambda1=0.1, lambda2=0.1, delta_int=1.0))


def test_resonant_block_no_stark():
    p = manual(omega=1.0, omega0=2.0, lam=0.3)
    b = block_hamiltonian(p, 0)
    assert b.h11 == b.h22 == 1.0
    assert b.h12 == pytest.approx(0.3 * math.sqrt(2), rel=1e-15)


def test_block_substitution_n1():
    # exact rational substitution: omega=1, omega0=5/2, beta=1/100, lambda=1/100, detuning=1/2
    w, w0, b, dl = Fraction(1), Fraction(5, 2), Fraction(1, 100), Fraction(1, 2)
    n = 1
    h11 = w * n + w0 / 2 + b * n
    h22 = w * n + w0 / 2 - dl + b * (n + 2)
    blk = block_hamiltonian(symmetric(), n)
    assert blk.h11 == pytest.approx(float(h11), abs=1e-15)
    assert blk.h22 == pytest.approx(float(h22), abs=1e-15)
    assert blk.h12 == pytest.approx(0.01 * math.sqrt(6), rel=1e-14)
    assert blk.h12 == blk.h21


def test_h22_is_g_level_energy():
    # |g, n+2> energy from the full Hamiltonian: omega(n+2) - omega0/2 + beta1(n+2)
    p = symmetric()
    for n in range(6):
        assert block_hamiltonian(p, n).h22 == pytest.approx(
            p.omega * (n + 2) - p.omega0 / 2 + p.beta1 * (n + 2), abs=1e-13)


def test_zero_coupling_block_diagonal():
    blk = block_hamiltonian(manual(beta1=0.2, beta2=0.1, lam=0.0), 3)
    assert blk.h12 == 0


def test_ratio_params_rejected():
    with pytest.raises(ParameterError):
        block_hamiltonian(params_from_ratios(0.04, 0.02), 0)


@pytest.mark.parametrize("n", [0, 1, 4])
@pytest.mark.parametrize("detuning", [0.7, -0.7])
def test_uncoupled_eigenvalues(n, detuning):
    p = manual(detuning=detuning, omega0=2.0 + detuning)
    ep, em = exact_eigenvalues(block_hamiltonian(p, n), p)
    base = p.omega * n + p.omega0 / 2
    # E_plus stays on the |e,n> branch whichever level is higher
    assert ep == pytest.approx(base, abs=1e-13)
    assert em == pytest.approx(base - detuning, abs=1e-13)


def test_equal_beta_at_detuning_beta():
    p = manual(beta1=0.3, beta2=0.3, detuning=0.3, omega0=2.3, lam=0.3)
    for n in range(5):
        blk = block_hamiltonian(p, n)
        got = sorted(exact_eigenvalues(blk, p), reverse=True)
        np.testing.assert_allclose(got, eigen_2x2(blk.h11, blk.h22, blk.h12), atol=1e-12)


@settings(max_examples=300, deadline=None)
@given(w=st.floats(0, 5), w0=st.floats(0, 10), l1=st.floats(0.01, 1), l2=st.floats(0.01, 1),
       dint=st.one_of(st.floats(0.1, 20), st.floats(-20, -0.1)), n=st.integers(0, 30))
def test_exact_vs_2x2(w, w0, l1, l2, dint, n):
    try:
        p = build_params(raw=RawCouplings(omega=w, omega0=w0, lambda1=l1, lambda2=l2, delta_int=dint))
    except ParameterError:
        return
    blk = block_hamiltonian(p, n)
    got = exact_eigenvalues(blk, p)
    ref = eigen_2x2(blk.h11, blk.h22, blk.h12)
    scale = max(1.0, abs(blk.h11), abs(blk.h22), abs(blk.h12))
    assert max(got) == pytest.approx(ref[0], abs=1e-12 * scale)
    assert min(got) == pytest.approx(ref[1], abs=1e-12 * scale)
    assert got[0] + got[1] == pytest.approx(blk.trace, rel=1e-10, abs=1e-12)
    assert got[0] * got[1] == pytest.approx(blk.det, rel=1e-10, abs=1e-10 * scale * scale)
    np.testing.assert_allclose(sorted(got), np.linalg.eigvalsh(blk.matrix), atol=1e-12 * scale)


def test_dispersive_no_stark():
    p = manual(beta1=0.0, beta2=0.0, detuning=0.5, omega0=2.5)
    for n in range(4):
        ep, em = dispersive_eigenvalues(p, n)
        assert ep == pytest.approx(p.omega * n + p.omega0 / 2)
        assert em == pytest.approx(p.omega * n + p.omega0 / 2 - 0.5)


def test_dispersive_n0():
    p = symmetric()
    ep, _ = dispersive_eigenvalues(p, 0)
    assert ep - p.omega0 / 2 == pytest.approx(2 * p.omega_shift, abs=1e-15)


def test_dispersive_rejects_invalid():
    p = manual(beta1=0.2, beta2=0.1, detuning=1.0, omega0=3.0)
    with pytest.raises(DispersiveError):
        dispersive_eigenvalues(p, 3)


def _sweep_params(ratio, n, b1=0.1, b2=0.13):
    # b1 (n+2) != b2 (n+1) for integer n, so the leading error term never cancels
    gap = max(b1 * (n + 2), b2 * (n + 1)) / ratio
    dl = gap + b2
    return build_params(raw=RawCouplings(omega=1.0, omega0=dl + 2.0, lambda1=math.sqrt(b1),
                                         lambda2=math.sqrt(b2), delta_int=1.0))


def dispersive_error(ratio, n):
    p = _sweep_params(ratio, n)
    ex = exact_eigenvalues(block_hamiltonian(p, n), p)
    di = dispersive_eigenvalues(p, n)
    return max(abs(ex[0] - di[0]), abs(ex[1] - di[1])), abs(p.detuning - p.beta2)


def dispersive_slope(n=2):
    ratios = np.logspace(np.log10(0.05), np.log10(5e-5), 13)
    errs = [dispersive_error(r, n)[0] for r in ratios]
    return np.polyfit(np.log(ratios), np.log(errs), 1)[0]


@pytest.mark.parametrize("n", [0, 2, 5])
def test_small_ratio_error_bound(n):
    err, gap = dispersive_error(1e-3, n)
    assert err <= 1e-3**2 * gap


@pytest.mark.parametrize("n", [0, 1, 3, 5])
def test_dispersive_converges_quadratically(n):
    assert abs(dispersive_slope(n) - 2.0) <= 0.2


def test_report_no_stark():
    r = dispersive_report(manual(detuning=0.5), 10)
    assert r.valid
    assert all(a == 0 and b == 0 for a, b in r.ratios)
    assert len(r.ratios) == 11


def test_report_invalid():
    # beta1 (n_max + 2) / |delta - beta2| = 0.05 * 10 / 1 = 0.5
    p = manual(beta1=0.05, beta2=0.0, detuning=1.0, omega0=3.0)
    r = dispersive_report(p, 8, threshold=0.1)
    assert r.ratios[-1][0] == pytest.approx(0.5)
    assert not r.valid


def test_report_fig1_ratio_params():
    p = params_from_ratios(kappa=0.04, beta_diff=0.02, nbar=1.0, beta1=1.0)
    r = dispersive_report(p, 5)
    # detuning - beta2 = beta1 beta2 / Omega = 1.02
    assert r.ratios[0][0] == pytest.approx(2 / 1.02)
    assert not r.valid


def test_report_singular():
    p = manual(beta1=0.1, beta2=0.1, detuning=0.1, omega0=2.1)
    with pytest.raises(ParameterError):
        dispersive_report(p, 3)


def test_report_bad_threshold():
    with pytest.raises(ValueError):
        dispersive_report(symmetric(), 3, threshold=1.5)


def test_effective_diagonal_values():
    p = symmetric()
    assert effective_diagonal(p, 0, "g") == pytest.approx(-p.omega0 / 2)
    assert effective_diagonal(p, 0, "e") == pytest.approx(p.omega0 / 2 + 2 * p.omega_shift)
    with pytest.raises(ValueError):
        effective_diagonal(p, 0, "x")


@pytest.mark.parametrize("params", [symmetric(), _sweep_params(0.01, 3)])
def test_effective_matches_dispersive(params):
    for n in range(6):
        if not dispersive_report(params, n).valid:
            continue
        ep, em = dispersive_eigenvalues(params, n)
        assert effective_diagonal(params, n, "e") == pytest.approx(ep, rel=1e-13, abs=1e-13)
        assert effective_diagonal(params, n + 2, "g") == pytest.approx(em, rel=1e-13, abs=1e-13)
