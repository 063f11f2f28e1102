import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sedhmm.sediment import Grass, MeyerPeterMuller, spread_angle_devriend
from sedhmm.scaling import Scales


def mpm_with_uc(u_cr, eps=0.001 / 0.6):
    return MeyerPeterMuller.from_critical_velocity(u_cr, eps)


def test_grass_examples():
    law = Grass(m=3.0)
    assert law.qb_tilde(2.0) == pytest.approx(4.0)
    assert law.lambda_b_tilde(2.0) == pytest.approx(12.0)
    assert np.all(Grass(m=1.0).lambda_b_tilde(np.array([0.0, 0.3, 7.0])) == 1.0)


def test_grass_epsilon_matches_dune_setup():
    assert Grass(A_g=0.001, gamma=0.4).epsilon == pytest.approx(0.001 / 0.6, rel=1e-15)


def test_mpm_threshold_examples():
    law = mpm_with_uc(1.0)
    assert law.critical_velocity() == pytest.approx(1.0, rel=1e-12)
    assert law.qb_tilde(0.5) == 0.0
    assert law.lambda_b_tilde(0.5) == 0.0
    # (1.5625 - 1)^1.5 / 1.25 = 0.75^3 / 1.25 exactly
    assert law.qb_tilde(1.25) == pytest.approx(0.3375, rel=1e-12)


def test_mpm_critical_velocity_closed_form():
    law = MeyerPeterMuller(s=2.65, d_s=0.001, f=0.1, tau_cr_star=0.047, g=9.81)
    assert law.critical_velocity() == pytest.approx(0.24672, abs=5e-5)
    assert MeyerPeterMuller(tau_cr_star=0.0).critical_velocity() == 0.0
    assert Grass().critical_velocity() == 0.0


def test_mpm_epsilon_closed_form():
    law = MeyerPeterMuller(s=2.65, f=0.1, gamma=0.4, g=9.81)
    expected = (1 / 0.6) / (1.65 * 9.81) * math.sqrt(0.1**3 / 8)
    assert law.epsilon == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("u_cr", [0.5, 1.0, 1.04])
def test_from_critical_velocity_round_trip(u_cr):
    law = mpm_with_uc(u_cr, eps=0.002)
    assert law.critical_velocity() == pytest.approx(u_cr, rel=1e-12)
    assert law.epsilon == pytest.approx(0.002, rel=1e-12)


@pytest.mark.parametrize("kwargs", [dict(m=0.5), dict(m=4.5), dict(A_g=-1.0), dict(gamma=1.0)])
def test_grass_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        Grass(**kwargs)


@pytest.mark.parametrize("kwargs", [dict(s=1.0), dict(f=0.0), dict(d_s=0.0),
                                    dict(tau_cr_star=-0.1)])
def test_mpm_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        MeyerPeterMuller(**kwargs)


laws = st.one_of(
    st.builds(Grass, A_g=st.floats(1e-4, 1.0), m=st.floats(1.0, 4.0)),
    st.builds(mpm_with_uc, st.floats(0.0, 2.0)),
)


@given(laws, st.floats(0.01, 5.0))
@settings(max_examples=200, deadline=None)
def test_lambda_is_derivative_of_flux(law, speed):
    uc = law.critical_velocity()
    if abs(speed - uc) < 1e-2:
        return
    h = 1e-6 * max(speed, 1e-2)
    f = lambda s: s * law.qb_tilde(s)
    fd = (f(speed + h) - f(speed - h)) / (2 * h)
    exact = float(law.lambda_b_tilde(speed))
    assert exact == pytest.approx(fd, rel=1e-6, abs=1e-9)


@given(laws, st.floats(0.0, 5.0))
@settings(max_examples=200, deadline=None)
def test_flux_factor_non_negative_and_threshold(law, speed):
    q = float(law.qb_tilde(speed))
    assert q >= 0.0
    # no transport at or below the threshold (Grass with m=1 has q~ = 1 at rest)
    if speed <= law.critical_velocity():
        assert speed * q == 0.0


@given(st.floats(0.05, 2.0))
def test_mpm_continuous_at_threshold(u_cr):
    law = mpm_with_uc(u_cr)
    for d in (1e-7, 1e-9):
        assert float(law.qb_tilde(u_cr * (1 + d))) < 1e-9
        assert float(law.lambda_b_tilde(u_cr * (1 + d))) < 1e-2


@given(laws, st.floats(0.1, 3.0), st.floats(0.5, 20.0), st.floats(0.5, 5.0))
@settings(max_examples=100, deadline=None)
def test_rescaling_is_exact(law, speed, H, U):
    """The dimensionless bed flux equals the dimensional one in scaled units."""
    sc = Scales(1000.0, H, U)
    scaled = sc.law(law)
    # q_b scales with H * U (a discharge); rescaled velocity is speed / U
    dimensional = law.bedload(speed)
    assert scaled.bedload(speed / U) * H * U == pytest.approx(dimensional, rel=1e-10, abs=1e-14 * H * U)


def test_devriend_angle():
    assert spread_angle_devriend(3.0) == pytest.approx(math.degrees(math.atan(6 * math.sqrt(3) / 26)))
    assert spread_angle_devriend(3.0) == pytest.approx(21.78, abs=0.01)
