import math

import numpy as np
import pytest

import skinbath as sb
from skinbath import BranchAmbiguityError, SelfEnergyQuery, SpecError
from conftest import build_system, fitted_rate, simulate

T_R, T_L = 15.0, 5.0  # nu = 10, gamma = 5
J = math.sqrt(T_R * T_L)
BETA = math.sqrt(3.0)


def test_matched_d2_interference_zero():
    res = sb.sigma_giant(
        SelfEnergyQuery(z=0.0, g_n=1.0, g_np=BETA**-2, d=2, t_r=T_R, t_l=T_L)
    )
    assert abs(res.sigma_b) < 1e-10


def test_small_emitter_band_center():
    res = sb.sigma_giant(SelfEnergyQuery(z=0.0, g_n=1.0, t_r=T_R, t_l=T_L))
    assert res.sigma_b == pytest.approx(-1j / (2 * math.sqrt(75)), rel=1e-12)
    assert res.decay_rate == pytest.approx(1.0 / math.sqrt(75), rel=1e-12)


def test_matched_d4_enhanced():
    res = sb.sigma_giant(
        SelfEnergyQuery(z=0.0, g_n=1.0, g_np=BETA**-4, d=4, t_r=T_R, t_l=T_L)
    )
    expected = -1j * (1 + BETA**-8) / math.sqrt(75)
    assert res.sigma_b == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("d,expect_zero", [(2, True), (6, True), (4, False), (0, False)])
def test_resonant_matched_zeros(d, expect_zero):
    res = sb.sigma_resonant(1.0, BETA**-d, d, T_R, T_L)
    if expect_zero:
        assert abs(res.sigma_b) < 1e-10
    else:
        assert abs(res.sigma_b) > 1e-3


def test_resonant_beta1_d1_retarded_value():
    # num = g^2 [2 + (-i)*2] -> Sigma = -g^2 (1 + i)/t ; decay rate 2 g^2/t.
    t = 4.0
    res = sb.sigma_resonant(1.0, 1.0, 1, t, t)
    assert res.sigma_b == pytest.approx(-(1 + 1j) / t, rel=1e-12)
    num = sb.sigma_numeric(1e-7j * t, [(0, 1.0), (1, 1.0)], t, t)
    assert num == pytest.approx(res.sigma_b, rel=1e-4)


def test_resonant_equals_giant_at_band_center():
    for d in range(6):
        g_np = 0.55
        a = sb.sigma_resonant(1.0, g_np, d, T_R, T_L).sigma_b
        b = sb.sigma_giant(
            SelfEnergyQuery(z=0.0, g_n=1.0, g_np=g_np, d=d, t_r=T_R, t_l=T_L)
        ).sigma_b
        assert a == pytest.approx(b, abs=1e-12)


def test_pair_braided_band_center_values():
    res = sb.sigma_pair_braided(0.0, 1.0, 30.0, 10.0)  # nu=20, gamma=10
    assert res.sigma_bc == pytest.approx(-1 / 30, rel=1e-12)
    assert res.sigma_cb == pytest.approx(-1 / 90, rel=1e-12)
    assert abs(res.sigma_b) < 1e-14 and abs(res.sigma_c) < 1e-14
    assert res.sigma_bc.imag == 0 and res.sigma_cb.imag == 0
    report = sb.rates(res)
    assert report.nonreciprocity_ratio == pytest.approx(3.0, rel=1e-12)


def test_pair_braided_hermitian_limit_reciprocal():
    res = sb.sigma_pair_braided(0.0, 1.0, 10.0, 10.0)
    assert res.sigma_bc == pytest.approx(res.sigma_cb, rel=1e-14)


def test_pair_braided_z_dependence_vs_numeric():
    z = 0.3 * 2 * J + 1j * 1e-6 * J
    res = sb.sigma_pair_braided(z, 1.0, T_R, T_L)
    b = [(0, 1.0), (2, BETA**-2)]
    c = [(1, 1.0), (3, BETA**-2)]
    nbc = sb.sigma_numeric(z, b, T_R, T_L, col_couplings=c)
    ncb = sb.sigma_numeric(z, c, T_R, T_L, col_couplings=b)
    assert res.sigma_bc == pytest.approx(nbc, rel=1e-8)
    assert res.sigma_cb == pytest.approx(ncb, rel=1e-8)
    nb = sb.sigma_numeric(z, b, T_R, T_L)
    assert res.sigma_b == pytest.approx(nb, rel=1e-8)


def test_pair_general_reduces_to_braided():
    gen = sb.sigma_pair_general(1.0, 1, 2, 30.0, 10.0)
    assert gen.sigma_bc == pytest.approx(-1 / 30, rel=1e-12)
    assert gen.sigma_cb == pytest.approx(-1 / 90, rel=1e-12)


def test_pair_general_even_dprime_vanishes():
    gen = sb.sigma_pair_general(1.0, 2, 2, T_R, T_L)
    assert gen.sigma_bc == 0 and gen.sigma_cb == 0


def test_pair_general_equal_separations_reciprocal():
    gen = sb.sigma_pair_general(1.0, 1, 1, T_R, T_L)
    assert gen.sigma_cb == pytest.approx(gen.sigma_bc, rel=1e-14)


@pytest.mark.parametrize("d_prime", [1, 3])
@pytest.mark.parametrize("d_dprime", [1, 2, 3])
def test_pair_general_ratio_law(d_prime, d_dprime):
    gen = sb.sigma_pair_general(1.0, d_prime, d_dprime, T_R, T_L)
    ratio = gen.sigma_cb / gen.sigma_bc
    assert abs(ratio - BETA ** (2 * (d_prime - d_dprime))) < 1e-12


def test_numeric_small_emitter_oracle():
    z = 1e-6j * J
    num = sb.sigma_numeric(z, [(0, 0.7)], T_R, T_L)
    exact = -1j * 0.7**2 / (2 * J)
    assert abs(num - exact) / abs(exact) < 1e-3


def test_numeric_matched_d2_near_zero():
    z = 1e-6j * J
    num = sb.sigma_numeric(z, [(0, 1.0), (2, BETA**-2)], T_R, T_L)
    assert abs(num) < 1e-3 / J


def test_numeric_stacked_coupling_constructive():
    # Two coincident points in a Hermitian bath: coherent sum (g+g)^2.
    t = 3.0
    single = sb.sigma_numeric(1e-7j * t, [(0, 1.0)], t, t)
    stacked = sb.sigma_numeric(1e-7j * t, [(0, 1.0), (0, 1.0)], t, t)
    assert stacked == pytest.approx(4 * single, rel=1e-6)


def test_numeric_rejects_real_axis_inside_band():
    with pytest.raises(SpecError):
        sb.sigma_numeric(0.0, [(0, 1.0)], T_R, T_L)


def test_branch_consistency_over_band():
    eps = 1e-6 * J
    for delta in np.linspace(-0.85 * 2 * J, 0.85 * 2 * J, 17):
        z = delta + 1j * eps
        a = sb.sigma_giant(
            SelfEnergyQuery(z=z, g_n=1.0, g_np=0.55, d=3, t_r=T_R, t_l=T_L)
        ).sigma_b
        n = sb.sigma_numeric(z, [(0, 1.0), (3, 0.55)], T_R, T_L)
        assert abs(a - n) / abs(n) < 1e-3


def test_continuity_across_band_interior():
    deltas = np.linspace(-0.9 * 2 * J, 0.9 * 2 * J, 400)
    vals = np.array(
        [
            sb.sigma_giant(
                SelfEnergyQuery(z=d, g_n=1.0, g_np=0.4, d=2, t_r=T_R, t_l=T_L)
            ).sigma_b
            for d in deltas
        ]
    )
    jumps = np.abs(np.diff(vals))
    assert np.max(jumps) < 0.05 * np.max(np.abs(vals))


def test_band_edge_ambiguity_raises():
    with pytest.raises(BranchAmbiguityError):
        sb.sigma_giant(SelfEnergyQuery(z=2 * J, g_n=1.0, t_r=T_R, t_l=T_L))


def test_real_axis_outside_band_is_real():
    res = sb.sigma_giant(SelfEnergyQuery(z=3.0 * J, g_n=1.0, t_r=T_R, t_l=T_L))
    assert res.sigma_b.imag == 0
    assert res.sigma_b.real > 0  # repulsive shift above the band


def test_hermitian_reduction_decay_rate_vs_simulation():
    # beta = 1 textbook rate g^2/J at band center, checked against a full
    # lattice run at weak coupling.
    g = 0.2
    nu = 1.0
    res = sb.sigma_giant(SelfEnergyQuery(z=0.0, g_n=g, t_r=nu, t_l=nu))
    assert res.decay_rate == pytest.approx(g * g / nu, rel=1e-12)
    spec = build_system(nu, 0.0, [sb.small_emitter("b", 150, g)], m=301)
    traj = simulate(spec, 60.0, samples=600)
    rate = fitted_rate(traj, t_from=5.0)
    assert rate == pytest.approx(res.decay_rate, rel=0.05)


def test_dfi_condition_all_imaginary_parts_vanish():
    res = sb.sigma_pair_braided(0.0, 1.0, T_R, T_L)
    g2 = 1.0
    for s in (res.sigma_b, res.sigma_c, res.sigma_bc, res.sigma_cb):
        assert abs(s.imag) < 1e-10 * g2


def test_rates_report():
    single = sb.SelfEnergyResult(sigma_b=-0.5j, branch="test")
    rep = sb.rates(single)
    assert rep.decay_rate == pytest.approx(1.0)
    assert rep.lamb_shift == 0.0
    pair = sb.SelfEnergyResult(
        sigma_b=0j, branch="t", sigma_c=0j, sigma_bc=-1 / 30 + 0j, sigma_cb=-1 / 90 + 0j
    )
    assert sb.rates(pair).nonreciprocity_ratio == pytest.approx(3.0)
    zero = sb.SelfEnergyResult(sigma_b=0j, branch="t")
    assert sb.rates(zero).decay_free
    broken = sb.SelfEnergyResult(
        sigma_b=0j, branch="t", sigma_c=0j, sigma_bc=1.0 + 0j, sigma_cb=0j
    )
    rep = sb.rates(broken)
    assert rep.nonreciprocity_ratio is None and "undefined" in rep.ratio_flag


def test_query_rejects_nonpositive_hopping():
    with pytest.raises(SpecError):
        SelfEnergyQuery(z=0.0, g_n=1.0, t_r=1.0, t_l=-1.0)
