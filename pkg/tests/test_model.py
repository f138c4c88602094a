import math

import numpy as np
import pytest

import skinbath as sb
from skinbath import Regime, SpecError


def test_derive_parameters_fig1():
    d = sb.derive_parameters(sb.LatticeSpec(m=100, nu=10, gamma=5))
    assert d.t_r == 15 and d.t_l == 5
    assert d.beta == pytest.approx(math.sqrt(3), rel=1e-15)


def test_derive_parameters_hermitian_limit():
    d = sb.derive_parameters(sb.LatticeSpec(m=100, nu=10, gamma=0))
    assert d.t_r == d.t_l == 10
    assert d.beta == 1.0


def test_derive_parameters_absolutely_unstable():
    d = sb.derive_parameters(sb.LatticeSpec(m=100, nu=20, gamma=20.5))
    assert d.t_r == 40.5 and d.t_l == -0.5
    assert d.beta is None


def test_reject_nonpositive_t_r():
    with pytest.raises(SpecError):
        sb.LatticeSpec(m=100, nu=1.0, gamma=-1.0)
    with pytest.raises(SpecError):
        sb.LatticeSpec(m=100, nu=1.0, gamma=-2.0)


@pytest.mark.parametrize(
    "nu,gamma,loss,expected",
    [
        (10, 5, 0.0, Regime.CONVECTIVELY_UNSTABLE),
        (20, 20, 0.0, Regime.TRANSITION_POINT),
        (10, 5, 10.0, Regime.STABLE),
        (20, 20.5, 0.0, Regime.ABSOLUTELY_UNSTABLE),
        (10, 0, 0.0, Regime.STABLE),
    ],
)
def test_classify_regime(nu, gamma, loss, expected):
    assert sb.classify_regime(sb.LatticeSpec(m=10, nu=nu, gamma=gamma, onsite_loss=loss)) == expected


def test_classify_consistent_with_derive():
    # Stable <=> 2|gamma| <= loss; otherwise the sign of t_L picks the branch.
    for nu in (1.0, 5.0, 20.0):
        for gamma in (-0.5, 0.0, 0.7 * nu, nu, 1.3 * nu):
            for loss in (0.0, abs(gamma), 2 * abs(gamma), 3 * abs(gamma) + 0.1):
                lat = sb.LatticeSpec(m=5, nu=nu, gamma=gamma, onsite_loss=loss)
                regime = sb.classify_regime(lat)
                if 2 * abs(gamma) <= loss:
                    assert regime == Regime.STABLE
                elif lat.t_l == 0:
                    assert regime == Regime.TRANSITION_POINT
                elif lat.t_l < 0:
                    assert regime == Regime.ABSOLUTELY_UNSTABLE
                else:
                    assert regime == Regime.CONVECTIVELY_UNSTABLE


def test_matching_ratio_values():
    assert sb.matching_ratio(math.sqrt(3), 2) == pytest.approx(1 / 3, rel=1e-14)
    assert sb.matching_ratio(1.7, 0) == 1.0
    assert sb.matching_ratio(math.sqrt(2), 2) == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("d", range(17))
def test_matching_ratio_inverse_property(d):
    beta = math.sqrt(3)
    assert sb.matching_ratio(beta, d) * beta**d == pytest.approx(1.0, rel=1e-12)


def test_assemble_bare_chain_matrix():
    spec = sb.SystemSpec(sb.LatticeSpec(m=3, nu=1.0, gamma=0.5))
    h = sb.assemble_hamiltonian(spec).to_dense()
    expected = np.array([[0, 0.5, 0], [1.5, 0, 0.5], [0, 1.5, 0]], dtype=complex)
    np.testing.assert_allclose(h, expected)


def test_assemble_hermitian_limit_self_adjoint():
    spec = sb.SystemSpec(
        sb.LatticeSpec(m=8, nu=1.0, gamma=0.0),
        (sb.giant_emitter("b", 2, 2, 1.0, 0.5),),
    )
    h = sb.assemble_hamiltonian(spec).to_dense()
    np.testing.assert_array_equal(h, h.conj().T)


def test_assemble_border_entries():
    spec = sb.SystemSpec(
        sb.LatticeSpec(m=5, nu=10.0, gamma=5.0),
        (sb.giant_emitter("b", 1, 2, 1.0, 1 / 3),),
    )
    h = sb.assemble_hamiltonian(spec).to_dense()
    assert h[5, 1] == h[1, 5] == 1.0
    assert h[5, 3] == h[3, 5] == pytest.approx(1 / 3)


def test_matvec_basis_vector_pattern():
    spec = sb.SystemSpec(
        sb.LatticeSpec(m=9, nu=2.0, gamma=0.5),
        (sb.small_emitter("b", 4, 0.7),),
    )
    h = sb.assemble_hamiltonian(spec)
    e4 = np.zeros(h.dimension, dtype=complex)
    e4[4] = 1.0
    out = h.matvec(e4)
    assert set(np.nonzero(out)[0]) == {3, 5, 9}


def test_matvec_matches_dense_and_sparse():
    spec = sb.SystemSpec(
        sb.LatticeSpec(m=12, nu=2.0, gamma=0.7, onsite_loss=0.3, boundary=sb.Boundary.PBC),
        (sb.giant_emitter("b", 3, 2, 1.0, 0.4), sb.small_emitter("c", 8, 0.2)),
    )
    h = sb.assemble_hamiltonian(spec)
    rng = np.random.default_rng(7)
    v = rng.standard_normal(h.dimension) + 1j * rng.standard_normal(h.dimension)
    dense = h.to_dense() @ v
    np.testing.assert_allclose(h.matvec(v), dense, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(h.to_sparse().dot(v), dense, rtol=1e-13, atol=1e-13)


def test_pbc_corner_entries():
    lat = sb.LatticeSpec(m=6, nu=1.0, gamma=0.25, boundary=sb.Boundary.PBC)
    h = sb.assemble_hamiltonian(sb.SystemSpec(lat)).to_dense()
    assert h[0, 5] == lat.t_r and h[5, 0] == lat.t_l
    h_obc = sb.assemble_hamiltonian(
        sb.SystemSpec(sb.LatticeSpec(m=6, nu=1.0, gamma=0.25))
    ).to_dense()
    assert h_obc[0, 5] == 0 and h_obc[5, 0] == 0


def test_validate_valid_spec_is_empty():
    spec = sb.SystemSpec(
        sb.LatticeSpec(m=1000, nu=10, gamma=5),
        (sb.giant_emitter("b", 500, 2, 1.0, 1 / 3),),
    )
    assert sb.validate_spec(spec) == []


def test_validate_site_out_of_range():
    spec = sb.SystemSpec(
        sb.LatticeSpec(m=10, nu=10, gamma=5),
        (sb.small_emitter("b", -1, 1.0),),
    )
    report = sb.validate_spec(spec)
    assert len(report) == 1 and "site out of range" in report[0]


def test_validate_duplicate_label():
    spec = sb.SystemSpec(
        sb.LatticeSpec(m=10, nu=10, gamma=5),
        (sb.small_emitter("b", 2, 1.0), sb.small_emitter("b", 5, 1.0)),
    )
    report = sb.validate_spec(spec)
    assert any("duplicate label" in r for r in report)


def test_assemble_rejects_invalid():
    spec = sb.SystemSpec(
        sb.LatticeSpec(m=10, nu=10, gamma=5),
        (sb.small_emitter("b", 99, 1.0),),
    )
    with pytest.raises(SpecError, match="site out of range"):
        sb.assemble_hamiltonian(spec)


def test_emitter_spec_rejects_bad_couplings():
    with pytest.raises(SpecError):
        sb.EmitterSpec("b", 0.0, ())
    with pytest.raises(SpecError):
        sb.EmitterSpec(
            "b", 0.0, (sb.CouplingPoint(3, 1.0), sb.CouplingPoint(3, 0.5))
        )
    with pytest.raises(SpecError):
        sb.CouplingPoint(3, -1.0)
