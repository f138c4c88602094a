import math

import numpy as np
import pytest

import skinbath as sb
from skinbath import SingularOperatorError, SpecError
from skinbath.spectra import obc_interior_residual


def test_pbc_hermitian_band_real():
    spec = sb.pbc_spectrum(sb.LatticeSpec(m=64, nu=10, gamma=0), k_count=128)
    e = spec.energies
    assert np.max(np.abs(e.imag)) < 1e-12
    assert np.min(e.real) >= -20 - 1e-12 and np.max(e.real) <= 20 + 1e-12


def test_pbc_quarter_point_value():
    spec = sb.pbc_spectrum(sb.LatticeSpec(m=64, nu=10, gamma=5), k_count=64)
    idx = np.argmin(np.abs(spec.k - math.pi / 2))
    assert spec.energies[idx] == pytest.approx(-10j, abs=1e-12)


def test_pbc_matches_dense_ring():
    lat = sb.LatticeSpec(m=64, nu=10, gamma=5, boundary=sb.Boundary.PBC)
    h = sb.assemble_hamiltonian(sb.SystemSpec(lat)).to_dense()
    dense = np.linalg.eigvals(h)
    formula = sb.pbc_spectrum(lat, k_count=64).energies
    # same multiset: match each formula point to a dense eigenvalue
    for e in formula:
        assert np.min(np.abs(dense - e)) < 1e-8


def test_pbc_lossy_touches_real_axis_from_below():
    spec = sb.pbc_spectrum(sb.LatticeSpec(m=64, nu=10, gamma=5, onsite_loss=10), k_count=2048)
    assert spec.max_imag == pytest.approx(0.0, abs=1e-14)
    assert np.max(spec.energies.imag) <= 1e-12


def test_pbc_ellipse_invariant():
    lat = sb.LatticeSpec(m=32, nu=10, gamma=5, onsite_loss=3.0)
    spec = sb.pbc_spectrum(lat, k_count=257)
    e = spec.energies
    lhs = (e.real / (lat.t_r + lat.t_l)) ** 2 + (
        (e.imag + lat.onsite_loss) / (lat.t_r - lat.t_l)
    ) ** 2
    np.testing.assert_allclose(lhs, 1.0, atol=1e-12)


def test_obc_modes_hermitian_standing_waves():
    lat = sb.LatticeSpec(m=12, nu=1.0, gamma=0.0)
    modes = sb.obc_modes(lat)
    n = np.arange(12)
    for mode in modes[:3]:
        expected = np.sin(mode.k * n) / math.sqrt(11 / 2)
        np.testing.assert_allclose(mode.profile, expected, atol=1e-12)


def test_obc_modes_interior_residual():
    lat = sb.LatticeSpec(m=20, nu=10, gamma=5)
    h = sb.assemble_hamiltonian(sb.SystemSpec(lat))
    for mode in sb.obc_modes(lat):
        assert obc_interior_residual(h, mode) < 1e-10


def test_obc_mode_count():
    assert len(sb.obc_modes(sb.LatticeSpec(m=1000, nu=10, gamma=5))) == 998


def test_obc_energies_match_interior_block_oracle():
    # The analytic modes pin nodes at n = 0 and M-1, so their energies are
    # exactly the spectrum of the interior (M-2)-site block.  Dense
    # eigenvalues of the raw skin block carry the eps * beta^M eigenvector
    # conditioning, so the tight comparison diagonalizes the gauge-similar
    # Hermitian block (hopping sqrt(t_R t_L), identical spectrum).
    m = 40
    lat = sb.LatticeSpec(m=m, nu=10, gamma=5)
    analytic = np.sort([mode.energy for mode in sb.obc_modes(lat)])
    j = math.sqrt(lat.t_r * lat.t_l)
    herm = sb.SystemSpec(sb.LatticeSpec(m=m - 2, nu=j, gamma=0.0))
    evals, _ = sb.dense_eigen_oracle(herm)
    assert np.max(np.abs(np.sort(evals.real) - analytic)) < 1e-8
    assert np.max(np.abs(evals.imag)) < 1e-8
    # the raw non-normal block agrees within its conditioning limit
    skin = sb.SystemSpec(sb.LatticeSpec(m=m - 2, nu=10, gamma=5))
    evals_skin, _ = sb.dense_eigen_oracle(skin)
    assert np.max(np.abs(np.sort(evals_skin.real) - analytic)) < 1e-5


def test_obc_energies_real():
    for mode in sb.obc_modes(sb.LatticeSpec(m=30, nu=10, gamma=5)):
        assert np.imag(mode.energy) == 0.0


def test_obc_rejects_nonpositive_t_l():
    with pytest.raises(SpecError):
        sb.obc_modes(sb.LatticeSpec(m=10, nu=10, gamma=10))


@pytest.mark.parametrize("gamma", [0.02, 5.0])
def test_skin_localization_right_half(gamma):
    lat = sb.LatticeSpec(m=40, nu=10, gamma=gamma)
    for mode in sb.obc_modes(lat):
        assert np.argmax(np.abs(mode.profile)) >= 20


def test_bordered_solve_tridiagonal_only_vs_dense():
    spec = sb.SystemSpec(sb.LatticeSpec(m=10, nu=2.0, gamma=0.5))
    h = sb.assemble_hamiltonian(spec)
    rng = np.random.default_rng(1)
    rhs = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    shift = 0.3 + 0.05j
    x = sb.bordered_tridiagonal_solve(h, rhs, shift=shift)
    a = h.to_dense() - shift * np.eye(10)
    xd = np.linalg.solve(a, rhs)
    assert np.linalg.norm(x - xd) / np.linalg.norm(xd) < 1e-12


def test_bordered_solve_with_emitter_residual():
    spec = sb.SystemSpec(
        sb.LatticeSpec(m=50, nu=2.0, gamma=0.5),
        (sb.giant_emitter("b", 20, 2, 1.0, 0.5),),
    )
    h = sb.assemble_hamiltonian(spec)
    rng = np.random.default_rng(2)
    rhs = rng.standard_normal(h.dimension) + 1j * rng.standard_normal(h.dimension)
    shift = 0.21 + 0.5j  # stays clear of the (near-real) spectrum
    x = sb.bordered_tridiagonal_solve(h, rhs, shift=shift)
    a = h.to_dense() - shift * np.eye(h.dimension)
    assert np.linalg.norm(a @ x - rhs) / np.linalg.norm(rhs) < 1e-12


def test_bordered_solve_singular_shift_raises():
    # A bare odd chain has an exact zero mode; shifting by 0 produces an
    # exactly singular lattice block and a zero pivot.
    spec = sb.SystemSpec(sb.LatticeSpec(m=9, nu=1.25, gamma=0.75))
    h = sb.assemble_hamiltonian(spec)
    with pytest.raises(SingularOperatorError, match="singular pivot"):
        sb.bordered_tridiagonal_solve(h, np.ones(9, dtype=complex), shift=0.0)


def test_bordered_solve_singular_emitter_block():
    # With an emitter pinned at E = 0 (even M, odd coupling site), shifting
    # exactly onto the eigenvalue makes the Schur complement singular.
    spec = sb.SystemSpec(
        sb.LatticeSpec(m=40, nu=20, gamma=10),
        (sb.small_emitter("b", 21, 1.0),),
    )
    h = sb.assemble_hamiltonian(spec)
    with pytest.raises(SingularOperatorError, match="singular pivot"):
        sb.bordered_tridiagonal_solve(h, np.ones(41, dtype=complex), shift=0.0)


def test_bordered_solve_rejects_pbc():
    spec = sb.SystemSpec(sb.LatticeSpec(m=10, nu=1.0, gamma=0.2, boundary=sb.Boundary.PBC))
    h = sb.assemble_hamiltonian(spec)
    with pytest.raises(SpecError):
        sb.bordered_tridiagonal_solve(h, np.ones(10, dtype=complex))


def _hidden_spec(m, site, nu=20.0, gamma=10.0, g=1.0):
    return sb.SystemSpec(
        sb.LatticeSpec(m=m, nu=nu, gamma=gamma), (sb.small_emitter("b", site, g),)
    )


def test_hidden_bound_state_converges_and_pins():
    result = sb.hidden_bound_state(_hidden_spec(400, 201))
    assert result.converged
    assert result.residual < 1e-10
    assert abs(result.energy.real) < 1e-6 * math.sqrt(600)


def test_hidden_bound_state_one_sided_profile():
    result = sb.hidden_bound_state(_hidden_spec(400, 201))
    prof = np.abs(result.lattice_profile)
    # negligible weight on the strong-tunneling side of the coupling point
    assert np.sum(prof[202:] ** 2) < 1e-20
    # monotone growth towards the coupling point on the occupied sublattice
    left = prof[:201]
    occupied = np.nonzero(left > 0)[0]
    assert occupied.size > 50
    assert np.all(np.diff(left[occupied]) > 0)


def test_hidden_bound_state_slope_matches_dense_oracle():
    # ln|psi| slope on the occupied sublattice equals ln(beta) per site; the
    # small dense system provides an independent reference.
    def one_sided_slope(profile, site):
        # Fit on amplitudes safely above the dense oracle's noise floor
        # (which also excludes the empty parity sublattice).
        prof = np.abs(profile[:site])
        occ = np.nonzero(prof > 1e-6 * prof.max())[0]
        fit = np.polyfit(occ, np.log(prof[occ]), 1)
        return fit[0]

    big = sb.hidden_bound_state(_hidden_spec(400, 201))
    slope_big = one_sided_slope(big.lattice_profile, 201)

    evals, evecs = sb.dense_eigen_oracle(_hidden_spec(60, 31))
    idx = np.argmin(np.abs(evals))
    dense_vec = evecs[:, idx]
    slope_dense = one_sided_slope(dense_vec[:60], 31)
    assert slope_big == pytest.approx(slope_dense, rel=0.05)
    assert slope_big == pytest.approx(math.log(math.sqrt(3.0)), rel=0.05)


def test_hidden_bound_state_giant_weight_decreases_with_separation():
    beta = math.sqrt(3.0)
    weights = {}
    for d in (2, 8):
        spec = sb.SystemSpec(
            sb.LatticeSpec(m=400, nu=20, gamma=10),
            (sb.giant_emitter("b", 201, d, 1.0, beta**-d),),
        )
        res = sb.hidden_bound_state(spec)
        assert res.converged
        prof = np.abs(res.lattice_profile)
        right = 201 + d
        weights[d] = float(np.sum(prof[right - 1 : right + 2] ** 2))
    assert weights[8] < weights[2]


def test_hidden_bound_state_residual_history_decreases():
    res = sb.hidden_bound_state(_hidden_spec(400, 201))
    tail = res.residual_history[-5:]
    assert all(b < a for a, b in zip(tail, tail[1:]))


def test_hidden_bound_state_braided_pair_splitting():
    # For the matched braided pair the pinned level splits by the cross
    # coupling: the block iteration converges onto one of the +-Omega states
    # with Omega = sqrt(Sigma_bc Sigma_cb) from the reduced model.
    beta2 = 3.0
    spec = sb.SystemSpec(
        sb.LatticeSpec(m=400, nu=20, gamma=10),
        (
            sb.EmitterSpec("b", 0.0, (sb.CouplingPoint(201, 1.0), sb.CouplingPoint(203, 1 / beta2))),
            sb.EmitterSpec("c", 0.0, (sb.CouplingPoint(202, 1.0), sb.CouplingPoint(204, 1 / beta2))),
        ),
    )
    res = sb.hidden_bound_state(spec)
    assert res.converged and res.residual < 1e-10
    omega = 1.0 / (30.0 * math.sqrt(3.0))
    assert abs(res.energy.real) == pytest.approx(omega, rel=0.05)


def test_hidden_bound_state_requires_emitter():
    with pytest.raises(SpecError):
        sb.hidden_bound_state(sb.SystemSpec(sb.LatticeSpec(m=10, nu=2, gamma=1)))


def test_dense_oracle_bare_chain_contains_analytic_modes():
    lat = sb.LatticeSpec(m=3, nu=2.0, gamma=0.5)
    evals, _ = sb.dense_eigen_oracle(sb.SystemSpec(lat))
    for mode in sb.obc_modes(lat):
        assert np.min(np.abs(evals - mode.energy)) < 1e-12


def test_dense_oracle_hermitian_real():
    evals, _ = sb.dense_eigen_oracle(
        sb.SystemSpec(sb.LatticeSpec(m=20, nu=1.0, gamma=0.0))
    )
    assert np.max(np.abs(evals.imag)) < 1e-10


def test_dense_oracle_matches_hidden_state():
    spec = _hidden_spec(60, 31)
    evals, evecs = sb.dense_eigen_oracle(spec)
    idx = np.argmin(np.abs(evals))
    vec = evecs[:, idx] / np.linalg.norm(evecs[:, idx])
    res = sb.hidden_bound_state(spec)
    overlap = abs(np.vdot(vec, res.profile))
    assert 1.0 - overlap < 1e-6


def test_dense_oracle_size_limit():
    with pytest.raises(SpecError):
        sb.dense_eigen_oracle(sb.SystemSpec(sb.LatticeSpec(m=150, nu=1, gamma=0)))
