import numpy as np
import pytest

import skinbath as sb


@pytest.fixture
def fig1_lattice():
    return sb.LatticeSpec(m=1000, nu=10.0, gamma=5.0)


def build_system(nu, gamma, emitters, m=1000, loss=0.0, boundary=sb.Boundary.OBC):
    return sb.SystemSpec(
        sb.LatticeSpec(m=m, nu=nu, gamma=gamma, onsite_loss=loss, boundary=boundary),
        tuple(emitters),
    )


def simulate(spec, t_max, samples=2000, excite=None, record_states=False, **cfg_kwargs):
    h = sb.assemble_hamiltonian(spec)
    cfg = sb.IntegratorConfig(sample_times=sb.uniform_times(t_max, samples), **cfg_kwargs)
    state0 = sb.initial_state(spec, excite or spec.labels[0])
    return sb.evolve(h, state0, cfg, record_states=record_states)


def log_population(traj, label="b"):
    obs = sb.extract_observables(traj, "population")
    return obs.log10[:, traj.labels.index(label)] * np.log(10.0)


def fitted_rate(traj, label="b", t_from=2.0, t_to=None):
    """Exponential decay rate from a least-squares fit of ln P."""
    ts = traj.times
    t_to = ts[-1] if t_to is None else t_to
    window = (ts >= t_from) & (ts <= t_to)
    lnp = log_population(traj, label)
    return -np.polyfit(ts[window], lnp[window], 1)[0]
