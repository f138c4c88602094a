"""System specifications and single-excitation Hamiltonian assembly.

The bath is a Hatano-Nelson chain: nearest-neighbour tunneling with
asymmetric amplitudes t_R = nu + gamma (rightward transport, placed on the
sub-diagonal) and t_L = nu - gamma (leftward, super-diagonal), optionally
with a uniform on-site loss -i*loss on every lattice site.  Bosonic
emitters attach to one or more lattice sites with real couplings; in the
single-excitation sector the full operator is the lattice tridiagonal
block bordered by one row/column per emitter.

Energies are measured in units of the reference coupling (g_ref = 1) and
relative to the lattice band center, so emitter detunings default to 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpecError


class Boundary(enum.Enum):
    OBC = "obc"
    PBC = "pbc"


class Regime(enum.Enum):
    """Stability classification of the bath.

    Stable: the periodic spectrum lies in the closed lower half plane
    (2|gamma| <= loss), no net amplification anywhere.
    ConvectivelyUnstable: t_R > t_L > 0, amplification is swept away and the
    chain maps to a pseudo-Hermitian lattice by an imaginary gauge transform.
    TransitionPoint: t_L = 0, strictly unidirectional transport.
    AbsolutelyUnstable: t_L < 0, local amplification beats transport.
    """

    CONVECTIVELY_UNSTABLE = "convectively_unstable"
    TRANSITION_POINT = "transition_point"
    ABSOLUTELY_UNSTABLE = "absolutely_unstable"
    STABLE = "stable"


@dataclass(frozen=True)
class LatticeSpec:
    """Bath parameters.  Requires M >= 3 sites, t_R = nu + gamma > 0, loss >= 0."""

    m: int
    nu: float
    gamma: float
    onsite_loss: float = 0.0
    boundary: Boundary = Boundary.OBC

    def __post_init__(self):
        if self.m < 3:
            raise SpecError(f"lattice needs at least 3 sites, got M = {self.m}")
        if not all(math.isfinite(x) for x in (self.nu, self.gamma, self.onsite_loss)):
            raise SpecError("lattice parameters must be finite")
        if self.nu + self.gamma <= 0:
            raise SpecError(
                f"t_R = nu + gamma = {self.nu + self.gamma} must be positive"
            )
        if self.onsite_loss < 0:
            raise SpecError(f"onsite_loss must be >= 0, got {self.onsite_loss}")
        if not isinstance(self.boundary, Boundary):
            object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def t_r(self) -> float:
        return self.nu + self.gamma

    @property
    def t_l(self) -> float:
        return self.nu - self.gamma

    @property
    def beta(self) -> float | None:
        """Skin factor sqrt(t_R/t_L); only defined for t_L > 0."""
        if self.t_l <= 0:
            return None
        return math.sqrt(self.t_r / self.t_l)


@dataclass(frozen=True)
class CouplingPoint:
    site: int
    strength: float

    def __post_init__(self):
        if not isinstance(self.site, (int, np.integer)):
            raise SpecError(f"coupling site must be an integer, got {self.site!r}")
        if not math.isfinite(self.strength):
            raise SpecError("coupling strength must be finite")
        if self.strength < 0:
            raise SpecError(f"coupling strength must be >= 0, got {self.strength}")


@dataclass(frozen=True)
class EmitterSpec:
    """A bosonic emitter with detuning and 1..K coupling points on distinct,
    strictly increasing sites."""

    label: str
    detuning: float = 0.0
    couplings: tuple[CouplingPoint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(self.couplings))
        if not self.couplings:
            raise SpecError(f"emitter {self.label!r} needs at least one coupling point")
        sites = [c.site for c in self.couplings]
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise SpecError(
                f"emitter {self.label!r}: coupling sites must be strictly increasing, got {sites}"
            )
        if not math.isfinite(self.detuning):
            raise SpecError("detuning must be finite")

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(c.site for c in self.couplings)

    @property
    def strengths(self) -> tuple[float, ...]:
        return tuple(c.strength for c in self.couplings)


@dataclass(frozen=True)
class SystemSpec:
    lattice: LatticeSpec
    emitters: tuple[EmitterSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "emitters", tuple(self.emitters))

    @property
    def n_emitters(self) -> int:
        return len(self.emitters)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.emitters)


@dataclass(frozen=True)
class DerivedParameters:
    t_r: float
    t_l: float
    beta: float | None
    regime: Regime


def derive_parameters(lattice: LatticeSpec) -> DerivedParameters:
    """Tunneling amplitudes, skin factor (when t_L > 0) and regime."""
    return DerivedParameters(
        t_r=lattice.t_r,
        t_l=lattice.t_l,
        beta=lattice.beta,
        regime=classify_regime(lattice),
    )


def classify_regime(lattice: LatticeSpec) -> Regime:
    """Classify the bath; see :class:`Regime`.

    Stability is decided first (max imaginary part of the periodic spectrum,
    2|gamma| - loss, non-positive); among unstable baths the sign of t_L
    picks the branch.
    """
    if 2.0 * abs(lattice.gamma) - lattice.onsite_loss <= 0:
        return Regime.STABLE
    if lattice.t_l == 0:
        return Regime.TRANSITION_POINT
    if lattice.t_l < 0:
        return Regime.ABSOLUTELY_UNSTABLE
    return Regime.CONVECTIVELY_UNSTABLE


def matching_ratio(beta: float, d: int) -> float:
    """Coupling-strength ratio beta**(-d) that cancels the skin factor
    accumulated between two coupling points separated by d sites."""
    if beta <= 0:
        raise SpecError(f"beta must be positive, got {beta}")
    return float(beta) ** (-int(d))


def validate_spec(spec: SystemSpec) -> list[str]:
    """Collect invariant violations; an empty list means the spec is valid."""
    violations: list[str] = []
    m = spec.lattice.m
    seen: set[str] = set()
    for i, emitter in enumerate(spec.emitters):
        if emitter.label in seen:
            violations.append(f"emitters[{i}]: duplicate label {emitter.label!r}")
        seen.add(emitter.label)
        for j, cp in enumerate(emitter.couplings):
            if not (0 <= cp.site < m):
                violations.append(
                    f"emitters[{i}].couplings[{j}]: site out of range "
                    f"(site {cp.site} not in [0, {m - 1}])"
                )
    return violations


@dataclass(frozen=True)
class HamiltonianOperator:
    """Single-excitation operator of dimension M + E.

    Basis ordering: lattice amplitudes u_{a,0..M-1} first, then emitters in
    declaration order.  The lattice block is tridiagonal (sub-diagonal t_R,
    super-diagonal t_L, diagonal -i*loss, corner entries under PBC); the
    emitter-lattice coupling block is real-symmetric.
    """

    spec: SystemSpec
    t_r: float
    t_l: float
    onsite_loss: float
    boundary: Boundary
    m: int
    labels: tuple[str, ...]
    detunings: tuple[float, ...]
    coupling_sites: tuple[np.ndarray, ...] = field(repr=False)
    coupling_strengths: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def n_emitters(self) -> int:
        return len(self.labels)

    @property
    def dimension(self) -> int:
        return self.m + len(self.labels)

    def emitter_index(self, label: str) -> int:
        """Position of an emitter amplitude within the state vector."""
        try:
            return self.m + self.labels.index(label)
        except ValueError:
            raise SpecError(f"unknown emitter label {label!r}") from None

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        """Apply H to a state vector (complex, length M + E)."""
        m = self.m
        out = np.zeros(self.dimension, dtype=complex)
        a = psi[:m]
        out[1:m] = self.t_r * a[: m - 1]
        out[: m - 1] += self.t_l * a[1:]
        if self.onsite_loss != 0.0:
            out[:m] += (-1j * self.onsite_loss) * a
        if self.boundary is Boundary.PBC:
            out[0] += self.t_r * a[m - 1]
            out[m - 1] += self.t_l * a[0]
        for e in range(len(self.labels)):
            u_e = psi[m + e]
            sites = self.coupling_sites[e]
            gs = self.coupling_strengths[e]
            out[sites] += gs * u_e
            out[m + e] = self.detunings[e] * u_e + np.dot(gs, a[sites])
        return out

    def to_sparse(self):
        """CSR form of H (scipy); used by the propagator hot loop."""
        import scipy.sparse as sp

        m = self.m
        rows: list[int] = []
        cols: list[int] = []
        data: list[complex] = []
        for n in range(m - 1):
            rows += [n + 1, n]
            cols += [n, n + 1]
            data += [self.t_r, self.t_l]
        if self.onsite_loss != 0.0:
            rows += list(range(m))
            cols += list(range(m))
            data += [-1j * self.onsite_loss] * m
        if self.boundary is Boundary.PBC:
            rows += [0, m - 1]
            cols += [m - 1, 0]
            data += [self.t_r, self.t_l]
        for e in range(len(self.labels)):
            row = m + e
            if self.detunings[e] != 0.0:
                rows.append(row)
                cols.append(row)
                data.append(self.detunings[e])
            for site, g in zip(self.coupling_sites[e], self.coupling_strengths[e]):
                rows += [row, int(site)]
                cols += [int(site), row]
                data += [g, g]
        n_tot = self.dimension
        return sp.csr_matrix(
            sp.coo_matrix((data, (rows, cols)), shape=(n_tot, n_tot), dtype=complex)
        )

    def to_dense(self) -> np.ndarray:
        """Dense complex matrix; intended for small systems and tests."""
        n = self.dimension
        m = self.m
        h = np.zeros((n, n), dtype=complex)
        idx = np.arange(m - 1)
        h[idx + 1, idx] = self.t_r
        h[idx, idx + 1] = self.t_l
        h[np.arange(m), np.arange(m)] = -1j * self.onsite_loss
        if self.boundary is Boundary.PBC:
            h[0, m - 1] += self.t_r
            h[m - 1, 0] += self.t_l
        for e in range(len(self.labels)):
            row = m + e
            h[row, row] = self.detunings[e]
            for site, g in zip(self.coupling_sites[e], self.coupling_strengths[e]):
                h[row, site] += g
                h[site, row] += g
        return h


def assemble_hamiltonian(spec: SystemSpec) -> HamiltonianOperator:
    """Build the bordered operator; raises :class:`SpecError` on invalid specs."""
    violations = validate_spec(spec)
    if violations:
        raise SpecError("invalid system spec: " + "; ".join(violations))
    lat = spec.lattice
    return HamiltonianOperator(
        spec=spec,
        t_r=lat.t_r,
        t_l=lat.t_l,
        onsite_loss=lat.onsite_loss,
        boundary=lat.boundary,
        m=lat.m,
        labels=spec.labels,
        detunings=tuple(e.detuning for e in spec.emitters),
        coupling_sites=tuple(
            np.asarray(e.sites, dtype=np.intp) for e in spec.emitters
        ),
        coupling_strengths=tuple(
            np.asarray(e.strengths, dtype=float) for e in spec.emitters
        ),
    )


def small_emitter(label: str, site: int, strength: float, detuning: float = 0.0) -> EmitterSpec:
    """Emitter with a single coupling point."""
    return EmitterSpec(label, detuning, (CouplingPoint(site, strength),))


def giant_emitter(
    label: str,
    site: int,
    separation: int,
    strength: float,
    second_strength: float,
    detuning: float = 0.0,
) -> EmitterSpec:
    """Emitter with two coupling points at ``site`` and ``site + separation``."""
    return EmitterSpec(
        label,
        detuning,
        (CouplingPoint(site, strength), CouplingPoint(site + separation, second_strength)),
    )
