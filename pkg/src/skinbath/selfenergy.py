"""Analytic emitter self-energies for the asymmetric-hopping bath, plus an
independent quadrature oracle.

All closed forms descend from the lattice Green's function integral

    I_D(z) = (1/2pi) Int_{-pi}^{pi} e^{iDk} / (z - 2J cos k) dk,   J = sqrt(t_R t_L),

evaluated by residues after y = e^{ik}: the pole kept is the root of
y^2 - (z/J) y + 1 with |y| < 1, giving I_D(z) = -y^D / s with
s = 2J y - z.  For z = Delta + i0+ inside the band this picks the retarded
branch (Im Sigma <= 0 for a single coupling point); at band center y = -i
exactly.  Both tunneling rates must be positive (t_L > 0), i.e. the bath is
in the convectively unstable regime where the residue derivation applies.

A giant emitter couples at two sites separated by D with strengths
(g_N, g_Np); the skin factor beta = sqrt(t_R/t_L) enters through the
combination beta^D + beta^-D and through the matched ratio g_Np/g_N =
beta^-D that cancels the interference with the bath amplification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import BranchAmbiguityError, SpecError

__all__ = [
    "SelfEnergyQuery",
    "SelfEnergyResult",
    "RateReport",
    "sigma_giant",
    "sigma_resonant",
    "sigma_pair_braided",
    "sigma_pair_braided_arbitrary",
    "sigma_pair_general",
    "sigma_numeric",
    "rates",
]

# (-i)^D and (+i)^D for integer D, exact.
_MINUS_I_POW = (1.0 + 0j, -1j, -1.0 + 0j, 1j)
_PLUS_I_POW = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


@dataclass(frozen=True)
class SelfEnergyQuery:
    """Probe point and coupling geometry for a single (possibly giant) emitter."""

    z: complex
    g_n: float
    t_r: float
    t_l: float
    g_np: float = 0.0
    d: int = 0

    def __post_init__(self):
        if self.t_l <= 0 or self.t_r <= 0:
            raise SpecError(
                f"residue self-energies need t_R, t_L > 0 (got {self.t_r}, {self.t_l})"
            )
        if self.d < 0:
            raise SpecError("coupling separation d must be >= 0")


@dataclass(frozen=True)
class SelfEnergyResult:
    """Self-energy values with branch metadata.

    ``sigma_b`` is always present; the pair channels are filled by the
    two-emitter operations.  decay rate = -2 Im, Lamb shift = Re.
    """

    sigma_b: complex
    branch: str
    sigma_c: complex | None = None
    sigma_bc: complex | None = None
    sigma_cb: complex | None = None

    @property
    def decay_rate(self) -> float:
        return -2.0 * self.sigma_b.imag

    @property
    def lamb_shift(self) -> float:
        return self.sigma_b.real

    @property
    def is_pair(self) -> bool:
        return self.sigma_bc is not None


def _retarded_root(z: complex, t_r: float, t_l: float) -> tuple[complex, complex, str]:
    """Pole y inside the unit circle and s = 2J y - z.

    For real z inside the band the limit from Im z -> 0+ is taken
    (y = e^{-i theta}); exactly at a band edge both roots sit on the unit
    circle and the branch is ambiguous.
    """
    j = math.sqrt(t_r * t_l)
    z = complex(z)
    if z.imag == 0.0:
        x = z.real
        band = 2.0 * j
        if abs(abs(x) - band) < 1e-300:
            raise BranchAmbiguityError(
                f"branch ambiguous at band edge z = {x:+.6g} (band edge {band:.6g})"
            )
        if abs(x) < band:
            y = (x - 1j * math.sqrt(band * band - x * x)) / (2.0 * j)
            return y, 2.0 * j * y - x, "retarded-limit"
        # real axis outside the band: keep the root inside the unit circle
        s = math.copysign(math.sqrt(x * x - band * band), x)
        y = (x - s) / (2.0 * j)
        return complex(y), 2.0 * j * y - x, "real-outside-band"
    s = np.sqrt(z * z - 4.0 * t_r * t_l + 0j)
    y_plus = (z + s) / (2.0 * j)
    y_minus = (z - s) / (2.0 * j)
    y = y_minus if abs(y_minus) <= abs(y_plus) else y_plus
    return y, 2.0 * j * y - z, "pole-inside-contour"


def sigma_giant(q: SelfEnergyQuery) -> SelfEnergyResult:
    """Self-energy of a one- or two-point emitter at complex energy z.

    Continuous in Delta across the band interior; raises
    :class:`BranchAmbiguityError` exactly at a band edge with Im z = 0.
    """
    y, s, branch = _retarded_root(q.z, q.t_r, q.t_l)
    beta = math.sqrt(q.t_r / q.t_l)
    num = q.g_n**2 + q.g_np**2
    if q.g_np != 0.0:
        num = num + q.g_n * q.g_np * y**q.d * (beta**q.d + beta**-q.d)
    return SelfEnergyResult(sigma_b=-num / s, branch=branch)


def sigma_resonant(
    g_n: float, g_np: float, d: int, t_r: float, t_l: float
) -> SelfEnergyResult:
    """Closed-form band-center value (z = 0 + i0+), where y = -i exactly:

        Sigma = -i [g_N^2 + g_Np^2 + (-i)^D g_N g_Np (beta^D + beta^-D)] / (2J).

    The matched ratio g_Np/g_N = beta^-D turns the bracket into
    (1 + beta^-2D)(1 + (-i)^D), which vanishes identically for D = 2 mod 4
    (decoherence-free interference zero) and doubles for D = 0 mod 4.
    """
    if t_l <= 0 or t_r <= 0:
        raise SpecError("sigma_resonant needs t_R, t_L > 0")
    j = math.sqrt(t_r * t_l)
    beta = math.sqrt(t_r / t_l)
    num = g_n**2 + g_np**2 + _MINUS_I_POW[d % 4] * g_n * g_np * (beta**d + beta**-d)
    return SelfEnergyResult(sigma_b=-1j * num / (2.0 * j), branch="resonant")


def sigma_pair_braided(
    z: complex, g_n: float, t_r: float, t_l: float
) -> SelfEnergyResult:
    """Matched braided pair: emitter b on sites (N, N+2), emitter c on
    (N+1, N+3), outer strengths g_N and inner ratio beta^-2 on the second
    point of each.

    At z = 0 + i0+ the diagonal parts vanish and the cross couplings are
    purely real and nonreciprocal:
    Sigma_bc = -g^2/t_R, Sigma_cb = -g^2/(beta^2 t_R).
    """
    if t_l <= 0 or t_r <= 0:
        raise SpecError("sigma_pair_braided needs t_R, t_L > 0")
    y, s, branch = _retarded_root(z, t_r, t_l)
    beta = math.sqrt(t_r / t_l)
    g2 = g_n * g_n
    y3 = y**3
    sigma_b = -g2 * (1.0 + y * y) * (1.0 + beta**-4) / s
    sigma_bc = -g2 * (2.0 * y / beta + (y + y3) / beta**5) / s
    sigma_cb = -g2 * (beta * (y + y3) + 2.0 * y / beta**3) / s
    return SelfEnergyResult(
        sigma_b=sigma_b,
        sigma_c=sigma_b,
        sigma_bc=sigma_bc,
        sigma_cb=sigma_cb,
        branch=branch,
    )


def sigma_pair_braided_arbitrary(
    z: complex,
    g_b: tuple[float, float],
    g_c: tuple[float, float],
    t_r: float,
    t_l: float,
) -> SelfEnergyResult:
    """Braided pair (b on N, N+2; c on N+1, N+3) with arbitrary strengths.

    Expanding the two form factors in lattice harmonics gives

        Sigma_bc = [(gb1 gc1 + gb2 gc2)/beta + gb2 gc1 beta] I_1
                   + (gb1 gc2 / beta^3) I_3,
        Sigma_cb = [(gb1 gc1 + gb2 gc2) beta + gb2 gc1 / beta] I_1
                   + (gb1 gc2 beta^3) I_3,

    with I_D(z) = -y^D/s; the matched ratio g2/g1 = beta^-2 recovers the
    closed braided forms.
    """
    if t_l <= 0 or t_r <= 0:
        raise SpecError("sigma_pair_braided needs t_R, t_L > 0")
    y, s, branch = _retarded_root(z, t_r, t_l)
    beta = math.sqrt(t_r / t_l)
    gb1, gb2 = g_b
    gc1, gc2 = g_c
    i1 = -y / s
    i3 = -(y**3) / s
    sigma_b = sigma_giant(SelfEnergyQuery(z=z, g_n=gb1, g_np=gb2, d=2, t_r=t_r, t_l=t_l)).sigma_b
    sigma_c = sigma_giant(SelfEnergyQuery(z=z, g_n=gc1, g_np=gc2, d=2, t_r=t_r, t_l=t_l)).sigma_b
    common = gb1 * gc1 + gb2 * gc2
    sigma_bc = (common / beta + gb2 * gc1 * beta) * i1 + (gb1 * gc2 / beta**3) * i3
    sigma_cb = (common * beta + gb2 * gc1 / beta) * i1 + (gb1 * gc2 * beta**3) * i3
    return SelfEnergyResult(
        sigma_b=sigma_b,
        sigma_c=sigma_c,
        sigma_bc=sigma_bc,
        sigma_cb=sigma_cb,
        branch=branch,
    )


def sigma_pair_general(
    g_n: float, d_prime: int, d_dprime: int, t_r: float, t_l: float
) -> SelfEnergyResult:
    """Band-center cross couplings for matched two-point emitters whose left
    coupling points are d_prime apart, each with internal separation
    d_dprime (braided case: d_prime = 1, d_dprime = 2):

        Sigma_bc = g^2/(2iJ) beta^{-D'} [(-i)^{D'} - (-i)^{-D'}],
        Sigma_cb = g^2/(2iJ) beta^{D' - 2D''} [(-i)^{D'} - (-i)^{-D'}].

    Both vanish for even D'; otherwise Sigma_cb/Sigma_bc = beta^{2(D'-D'')}.
    """
    if t_l <= 0 or t_r <= 0:
        raise SpecError("sigma_pair_general needs t_R, t_L > 0")
    if d_prime < 0 or d_dprime < 0:
        raise SpecError("separations must be >= 0")
    j = math.sqrt(t_r * t_l)
    beta = math.sqrt(t_r / t_l)
    bracket = _MINUS_I_POW[d_prime % 4] - _PLUS_I_POW[d_prime % 4]
    g2 = g_n * g_n
    pref = g2 / (2j * j)
    sigma_bc = pref * beta**-d_prime * bracket
    sigma_cb = pref * beta ** (d_prime - 2 * d_dprime) * bracket
    diag = sigma_resonant(g_n, g_n * beta**-d_dprime, d_dprime, t_r, t_l).sigma_b
    return SelfEnergyResult(
        sigma_b=diag,
        sigma_c=diag,
        sigma_bc=sigma_bc,
        sigma_cb=sigma_cb,
        branch="resonant",
    )


_GL_NODES, _GL_WEIGHTS = leggauss(5)


def _panel_mesh(z: complex, j: float, mode_count: int) -> np.ndarray:
    """Panel break points on [-pi, pi], geometrically refined towards the
    near-singular wavenumbers k0 = +-arccos(Re z / 2J)."""
    eps = abs(z.imag)
    base = np.linspace(-math.pi, math.pi, max(16, mode_count // 40))
    pts = [base]
    x = z.real
    if abs(x) < 2.0 * j:
        k0 = math.acos(max(-1.0, min(1.0, x / (2.0 * j))))
        sin_k0 = max(math.sin(k0), 1e-12)
        width = max(eps / (2.0 * j * sin_k0), 1e-13)
        for center in (k0, -k0):
            offsets = [width / 20.0]
            while offsets[-1] < math.pi:
                offsets.append(offsets[-1] * 1.25)
            offs = np.asarray(offsets)
            for sign in (1.0, -1.0):
                ring = center + sign * offs
                pts.append(ring[(ring > -math.pi) & (ring < math.pi)])
            pts.append(np.array([center]))
    mesh = np.unique(np.concatenate(pts))
    return mesh


def sigma_numeric(
    z: complex,
    row_couplings,
    t_r: float,
    t_l: float,
    mode_count: int = 4000,
    col_couplings=None,
) -> complex:
    """Quadrature evaluation of the self-energy mode integral, independent of
    the residue code path.

    ``row_couplings`` is a sequence of (site_offset, strength) pairs for the
    emitter row form factor sum_j g_j beta^{n_j} e^{i n_j k}; the column form
    factor sum_j g_j beta^{-n_j} e^{-i n_j k} defaults to the same emitter
    (diagonal channel) or may describe a second emitter (cross channel,
    e.g. Sigma_bc with row = b, col = c).

    Needs Im z != 0: on the real axis inside the band the integrand has a
    non-integrable singularity.  A composite 5-point Gauss-Legendre rule on
    a mesh geometrically graded into the Lorentzian core resolves
    Im z ~ 1e-6 well within the 1e-3 oracle target; the node budget stays
    below ``mode_count`` (>= 1000 recommended).
    """
    if t_l <= 0 or t_r <= 0:
        raise SpecError("sigma_numeric needs t_R, t_L > 0")
    if mode_count < 16:
        raise SpecError("mode_count too small")
    z = complex(z)
    j = math.sqrt(t_r * t_l)
    if z.imag == 0.0 and abs(z.real) <= 2.0 * j:
        raise SpecError(
            "sigma_numeric needs Im z > 0 strictly inside the band "
            "(non-integrable singularity on the contour)"
        )
    beta = math.sqrt(t_r / t_l)
    row = [(int(n), float(g)) for n, g in row_couplings]
    col = row if col_couplings is None else [(int(n), float(g)) for n, g in col_couplings]

    mesh = _panel_mesh(z, j, mode_count)
    a = mesh[:-1]
    b = mesh[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    k = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()

    row_f = np.zeros(k.size, dtype=complex)
    for n, g in row:
        row_f += g * beta**n * np.exp(1j * n * k)
    col_f = np.zeros(k.size, dtype=complex)
    for n, g in col:
        col_f += g * beta ** (-n) * np.exp(-1j * n * k)
    integrand = row_f * col_f / (z - 2.0 * j * np.cos(k))
    return complex(np.sum(w * integrand) / (2.0 * math.pi))


@dataclass(frozen=True)
class RateReport:
    decay_rate: float
    lamb_shift: float
    decay_free: bool
    nonreciprocity_ratio: complex | None = None
    ratio_flag: str | None = None


def rates(res: SelfEnergyResult) -> RateReport:
    """Decay rate (-2 Im), Lamb shift (Re) and, for pair results, the
    nonreciprocity ratio Sigma_bc / Sigma_cb (flagged when undefined)."""
    ratio = None
    flag = None
    if res.is_pair:
        if res.sigma_cb == 0:
            flag = "ratio undefined: sigma_cb = 0"
        else:
            ratio = res.sigma_bc / res.sigma_cb
    return RateReport(
        decay_rate=res.decay_rate,
        lamb_shift=res.lamb_shift,
        decay_free=res.sigma_b.imag == 0.0,
        nonreciprocity_ratio=ratio,
        ratio_flag=flag,
    )
