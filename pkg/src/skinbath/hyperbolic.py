"""Curved-space dual of the asymmetric-hopping chain.

The skin factor beta maps the lattice onto a two-dimensional hyperbolic
space of constant negative curvature -kappa with kappa = 4 ln^2(beta);
site n sits at coordinate x_n = x0 exp(n sqrt(kappa)).  The geometry is
visualized as the pseudosphere (tractrix funnel): points (u, v, w) satisfy

    [u - arcsech(sqrt((v^2 + w^2) kappa)) / sqrt(kappa)]^2 + v^2 + w^2 = 1/kappa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SpecError

__all__ = [
    "curvature",
    "site_coordinates",
    "coupling_separation",
    "pseudosphere_point",
    "pseudosphere_sample",
    "surface_residual",
    "HyperbolicMap",
    "PseudosphereSample",
]


def curvature(beta: float) -> float:
    """Curvature magnitude kappa = 4 ln^2(beta) (0 for a Hermitian chain)."""
    if beta <= 0:
        raise SpecError(f"beta must be positive, got {beta}")
    return 4.0 * math.log(beta) ** 2


@dataclass(frozen=True)
class HyperbolicMap:
    kappa: float
    x0: float
    n: np.ndarray
    x: np.ndarray
    flat: bool  # kappa == 0 degenerate case: all coordinates collapse to x0


def site_coordinates(x0: float, n_range, kappa: float) -> HyperbolicMap:
    """Site coordinates x_n = x0 exp(n sqrt(kappa)).

    kappa = 0 is flagged as the degenerate flat case (all x_n = x0) rather
    than rejected, so parameter sweeps across gamma = 0 keep running.
    """
    if kappa < 0:
        raise SpecError("kappa must be >= 0")
    n = np.asarray(list(n_range), dtype=float)
    x = x0 * np.exp(n * math.sqrt(kappa))
    return HyperbolicMap(kappa=kappa, x0=x0, n=n, x=x, flat=kappa == 0.0)


def coupling_separation(x0: float, n_left: int, n_right: int, kappa: float) -> float:
    """Curved-space distance between two coupling sites:
    D_x = x0 [exp(n_right sqrt(kappa)) - exp(n_left sqrt(kappa))]."""
    rk = math.sqrt(kappa)
    return x0 * (math.exp(n_right * rk) - math.exp(n_left * rk))


@dataclass(frozen=True)
class PseudosphereSample:
    kappa: float
    branch: np.ndarray  # +1 / -1 per point
    r: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    residuals: np.ndarray

    @property
    def rim_radius(self) -> float:
        return 1.0 / math.sqrt(self.kappa)


def pseudosphere_point(kappa: float, r: float, theta: float) -> tuple[float, float]:
    """The two u-branch values at radius r, angle theta (v, w follow from
    polar coordinates).  r must lie in (0, 1/sqrt(kappa)]; beyond the funnel
    rim the surface equation has no real solution."""
    if kappa <= 0:
        raise SpecError("pseudosphere needs kappa > 0")
    rim = 1.0 / math.sqrt(kappa)
    if not 0.0 < r <= rim:
        raise SpecError(f"r must lie in (0, {rim:.6g}], got {r}")
    rk = math.sqrt(kappa)
    tractrix = math.acosh(max(1.0 / (r * rk), 1.0)) / rk
    bulge = math.sqrt(max(rim * rim - r * r, 0.0))
    return tractrix + bulge, tractrix - bulge


def pseudosphere_sample(
    kappa: float, r_count: int = 40, theta_count: int = 60
) -> PseudosphereSample:
    """Sample both branches of the pseudosphere surface for curvature kappa.

    r runs over (0, 1/sqrt(kappa)] (the funnel rim), theta over [0, 2pi);
    u = arcsech(r sqrt(kappa))/sqrt(kappa) +- sqrt(1/kappa - r^2).  Every
    emitted point is checked against the surface equation; residuals are
    returned alongside.
    """
    if kappa <= 0:
        raise SpecError("pseudosphere needs kappa > 0")
    if r_count < 1 or theta_count < 1:
        raise SpecError("r_count and theta_count must be >= 1")
    rk = math.sqrt(kappa)
    r = np.linspace(1.0 / (r_count + 1), 1.0, r_count) / rk
    theta = np.linspace(0.0, 2.0 * math.pi, theta_count, endpoint=False)

    rr, tt = np.meshgrid(r, theta, indexing="ij")
    rr = rr.ravel()
    tt = tt.ravel()
    v = rr * np.cos(tt)
    w = rr * np.sin(tt)
    s = np.clip(rr * rk, 0.0, 1.0)
    tractrix = np.arccosh(1.0 / s) / rk
    bulge = np.sqrt(np.maximum(1.0 / kappa - rr**2, 0.0))

    branch = np.concatenate([np.ones(rr.size), -np.ones(rr.size)])
    u = np.concatenate([tractrix + bulge, tractrix - bulge])
    v = np.concatenate([v, v])
    w = np.concatenate([w, w])
    r_all = np.concatenate([rr, rr])
    t_all = np.concatenate([tt, tt])
    residuals = surface_residual(kappa, u, v, w)
    return PseudosphereSample(
        kappa=kappa, branch=branch, r=r_all, theta=t_all, u=u, v=v, w=w,
        residuals=residuals,
    )


def surface_residual(kappa, u, v, w):
    """Absolute defect of the pseudosphere surface equation."""
    rho2 = np.asarray(v) ** 2 + np.asarray(w) ** 2
    s = np.sqrt(rho2 * kappa)
    tractrix = np.arccosh(1.0 / s) / math.sqrt(kappa)
    return np.abs((np.asarray(u) - tractrix) ** 2 + rho2 - 1.0 / kappa)
