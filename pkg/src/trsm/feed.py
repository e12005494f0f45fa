"""Feed source model: a rotationally symmetric cos^q radiator.

Also holds the focal-length rule driven by the feed's -10 dB taper angle,
edge-taper bookkeeping and the spillover integral over a rectangular
aperture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError


def gain_from_q(q: float) -> float:
    """Boresight gain (dBi) of a cos^q amplitude pattern over a hemisphere."""
    return 10.0 * math.log10(2.0 * (2.0 * q + 1.0))


def q_from_gain(gain_dbi: float) -> float:
    """Invert ``G = 2 (2q + 1)``.

    3.01 dBi is the isotropic-hemisphere floor; anything lower raises.
    """
    g = 10.0 ** (gain_dbi / 10.0)
    if g < 2.0 * (1.0 - 1e-3):
        raise DomainError(f"feed gain {gain_dbi} dBi is below the 3.01 dBi hemisphere limit")
    return max(0.0, (g / 2.0 - 1.0) / 2.0)


@dataclass(frozen=True)
class FeedModel:
    q: float
    position: tuple = (0.0, 0.0, 0.1504)
    polarization: str = "y"
    center_frequency: float = 7.3e9

    def __post_init__(self):
        if not self.q >= 0:
            raise ConfigError("feed exponent q must be non-negative")
        pos = tuple(float(v) for v in self.position)
        if len(pos) != 3:
            raise ConfigError("feed position needs three coordinates")
        if pos[2] == 0:
            raise ConfigError("feed height z_f must be non-zero")
        object.__setattr__(self, "position", pos)

    @classmethod
    def from_gain(cls, gain_dbi: float = 9.0, **kw) -> "FeedModel":
        return cls(q=q_from_gain(gain_dbi), **kw)

    @property
    def gain_dbi(self) -> float:
        return gain_from_q(self.q)

    @property
    def height(self) -> float:
        return abs(self.position[2])


def feed_field(model: FeedModel, theta_deg):
    """Normalised field amplitude toward ``theta_deg`` off the feed axis."""
    th = np.radians(np.asarray(theta_deg, dtype=float))
    c = np.cos(th)
    amp = np.where(c > 0, np.abs(c) ** model.q, 0.0)
    if model.q == 0:
        amp = np.where(th <= math.pi / 2 + 1e-12, 1.0, 0.0)
    return float(amp) if amp.ndim == 0 else amp


def hemisphere_directivity(q: float, n: int = 2001) -> float:
    """``4 pi / int cos^{2q} dOmega`` over the forward hemisphere (trapezoidal)."""
    th = np.linspace(0.0, math.pi / 2, n)
    integrand = np.cos(th) ** (2 * q) * np.sin(th)
    return 4 * math.pi / (2 * math.pi * np.trapezoid(integrand, th))


def focal_from_taper(D: float, alpha_10db_deg: float) -> float:
    """Focal length placing the aperture edge at the feed's -10 dB angle."""
    if not 0 < alpha_10db_deg < 90:
        raise DomainError("taper half-angle must lie in (0, 90) degrees")
    return D / (2.0 * math.tan(math.radians(alpha_10db_deg)))


def taper_angle(D: float, F: float) -> float:
    """Half-angle subtended by the aperture edge, degrees."""
    return math.degrees(math.atan(D / (2.0 * F)))


@dataclass(frozen=True)
class TaperPoint:
    angle_deg: float
    pattern_db: float
    spreading_db: float

    @property
    def total_db(self) -> float:
        return self.pattern_db + self.spreading_db


@dataclass(frozen=True)
class EdgeTaper:
    edge: TaperPoint
    corner: TaperPoint


def _taper_point(q, F, rho):
    alpha = math.atan2(rho, F)
    c = math.cos(alpha)
    pattern = 20.0 * q * math.log10(c) if q else 0.0
    spreading = 20.0 * math.log10(F / math.hypot(F, rho))
    return TaperPoint(math.degrees(alpha), pattern, spreading)


def edge_taper(model: FeedModel, D: float, F: float) -> EdgeTaper:
    """Edge illumination relative to the centre for a square aperture of side ``D``.

    Pattern roll-off and path spreading are kept apart; ``total_db`` sums them.
    """
    if not (D > 0 and F > 0):
        raise DomainError("aperture size and focal length must be positive")
    return EdgeTaper(edge=_taper_point(model.q, F, D / 2.0),
                     corner=_taper_point(model.q, F, D / math.sqrt(2.0)))


def spillover_efficiency(model: FeedModel, half_x: float, half_y: float,
                         center=(0.0, 0.0), n: int = 256) -> float:
    """Fraction of the feed's radiated power landing on a rectangular aperture.

    The aperture is ``[cx-half_x, cx+half_x] x [cy-half_y, cy+half_y]`` in
    the z = 0 plane; the feed points along its own axis toward that plane.
    Integrated with Gauss-Legendre quadrature over the aperture plane using
    ``dOmega = |z_f| dx dy / r^3``.
    """
    xf, yf, zf = model.position
    h = abs(zf)
    nodes, weights = np.polynomial.legendre.leggauss(n)
    cx, cy = center
    xs = cx + half_x * nodes
    ys = cy + half_y * nodes
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    W = np.outer(weights, weights) * half_x * half_y
    r = np.sqrt((X - xf) ** 2 + (Y - yf) ** 2 + h ** 2)
    cos_t = h / r
    dens = cos_t ** (2 * model.q) * h / r ** 3
    intercepted = float(np.sum(W * dens))
    total = 2 * math.pi / (2 * model.q + 1)
    return intercepted / total
