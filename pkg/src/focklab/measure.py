"""Measure symbols and their Berezin transforms.

A symbol is one of four variants: finite point masses, a sampled density on
a disk, a radial density (optionally a constant times a disk indicator, which
unlocks exact cell geometry), or a centered Gaussian density.  All Berezin
work reduces to the heat-kernel smoothing
(alpha/pi) * integral of e^{-alpha |z - w|^2} d mu(w).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import FocklabError, GridExtentError, PositivityError
from .fock import FockParams
from .numerics import PolarGrid, min_angular_nodes, polar_grid

_DROP = 1e-15


@dataclass(frozen=True)
class PointMasses:
    """Finite atomic measure: sum of weight * delta_location."""

    points: tuple

    def __post_init__(self):
        pts = tuple((complex(w), complex(c)) for w, c in self.points)
        object.__setattr__(self, "points", pts)

    @property
    def locations(self) -> np.ndarray:
        return np.array([w for w, _ in self.points], dtype=complex)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c for _, c in self.points], dtype=complex)


@dataclass(frozen=True)
class Density:
    """Absolutely continuous measure func(w) dA(w) on |w - center| <= support_radius.

    ``func`` is sampled on demand at absolute coordinates and must be smooth
    on the support disk; ``positive`` is a caller declaration (samples cannot
    prove positivity of a callable).
    """

    func: Callable
    support_radius: float
    center: complex = 0j
    positive: bool = False

    def __post_init__(self):
        if not self.support_radius > 0.0:
            raise ValueError("support radius must be positive")
        object.__setattr__(self, "center", complex(self.center))


@dataclass(frozen=True)
class RadialDensity:
    """Radial density profile(|w|) dA(w) supported in |w| <= support_radius.

    With ``constant_value`` set (and no profile) the measure is the exact
    constant-times-disk-indicator, which downstream code integrates by
    closed-form geometry instead of quadrature.  ``support_radius`` may be
    inf only for callable profiles that decay on their own.
    """

    profile: Optional[Callable] = None
    support_radius: float = math.inf
    constant_value: Optional[complex] = None
    positive: bool = False

    def __post_init__(self):
        if (self.profile is None) == (self.constant_value is None):
            raise ValueError("give exactly one of profile, constant_value")
        if self.constant_value is not None:
            cv = complex(self.constant_value)
            if not math.isfinite(self.support_radius):
                raise ValueError("a constant disk needs a finite radius")
            object.__setattr__(self, "constant_value", cv)
            object.__setattr__(self, "positive", cv.imag == 0.0 and cv.real >= 0.0)
        if not self.support_radius > 0.0:
            raise ValueError("support radius must be positive")

    def profile_values(self, t: np.ndarray) -> np.ndarray:
        if self.constant_value is not None:
            return np.full(np.shape(t), self.constant_value, dtype=complex)
        return np.asarray(self.profile(np.asarray(t)), dtype=complex)


def uniform_disk(amplitude: complex, radius: float) -> RadialDensity:
    """Constant density on the disk |w| <= radius."""
    return RadialDensity(support_radius=float(radius),
                         constant_value=complex(amplitude))


@dataclass(frozen=True)
class GaussianDensity:
    """Gaussian density amplitude * e^{-beta |w - center|^2} dA(w)."""

    amplitude: complex
    beta: float
    center: complex = 0j

    def __post_init__(self):
        if not self.beta > 0.0:
            raise ValueError("beta must be positive")
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "center", complex(self.center))

    def effective_radius(self, tol: float = _DROP) -> float:
        """Radius past which the remaining mass fraction drops below tol."""
        return math.sqrt(-math.log(tol) / self.beta)


MeasureSymbol = PointMasses | Density | RadialDensity | GaussianDensity


def is_positive(mu: MeasureSymbol) -> bool:
    """Whether the measure is known to be positive."""
    if isinstance(mu, PointMasses):
        w = mu.weights
        return bool(np.all(w.imag == 0.0) and np.all(w.real >= 0.0))
    if isinstance(mu, GaussianDensity):
        return mu.amplitude.imag == 0.0 and mu.amplitude.real >= 0.0
    return bool(mu.positive)


def require_positive(mu: MeasureSymbol, operation: str):
    if not is_positive(mu):
        raise PositivityError(f"{operation} requires a positive measure")


def support_radius_of(mu: MeasureSymbol) -> float:
    """Radius of a disk about the origin that carries (almost) all the mass."""
    if isinstance(mu, PointMasses):
        locs = mu.locations
        return float(np.abs(locs).max()) if locs.size else 0.0
    if isinstance(mu, Density):
        return abs(mu.center) + mu.support_radius
    if isinstance(mu, RadialDensity):
        if not math.isfinite(mu.support_radius):
            raise FocklabError("radial density with infinite support has no "
                               "a-priori support radius")
        return mu.support_radius
    return abs(mu.center) + mu.effective_radius()


def total_mass(mu: MeasureSymbol) -> complex:
    """mu(C): the (signed/complex) total mass."""
    if isinstance(mu, PointMasses):
        w = mu.weights
        return complex(math.fsum(w.real), math.fsum(w.imag))
    if isinstance(mu, GaussianDensity):
        return mu.amplitude * math.pi / mu.beta
    if isinstance(mu, RadialDensity) and mu.constant_value is not None:
        return mu.constant_value * math.pi * mu.support_radius ** 2
    nodes, weights, values = density_samples(mu)
    terms = weights * values
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def total_variation(mu: MeasureSymbol) -> float:
    """|mu|(C): total variation mass."""
    if isinstance(mu, PointMasses):
        return math.fsum(np.abs(mu.weights))
    if isinstance(mu, GaussianDensity):
        return abs(mu.amplitude) * math.pi / mu.beta
    if isinstance(mu, RadialDensity) and mu.constant_value is not None:
        return abs(mu.constant_value) * math.pi * mu.support_radius ** 2
    nodes, weights, values = density_samples(mu)
    return math.fsum(weights * np.abs(values))


def density_samples(mu: MeasureSymbol, radial_nodes: int = 96,
                    angular_nodes: int | None = None):
    """Quadrature view (nodes, weights, density values) of a density variant.

    Nodes are absolute complex coordinates; weights carry the area Jacobian.
    Point masses are not densities and are rejected.
    """
    if isinstance(mu, PointMasses):
        raise FocklabError("point masses have no density samples")
    if isinstance(mu, Density):
        center, radius = mu.center, mu.support_radius
    elif isinstance(mu, RadialDensity):
        if not math.isfinite(mu.support_radius):
            raise FocklabError("sampling a radial density needs finite support")
        center, radius = 0j, mu.support_radius
    else:
        center, radius = mu.center, mu.effective_radius()
    grid = polar_grid(radius, radial_nodes,
                      angular_nodes or max(128, min_angular_nodes(radial_nodes)))
    nodes = center + grid.nodes
    return nodes, grid.weights, density_values(mu, nodes)


def density_values(mu: MeasureSymbol, nodes) -> np.ndarray:
    """Density values at absolute complex coordinates.

    Sampling a radial or declared-support density outside its support returns
    zero, so callers must keep quadrature domains inside the support to avoid
    integrating across the cutoff jump.
    """
    if isinstance(mu, PointMasses):
        raise FocklabError("point masses have no density values")
    nodes = np.asarray(nodes, dtype=complex)
    if isinstance(mu, Density):
        values = np.where(np.abs(nodes - mu.center) <= mu.support_radius,
                          np.asarray(mu.func(nodes), dtype=complex), 0j)
    elif isinstance(mu, RadialDensity):
        t = np.abs(nodes)
        # Clamp before evaluating: profiles need not be defined past support.
        inside = mu.profile_values(np.minimum(t, mu.support_radius))
        values = np.where(t <= mu.support_radius, inside, 0j)
    else:
        values = mu.amplitude * np.exp(-mu.beta * np.abs(nodes - mu.center) ** 2)
    return values


def _heat_kernel_nodes(mu: MeasureSymbol, alpha: float, z_max: float):
    """Node counts resolving e^{-alpha|z-w|^2} over the measure's support."""
    s = support_radius_of(mu)
    radial = max(96, math.ceil(12.0 * s * math.sqrt(alpha)))
    angular = max(192, min_angular_nodes(math.ceil(2.0 * alpha * s * z_max) + 16))
    return radial, angular


def berezin_measure(mu: MeasureSymbol, z, params: FockParams):
    """Heat-kernel transform (alpha/pi) integral e^{-alpha|z-w|^2} d mu(w).

    ``z`` may be a complex scalar or array; the result matches its shape.
    """
    alpha = params.alpha
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if isinstance(mu, GaussianDensity):
        s = alpha * mu.beta / (alpha + mu.beta)
        out = (mu.amplitude * alpha / (alpha + mu.beta)
               * np.exp(-s * np.abs(z_arr - mu.center) ** 2))
    else:
        if isinstance(mu, PointMasses):
            w, c = mu.locations, mu.weights
        else:
            radial, angular = _heat_kernel_nodes(mu, alpha,
                                                 float(np.abs(z_arr).max()))
            w, wt, values = density_samples(mu, radial, angular)
            c = wt * values
        chunks = []
        for start in range(0, z_arr.size, 512):
            blk = z_arr.ravel()[start:start + 512]
            ker = np.exp(-alpha * np.abs(blk[:, None] - w[None, :]) ** 2)
            chunks.append(ker @ c)
        out = (alpha / math.pi) * np.concatenate(chunks).reshape(z_arr.shape)
    return complex(out[0]) if np.isscalar(z) or np.asarray(z).ndim == 0 else out


_PAD_NATS = 28.1  # e^{-28.1} < 1e-12, so the boundary check clears its budget


def berezin_grid(mu: MeasureSymbol, params: FockParams,
                 radial_nodes: int | None = None,
                 angular_nodes: int | None = None) -> PolarGrid:
    """Grid over which the Berezin transform carries essentially all its mass.

    The cutoff pads the support by sqrt(28.1 / alpha), a shade over the
    5 / sqrt(alpha) heat-kernel width, so boundary values sit below 1e-12
    of the peak even for mass at the support edge.
    """
    alpha = params.alpha
    s = support_radius_of(mu)
    radius = s + math.sqrt(_PAD_NATS / alpha)
    if radial_nodes is None:
        radial_nodes = max(128, math.ceil(12.0 * radius * math.sqrt(alpha)))
    if angular_nodes is None:
        freq = int(2.0 * alpha * s * radius) + 16
        angular_nodes = max(128, min_angular_nodes(freq))
    return polar_grid(radius, radial_nodes, angular_nodes)


def berezin_lr_norm(mu: MeasureSymbol, r: float, params: FockParams,
                    grid: PolarGrid | None = None) -> float:
    """L^r(dA) norm of the Berezin transform of mu.

    The default grid extends 5 / sqrt(alpha) beyond the support; a grid whose
    boundary still sees the transform is rejected.  For r = inf the supremum
    also probes the natural peak candidates (origin, atoms, centers), since
    polar nodes never sit exactly there.
    """
    if grid is None:
        grid = berezin_grid(mu, params)
    if isinstance(mu, RadialDensity):
        # a radial symbol has a radial transform, so one ray of samples
        # plus the exact angular factor replaces the full grid sweep
        mags = np.abs(berezin_measure(mu, grid.radii.astype(complex), params))
        weights = 2.0 * math.pi * grid.radial_weights * grid.radii
        ring = float(mags[-1])
    else:
        mags = np.abs(berezin_measure(mu, grid.nodes, params))
        weights = grid.weights
        ring = float(mags[-grid.n_angular:].max())
    peak = float(mags.max())
    if peak > 0.0 and ring > 1e-12 * peak:
        raise GridExtentError(
            f"berezin grid cutoff {grid.cutoff_radius:g} too small: boundary "
            f"magnitude {ring:.3g} vs peak {peak:.3g}")
    if r == math.inf:
        probes = [0j]
        if isinstance(mu, PointMasses):
            probes.extend(mu.locations.tolist())
        elif not isinstance(mu, RadialDensity):
            probes.append(mu.center)
        extra = [abs(berezin_measure(mu, p, params)) for p in probes]
        return max([peak] + extra)
    if not r >= 1.0:
        raise ValueError(f"Lebesgue exponent must be >= 1, got {r!r}")
    return math.fsum(weights * mags ** r) ** (1.0 / r)


def berezin_lr_constant(alpha: float, r: float) -> float:
    """Sharp-order constant with ||berezin(mu)||_r <= C_r |mu|(C)."""
    if r == math.inf:
        return alpha / math.pi
    return alpha / math.pi * (math.pi / (r * alpha)) ** (1.0 / r)


@dataclass(frozen=True)
class AdmissibilityReport:
    """Probe of the defining square-kernel integrability condition."""

    z_samples: tuple
    values: tuple
    refined_values: tuple
    admissible: bool


def admissibility_probe(mu: MeasureSymbol, z_samples,
                        params: FockParams) -> AdmissibilityReport:
    """Evaluate integral |K(z,w)|^2 e^{-alpha|w|^2} d|mu|(w) at probe points.

    The probe recomputes on a refined grid; disagreement flags a measure the
    toolkit cannot treat (the report is informational, not an exception).
    """
    alpha = params.alpha

    def evaluate(radial):
        if isinstance(mu, PointMasses):
            w, c = mu.locations, np.abs(mu.weights)
        else:
            w, wt, values = density_samples(mu, radial_nodes=radial)
            c = wt * np.abs(values)
        out = []
        for z in z_samples:
            z = complex(z)
            expo = 2.0 * alpha * np.real(z * np.conj(w)) - alpha * np.abs(w) ** 2
            out.append(float(np.exp(expo) @ c))
        return out

    coarse = evaluate(96)
    fine = evaluate(192)
    ok = all(abs(a - b) <= 1e-6 * (1.0 + abs(b)) for a, b in zip(coarse, fine))
    return AdmissibilityReport(tuple(complex(z) for z in z_samples),
                               tuple(coarse), tuple(fine), ok)


def translate(mu: MeasureSymbol, offset: complex) -> MeasureSymbol:
    """The pushforward of mu under w -> w + offset."""
    offset = complex(offset)
    if isinstance(mu, PointMasses):
        return PointMasses(tuple((w + offset, c) for w, c in mu.points))
    if isinstance(mu, GaussianDensity):
        return GaussianDensity(mu.amplitude, mu.beta, mu.center + offset)
    if isinstance(mu, Density):
        inner = mu.func
        return Density(lambda w: inner(w - offset), mu.support_radius,
                       mu.center + offset, positive=mu.positive)
    shifted = mu  # radial: rewrap about the new center
    if shifted.constant_value is not None:
        value = shifted.constant_value
        return Density(lambda w: np.full(np.shape(w), value, dtype=complex),
                       shifted.support_radius, offset,
                       positive=is_positive(shifted))
    profile = shifted.profile
    return Density(lambda w: np.asarray(profile(np.abs(w - offset)),
                                        dtype=complex),
                   shifted.support_radius, offset, positive=shifted.positive)


def disk_cell_area(x0: float, x1: float, y0: float, y1: float,
                   radius: float, cx: float = 0.0, cy: float = 0.0) -> float:
    """Exact area of [x0,x1] x [y0,y1] intersected with a disk.

    Evaluated by inclusion-exclusion over corner survival areas, each reduced
    to closed-form circular-segment integrals.  This is what makes lattice
    masses of disk indicators exact rather than quadrature estimates.
    """
    x0, x1 = x0 - cx, x1 - cx
    y0, y1 = y0 - cy, y1 - cy
    R = radius

    def half_plane(a: float) -> float:
        # area of disk with X >= a
        if a <= -R:
            return math.pi * R * R
        if a >= R:
            return 0.0
        s = math.sqrt(R * R - a * a)
        return 0.5 * math.pi * R * R - a * s - R * R * math.asin(a / R)

    def corner(a: float, b: float) -> float:
        # area of disk with X >= a, Y >= b
        if a <= -R:
            return half_plane(b)
        if b <= -R:
            return half_plane(a)
        if a < 0.0:
            return half_plane(b) - corner(-a, b)
        if b < 0.0:
            return half_plane(a) - corner(a, -b)
        if a * a + b * b >= R * R:
            return 0.0
        t = math.sqrt(R * R - b * b)

        def antiderivative(x: float) -> float:
            return 0.5 * (x * math.sqrt(R * R - x * x)
                          + R * R * math.asin(x / R)) - b * x

        return antiderivative(t) - antiderivative(a)

    area = (corner(x0, y0) - corner(x1, y0) - corner(x0, y1) + corner(x1, y1))
    return max(0.0, area)
