"""Truncated matrix realizations of Toeplitz and Hankel operators.

Matrices act on the span of the first N normalized monomials.  Entry (m, n)
is the pairing of the operator applied to basis input n against basis output
m, so composition of operators is the matrix product in natural order.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincc

from .errors import FocklabError, GridExtentError, TruncationError
from .fock import FockParams
from .measure import (Density, GaussianDensity, MeasureSymbol, PointMasses,
                      RadialDensity, density_values, support_radius_of)
from .numerics import (PolarGrid, log_basis_coeff, log_factorial, polar_grid,
                       tail_radius)

_TAIL_TOL = 1e-12
_REFINE_TOL = 1e-8


def _freeze(entries: np.ndarray) -> np.ndarray:
    entries = np.ascontiguousarray(entries, dtype=complex)
    entries.setflags(write=False)
    return entries


@dataclass(frozen=True)
class TruncatedOperator:
    """N x N matrix of an operator against the normalized monomial basis.

    Row index is the output coefficient, column index the input.  Entries are
    immutable once assembled; provenance records which builder produced them.
    """

    entries: np.ndarray
    truncation: int
    params: FockParams
    provenance: str = ""

    def __post_init__(self):
        entries = _freeze(self.entries)
        if entries.shape != (self.truncation, self.truncation):
            raise ValueError("entries must be truncation x truncation")
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class HankelMatrix:
    """Complex symmetric (not Hermitian) N x N bilinear-pairing matrix."""

    entries: np.ndarray
    truncation: int
    params: FockParams

    def __post_init__(self):
        entries = _freeze(self.entries)
        if entries.shape != (self.truncation, self.truncation):
            raise ValueError("entries must be truncation x truncation")
        if not np.array_equal(entries, entries.T):
            raise ValueError("hankel entries must be symmetric")
        object.__setattr__(self, "entries", entries)


def basis_matrix(nodes, size: int, alpha: float) -> np.ndarray:
    """Weighted basis samples e_n(z_i) e^{-alpha |z_i|^2 / 2} as E[n, i].

    Every entry has modulus at most 1 (the columns are coefficient vectors of
    unit-norm normalized kernels), so the log-space assembly cannot overflow.
    """
    nodes = np.asarray(nodes, dtype=complex).ravel()
    n = np.arange(size)
    with np.errstate(divide="ignore"):
        log_t = np.log(np.abs(nodes))
    theta = np.angle(nodes)
    with np.errstate(invalid="ignore"):
        radial = np.where(n[:, None] == 0, 0.0, n[:, None] * log_t[None, :])
    log_mag = (log_basis_coeff(n, alpha)[:, None] + radial
               - 0.5 * alpha * np.abs(nodes)[None, :] ** 2)
    return np.exp(log_mag) * np.exp(1j * n[:, None] * theta[None, :])


def _quadrature_grid(size: int, params: FockParams,
                     support: float = math.inf) -> PolarGrid:
    """Polar grid resolving products of the first `size` basis functions."""
    cutoff = min(support, tail_radius(params.alpha, 2 * size, 1e-15))
    return polar_grid(cutoff, max(96, 2 * size), max(192, 4 * size))


def _refined(grid: PolarGrid) -> PolarGrid:
    return polar_grid(grid.cutoff_radius, (3 * grid.n_radial) // 2,
                      2 * grid.n_angular)


def _density_support(mu) -> float:
    if isinstance(mu, GaussianDensity):
        return abs(mu.center) + mu.effective_radius(1e-18)
    if isinstance(mu, Density):
        return abs(mu.center) + mu.support_radius
    return support_radius_of(mu)


def build_from_point_masses(mu: PointMasses, size: int,
                            params: FockParams) -> TruncatedOperator:
    """Matrix of the Toeplitz operator with a finite point-mass symbol."""
    weights = mu.weights
    e = basis_matrix(mu.locations, size, params.alpha)
    entries = (params.alpha / math.pi) * (np.conj(e) @ (weights[:, None] * e.T))
    return TruncatedOperator(entries, size, params,
                             provenance=f"point-masses({len(weights)})")


def build_from_radial_density(profile, size: int, params: FockParams,
                              support_radius: float = math.inf
                              ) -> TruncatedOperator:
    """Diagonal matrix of a Toeplitz operator with radial density profile(|w|).

    The profile must be smooth on [0, support_radius]; a cutoff beyond which
    the profile vanishes belongs in support_radius, not inside the callable,
    or the quadrature integrates across the jump.
    """
    alpha = params.alpha
    cutoff = min(support_radius, tail_radius(alpha, 2 * size, 1e-15))
    x, w = np.polynomial.legendre.leggauss(max(96, 2 * size))
    t = 0.5 * cutoff * (x + 1.0)
    wt = 0.5 * cutoff * w
    values = np.asarray(profile(t), dtype=complex)
    if not np.all(np.isfinite(values)):
        raise FocklabError("radial profile is not finite on the grid")
    n = np.arange(size)
    log_coeff = math.log(2.0) + (n + 1) * math.log(alpha) - log_factorial(n)
    log_shape = (2 * n[:, None] + 1) * np.log(t)[None, :] - alpha * t[None, :] ** 2
    logs = log_coeff[:, None] + log_shape
    ref = logs.max(axis=1, keepdims=True)
    terms = np.exp(logs - ref) * (wt * values)[None, :]
    diag = np.exp(ref[:, 0]) * np.array(
        [complex(math.fsum(row.real), math.fsum(row.imag)) for row in terms])
    return TruncatedOperator(np.diag(diag), size, params,
                             provenance=f"radial-density(nodes={t.size})")


def _bilinear_assemble(mu, size: int, params: FockParams, grid: PolarGrid,
                       conjugate_output: bool) -> np.ndarray:
    values = density_values(mu, grid.nodes)
    e = basis_matrix(grid.nodes, size, params.alpha)
    c = grid.weights * values
    left = np.conj(e) if conjugate_output else e
    return (params.alpha / math.pi) * (left @ (c[:, None] * e.T))


def build_from_density(mu, size: int, params: FockParams,
                       grid: PolarGrid | None = None) -> TruncatedOperator:
    """Matrix of a Toeplitz operator with a density symbol by 2D quadrature.

    The result uses the given (or default) grid; a refined companion grid
    estimates the quadrature error, and disagreement beyond 1e-8 is recorded
    as a warning in the provenance rather than raised.
    """
    if isinstance(mu, PointMasses):
        raise FocklabError("use build_from_point_masses for point masses")
    if grid is None:
        grid = _quadrature_grid(size, params, _density_support(mu))
    entries = _bilinear_assemble(mu, size, params, grid, conjugate_output=True)
    check = _bilinear_assemble(mu, size, params, _refined(grid),
                               conjugate_output=True)
    gap = float(np.max(np.abs(entries - check)))
    provenance = (f"2d-quadrature(radial={grid.n_radial},"
                  f"angular={grid.n_angular})")
    if gap > _REFINE_TOL:
        provenance += f" warning: refinement disagreement {gap:.3e}"
    return TruncatedOperator(entries, size, params, provenance=provenance)


def build_from_measure(mu: MeasureSymbol, size: int,
                       params: FockParams) -> TruncatedOperator:
    """Toeplitz matrix for any measure variant, dispatched to the best builder."""
    if isinstance(mu, PointMasses):
        return build_from_point_masses(mu, size, params)
    if isinstance(mu, RadialDensity):
        return build_from_radial_density(mu.profile_values, size, params,
                                         support_radius=mu.support_radius)
    if isinstance(mu, GaussianDensity) and mu.center == 0j:
        return build_from_radial_density(
            lambda t: mu.amplitude * np.exp(-mu.beta * t ** 2), size, params,
            support_radius=mu.effective_radius(1e-18))
    return build_from_density(mu, size, params)


def build_hankel(mu: MeasureSymbol, size: int,
                 params: FockParams) -> HankelMatrix:
    """Bilinear (small Hankel) pairing matrix of the measure."""
    if isinstance(mu, PointMasses):
        e = basis_matrix(mu.locations, size, params.alpha)
        entries = (params.alpha / math.pi) * (e @ (mu.weights[:, None] * e.T))
    else:
        grid = _quadrature_grid(size, params, _density_support(mu))
        entries = _bilinear_assemble(mu, size, params, grid,
                                     conjugate_output=False)
    entries = 0.5 * (entries + entries.T)
    return HankelMatrix(entries, size, params)


def basis_tail_mass(size: int, alpha: float, z) -> np.ndarray:
    """Squared-coefficient mass of the normalized kernel at z past index size."""
    return gammainc(size, alpha * np.abs(np.asarray(z)) ** 2)


def berezin_operator(op: TruncatedOperator, z):
    """Berezin transform of the truncated operator at z (scalar or array).

    Valid only while the normalized kernel at z is representable within the
    truncation; the basis tail past N must stay below 1e-12.
    """
    scalar = np.isscalar(z) or np.ndim(z) == 0
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    tail = basis_tail_mass(op.truncation, op.params.alpha, zs)
    if np.any(tail >= _TAIL_TOL):
        worst = float(np.max(tail))
        raise TruncationError(
            f"kernel basis tail {worst:.3e} at truncation {op.truncation} "
            f"exceeds {_TAIL_TOL:g}; enlarge N or shrink |z|")
    out = _transform_samples(op.entries, zs, op.params.alpha)
    return complex(out[0]) if scalar else out


def _transform_samples(entries: np.ndarray, nodes,
                       alpha: float) -> np.ndarray:
    e = basis_matrix(nodes, entries.shape[0], alpha)
    return np.sum(e * (entries @ np.conj(e)), axis=0)


def trace(op) -> complex:
    """Sum of diagonal entries, compensated."""
    diag = np.diagonal(op.entries)
    return complex(math.fsum(diag.real), math.fsum(diag.imag))


def _covering_grid(op: TruncatedOperator,
                   grid: PolarGrid | None) -> PolarGrid:
    """Grid extending past the support of every retained basis function.

    The Gaussian-tail fraction of the top mode must stay below 1e-12, so that
    truncating a plane integral of the transform to the grid loses nothing
    the matrix can see.
    """
    alpha = op.params.alpha
    size = op.truncation
    if grid is None:
        cutoff = tail_radius(alpha, 2 * size, 1e-13)
        grid = polar_grid(cutoff, max(96, 2 * size), max(64, 2 * size))
    rim = gammaincc(size, alpha * grid.cutoff_radius ** 2)
    if rim > _TAIL_TOL:
        raise GridExtentError(
            f"grid radius {grid.cutoff_radius:.3g} leaves basis mass "
            f"{rim:.3e} outside; extend the grid for truncation {size}")
    return grid


def trace_via_berezin(op: TruncatedOperator,
                      grid: PolarGrid | None = None) -> complex:
    """Trace recovered as the plane integral of the Berezin transform."""
    grid = _covering_grid(op, grid)
    alpha = op.params.alpha
    weighted = grid.weights * _transform_samples(op.entries, grid.nodes, alpha)
    return (alpha / math.pi) * complex(math.fsum(weighted.real),
                                       math.fsum(weighted.imag))


def transform_l1_norm(op: TruncatedOperator,
                      grid: PolarGrid | None = None) -> float:
    """Plane integral of |transform|, scaled by alpha/pi.

    For any trace-class operator this lies below the Schatten 1-norm; no
    pointwise truncation-tail check applies because the integrand is the
    truncated operator's own transform.
    """
    grid = _covering_grid(op, grid)
    alpha = op.params.alpha
    samples = _transform_samples(op.entries, grid.nodes, alpha)
    return (alpha / math.pi) * math.fsum(grid.weights * np.abs(samples))


def identity_operator(size: int, params: FockParams) -> TruncatedOperator:
    """Truncation of the identity (projection onto the first N modes)."""
    return TruncatedOperator(np.eye(size, dtype=complex), size, params,
                             provenance="identity")


def singular_values(op) -> np.ndarray:
    try:
        return np.linalg.svd(op.entries, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise FocklabError(f"singular value decomposition failed: {exc}")


def schatten_norm(op, s: float) -> float:
    """Schatten s-norm from singular values; s=inf is the operator norm."""
    if not s >= 1.0:
        raise ValueError("schatten order must be >= 1")
    sigma = singular_values(op)
    if sigma.size == 0:
        return 0.0
    if math.isinf(s):
        return float(sigma[0])
    return math.fsum(sigma ** s) ** (1.0 / s)


def adjoint_isometry_check(op: TruncatedOperator) -> tuple[float, float]:
    """Trace norms of the operator and its adjoint (equal in exact arithmetic)."""
    adj = TruncatedOperator(op.entries.conj().T, op.truncation, op.params,
                            provenance=f"adjoint[{op.provenance}]")
    return schatten_norm(op, 1.0), schatten_norm(adj, 1.0)


def trace_pairing(phi, op: TruncatedOperator,
                  grid: PolarGrid | None = None) -> tuple[complex, complex]:
    """Trace of T_phi . S two ways: matrix trace and Berezin-transform integral.

    phi must be a compactly supported density variant; the operator's Berezin
    transform must be truncation-valid over that support.
    """
    if isinstance(phi, PointMasses):
        raise FocklabError("trace pairing needs a density symbol")
    params = op.params
    size = op.truncation
    support = _density_support(phi)
    if not math.isfinite(support):
        raise FocklabError("trace pairing needs a compactly supported symbol")
    left = build_from_measure(phi, size, params)
    product = left.entries @ op.entries
    matrix_side = complex(math.fsum(np.diagonal(product).real),
                          math.fsum(np.diagonal(product).imag))
    if grid is None:
        grid = _quadrature_grid(size, params, support)
    tail = basis_tail_mass(size, params.alpha, grid.cutoff_radius)
    if tail >= _TAIL_TOL:
        raise TruncationError(
            f"kernel basis tail {float(tail):.3e} over the symbol support "
            f"exceeds {_TAIL_TOL:g} at truncation {size}")
    values = density_values(phi, grid.nodes)
    transform = berezin_operator(op, grid.nodes)
    weighted = grid.weights * values * transform
    quad_side = (params.alpha / math.pi) * complex(
        math.fsum(weighted.real), math.fsum(weighted.imag))
    return matrix_side, quad_side


def _entry_lists(entries: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in entries]


def export_json(op, path: str):
    """Serialize a matrix (either kind) with bit-exact float round-trip."""
    kind = "hankel" if isinstance(op, HankelMatrix) else "toeplitz"
    payload = {
        "kind": kind,
        "truncation": op.truncation,
        "alpha": op.params.alpha,
        "p": op.params.p,
        "q": op.params.q,
        "entries": _entry_lists(op.entries),
    }
    if kind == "toeplitz":
        payload["provenance"] = op.provenance
    with open(path, "w") as fh:
        json.dump(payload, fh, separators=(",", ":"))


def import_json(path: str):
    with open(path) as fh:
        payload = json.load(fh)
    entries = np.array([[complex(re, im) for re, im in row]
                        for row in payload["entries"]])
    params = FockParams(alpha=payload["alpha"], p=payload["p"],
                        q=payload["q"])
    if payload["kind"] == "hankel":
        return HankelMatrix(entries, payload["truncation"], params)
    return TruncatedOperator(entries, payload["truncation"], params,
                             provenance=payload["provenance"])


def export_csv(op, path: str):
    """Flattened entries only; header m,n,re,im; bit-exact floats."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "n", "re", "im"])
        for m in range(op.truncation):
            for n in range(op.truncation):
                v = op.entries[m, n]
                writer.writerow([m, n, repr(float(v.real)),
                                 repr(float(v.imag))])


def import_csv(path: str) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["m", "n", "re", "im"]:
        raise FocklabError("unexpected csv header")
    size = max(int(r[0]) for r in rows[1:]) + 1
    entries = np.zeros((size, size), dtype=complex)
    for m, n, re, im in rows[1:]:
        entries[int(m), int(n)] = complex(float(re), float(im))
    return entries
