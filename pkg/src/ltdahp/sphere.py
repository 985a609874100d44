"""Point configurations on the unit sphere S^{d-1}.

Inner weights for the deterministic scheme come from the recursive zonal
equal-area (EQ) partition: the sphere is cut into two polar caps and a stack
of collars, each collar is partitioned recursively as a lower dimensional
sphere, and the region centres are returned.  A Riesz energy evaluator and a
projected gradient refinement are provided as quality diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq
from scipy.spatial.distance import pdist
from scipy.special import betainc, gammaln

__all__ = [
    "DegenerateConfigurationError",
    "SphereConfig",
    "RieszParams",
    "eq_points",
    "riesz_energy",
    "refine_energy",
    "min_pairwise_distance",
    "save_points",
    "load_points",
]

NORM_TOL = 1e-12


class DegenerateConfigurationError(ValueError):
    """Raised when a configuration contains coincident points."""


@dataclass(frozen=True)
class SphereConfig:
    """An ordered set of ``n`` distinct unit vectors in R^d."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a non-empty (n, d) array")
        if pts.shape[1] < 2:
            raise ValueError(f"ambient dimension must be >= 2, got {pts.shape[1]}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        norms = np.linalg.norm(pts, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOL)
        if bad.size:
            raise ValueError(f"point {bad[0]} has norm {norms[bad[0]]!r}, expected 1")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, SphereConfig):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    __hash__ = None


@dataclass(frozen=True)
class RieszParams:
    """Exponent of the Riesz energy; ``tau = 0`` selects the logarithmic energy."""

    tau: float

    def __post_init__(self):
        if not (self.tau >= 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be a finite number >= 0, got {self.tau!r}")


# ---------------------------------------------------------------------------
# Recursive zonal equal-area partition.  ``dim`` below is the dimension of the
# sphere itself, S^dim in R^{dim+1}.


def _sphere_area(dim):
    return 2.0 * math.exp((dim + 1) / 2 * math.log(math.pi) - gammaln((dim + 1) / 2))


def _cap_area(dim, s_cap):
    if dim == 1:
        return 2.0 * s_cap
    if dim == 2:
        return 4.0 * math.pi * math.sin(s_cap / 2) ** 2
    return _sphere_area(dim) * betainc(dim / 2, dim / 2, math.sin(s_cap / 2) ** 2)


def _cap_radius(dim, area):
    """Spherical radius of the cap of a given area."""
    if area >= _sphere_area(dim):
        return math.pi
    if dim == 1:
        return area / 2
    if dim == 2:
        return 2.0 * math.asin(math.sqrt(area / math.pi) / 2)
    return brentq(lambda s: _cap_area(dim, s) - area, 0.0, math.pi, xtol=1e-15, rtol=1e-15)


def _round(x):
    # half away from zero, for x >= 0
    return math.floor(x + 0.5)


def _eq_caps(dim, n):
    """Colatitudes of the zone boundaries and the region count per zone."""
    if dim == 1:
        return [2.0 * math.pi * k / n for k in range(1, n + 1)], [1] * n
    if n == 1:
        return [math.pi], [1]
    ideal_area = _sphere_area(dim) / n
    c_polar = math.pi / 2 if n == 2 else _cap_radius(dim, ideal_area)

    n_collars = 0
    if n > 2:
        ideal_angle = ideal_area ** (1.0 / dim)
        n_collars = max(1, _round((math.pi - 2 * c_polar) / ideal_angle))

    ideal_counts = [1.0]
    if n_collars:
        fitting = (math.pi - 2 * c_polar) / n_collars
        for c in range(n_collars):
            top = c_polar + c * fitting
            collar_area = _cap_area(dim, top + fitting) - _cap_area(dim, top)
            ideal_counts.append(collar_area / ideal_area)
    ideal_counts.append(1.0)

    counts = []
    discrepancy = 0.0
    for r in ideal_counts:
        k = _round(r + discrepancy)
        discrepancy += r - k
        counts.append(int(k))

    caps = [c_polar]
    subtotal = 1
    for c in range(n_collars):
        subtotal += counts[1 + c]
        caps.append(_cap_radius(dim, subtotal * ideal_area))
    caps.append(math.pi)
    return caps, counts


def _eq_polar(dim, n):
    """Polar coordinates (n, dim) of EQ region centres on S^dim."""
    if n == 1:
        return np.zeros((1, dim))
    caps, counts = _eq_caps(dim, n)
    if dim == 1:
        return (np.asarray(caps) - math.pi / n).reshape(-1, 1)

    out = np.zeros((n, dim))
    row = 1
    for c in range(len(counts) - 2):
        m = counts[1 + c]
        sub = _eq_polar(dim - 1, m)
        out[row:row + m, : dim - 1] = sub
        out[row:row + m, dim - 1] = (caps[c] + caps[c + 1]) / 2
        row += m
    out[row, dim - 1] = math.pi
    return out


def _polar_to_cart(s):
    m, dim = s.shape
    x = np.zeros((m, dim + 1))
    sinprod = np.ones(m)
    for k in range(dim - 1, 0, -1):
        x[:, k + 1] = sinprod * np.cos(s[:, k])
        sinprod = sinprod * np.sin(s[:, k])
    x[:, 1] = sinprod * np.sin(s[:, 0])
    x[:, 0] = sinprod * np.cos(s[:, 0])
    return x


def eq_points(d: int, n: int) -> SphereConfig:
    """Centres of the recursive zonal equal-area partition of S^{d-1} into n regions.

    The first cap is centred on the north pole ``e_d`` and no azimuthal
    offset is applied between collars, so the output is reproducible bit for
    bit.  On the circle (``d == 2``) the points are exactly
    ``(cos 2πk/n, sin 2πk/n)`` for ``k = 0..n-1``.
    """
    d, n = int(d), int(n)
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d == 2:
        angles = 2.0 * math.pi * np.arange(n) / n
        pts = np.column_stack([np.cos(angles), np.sin(angles)])
    else:
        pts = _polar_to_cart(_eq_polar(d - 1, n))
    # trig round-off can leave norms a few ulps away from 1
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return SphereConfig(pts)


# ---------------------------------------------------------------------------
# Energy


def _pair_distances(points):
    dist = pdist(points)
    if dist.size and dist.min() <= 0:
        raise DegenerateConfigurationError("configuration contains coincident points")
    return dist


def _energy(points, tau):
    dist = _pair_distances(points)
    if tau == 0:
        return -2.0 * math.fsum(np.log(dist))
    return 2.0 * math.fsum(dist ** (-tau))


def riesz_energy(config: SphereConfig, params: RieszParams) -> float:
    """Riesz energy summed over ordered pairs ``i != j``.

    For ``tau > 0`` this is ``sum |x_i - x_j|^-tau``; for ``tau == 0`` it is
    ``sum -log |x_i - x_j|``.
    """
    return _energy(config.points, params.tau)


def _energy_gradient(points, tau):
    diff = points[:, None, :] - points[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(sq, np.inf)
    coef = -2.0 * tau * sq ** (-(tau + 2) / 2)
    grad = np.einsum("ij,ijk->ik", coef, diff)
    # project onto the tangent space at each point
    return grad - np.sum(grad * points, axis=1, keepdims=True) * points


def refine_energy(
    config: SphereConfig,
    params: RieszParams,
    max_steps: int = 100,
    tol: float = 1e-10,
    callback=None,
) -> SphereConfig:
    """Lower the Riesz energy by projected gradient descent.

    Each step moves every point against the tangential energy gradient and
    renormalises it onto the sphere.  The step length is found by
    backtracking so the energy strictly decreases; a step that cannot be
    made to decrease the energy ends the iteration.  Iteration also stops
    once the relative decrease drops below ``tol``.

    ``callback(step, energy)`` is invoked with the starting energy (step 0)
    and after every accepted step.
    """
    if params.tau <= 0:
        raise ValueError("refine_energy requires tau > 0; the logarithmic energy is not supported")
    if max_steps < 0:
        raise ValueError(f"max_steps must be >= 0, got {max_steps}")
    x = config.points.copy()
    tau = params.tau
    energy = _energy(x, tau)
    if callback is not None:
        callback(0, energy)
    if config.n < 2:
        return config

    step = None
    for it in range(1, max_steps + 1):
        grad = _energy_gradient(x, tau)
        gnorm2 = float(np.sum(grad * grad))
        if gnorm2 == 0.0:
            break
        if step is None:
            step = 0.1 * min_pairwise_distance(SphereConfig(x)) / math.sqrt(np.max(np.sum(grad * grad, axis=1)))
        else:
            step *= 2.0
        accepted = False
        for _ in range(60):
            trial = x - step * grad
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            try:
                new_energy = _energy(trial, tau)
            except DegenerateConfigurationError:
                new_energy = math.inf
            if new_energy <= energy - 1e-4 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        decrease = energy - new_energy
        x, energy = trial, new_energy
        if callback is not None:
            callback(it, energy)
        if decrease <= tol * abs(energy):
            break
    return SphereConfig(x)


def min_pairwise_distance(config: SphereConfig) -> float:
    """Smallest Euclidean distance between two distinct points (``inf`` when n == 1)."""
    if config.n < 2:
        return math.inf
    return float(pdist(config.points).min())


# ---------------------------------------------------------------------------
# CSV exchange


def save_points(config: SphereConfig, path, comments=()) -> None:
    d, n = config.ambient_dim, config.n
    lines = [f"# sphere d={d} n={n}"]
    lines += [f"# {c}" for c in comments]
    lines += [",".join(f"{v:.17g}" for v in row) for row in config.points]
    Path(path).write_text("\n".join(lines) + "\n")


def load_points(path) -> SphereConfig:
    rows = []
    header = None
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if header is None and line[1:].strip().startswith("sphere"):
                header = dict(tok.split("=") for tok in line[1:].split()[1:])
            continue
        rows.append([float(v) for v in line.split(",")])
    if header is None:
        raise ValueError(f"{path}: missing '# sphere d=<d> n=<n>' header")
    pts = np.array(rows, dtype=float)
    if pts.shape != (int(header["n"]), int(header["d"])):
        raise ValueError(f"{path}: header says n={header['n']} d={header['d']}, found shape {pts.shape}")
    return SphereConfig(pts)
