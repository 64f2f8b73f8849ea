"""Graded radial meshes, trapezoid quadrature and finite-difference stencils."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters

MIN_NODES = 16


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Node set on [r_min, r_max] with trapezoid weights.

    ``ratio`` is the geometric growth factor between consecutive gaps
    (1 means uniform).  Arrays are made read-only so a grid can be shared
    freely between solves.
    """

    nodes: np.ndarray
    weights: np.ndarray
    ratio: float = 1.0

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.nodes)

    def integrate(self, values) -> float:
        """Trapezoid rule for samples taken at the nodes."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.nodes.shape:
            raise InvalidParameters(
                f"expected {self.n} samples, got {values.shape}")
        return float(np.dot(self.weights, values))


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    h = np.diff(nodes)
    w = np.zeros_like(nodes)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def grid_from_nodes(nodes, ratio: float = 1.0) -> RadialGrid:
    """Wrap an explicit node array (e.g. read from a profile file)."""
    nodes = np.array(nodes, dtype=float)
    if nodes.ndim != 1 or len(nodes) < 3:
        raise InvalidParameters("a grid needs at least 3 nodes")
    if nodes[0] <= 0:
        raise InvalidParameters(f"r_min must be positive, got {nodes[0]}")
    if np.any(np.diff(nodes) <= 0):
        raise InvalidParameters("nodes must be strictly increasing")
    return RadialGrid(nodes, trapezoid_weights(nodes), ratio)


def build_grid(r_min: float, r_max: float, n_nodes: int, ratio: float = 1.0) -> RadialGrid:
    """Geometric mesh: gap k is h0 * ratio**k, so the last gap is the first
    times ratio**(n_nodes - 2)."""
    if not (r_min > 0 and r_max > r_min):
        raise InvalidParameters(
            f"need 0 < r_min < r_max, got r_min={r_min}, r_max={r_max}")
    if int(n_nodes) != n_nodes or n_nodes < MIN_NODES:
        raise InvalidParameters(f"n_nodes must be an integer >= {MIN_NODES}, got {n_nodes}")
    if not ratio >= 1.0:
        raise InvalidParameters(f"ratio must be >= 1, got {ratio}")
    n_nodes = int(n_nodes)
    span = r_max - r_min
    k = np.arange(n_nodes - 1)
    if ratio == 1.0:
        gaps = np.full(n_nodes - 1, span / (n_nodes - 1))
    else:
        # log-space keeps ratio**k finite for long meshes
        gaps = np.exp(k * np.log(ratio))
        gaps *= span / gaps.sum()
    nodes = np.empty(n_nodes)
    nodes[0] = r_min
    nodes[1:] = r_min + np.cumsum(gaps)
    nodes[-1] = r_max
    return RadialGrid(nodes, trapezoid_weights(nodes), float(ratio))


def extend_inward(grid: RadialGrid, new_r_min: float) -> RadialGrid:
    """Prepend nodes down to ``new_r_min`` while keeping every existing node.

    The prepended gaps continue the geometric progression inward and are
    rescaled to land exactly on ``new_r_min``.
    """
    if not 0 < new_r_min < grid.r_min:
        raise InvalidParameters(
            f"new r_min must lie in (0, {grid.r_min}), got {new_r_min}")
    distance = grid.r_min - new_r_min
    h0 = grid.gaps[0]
    q = grid.ratio
    # inward geometric gaps h0/q, h0/q², ... sum to at most h0/(q-1)
    limit = np.inf if q == 1.0 else h0 / (q - 1.0)
    if q == 1.0 or distance >= limit:
        count = max(1, int(np.ceil(distance / h0)))
        new_gaps = np.full(count, distance / count)
    else:
        count = max(1, int(np.ceil(-np.log1p(-distance / limit) / np.log(q))))
        new_gaps = h0 * q ** -np.arange(count, 0, -1.0)
        new_gaps *= distance / new_gaps.sum()
    inner = new_r_min + np.concatenate(([0.0], np.cumsum(new_gaps)[:-1]))
    nodes = np.concatenate((inner, grid.nodes))
    nodes[0] = new_r_min
    return RadialGrid(nodes, trapezoid_weights(nodes), grid.ratio)


def _check_samples(grid: RadialGrid, samples) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != grid.nodes.shape:
        raise InvalidParameters(
            f"samples have shape {samples.shape}, grid has {grid.n} nodes")
    return samples


def derivative_stencil(grid: RadialGrid, samples) -> np.ndarray:
    """Second-order first derivative on a non-uniform mesh.

    Three-point central formula in the interior, three-point one-sided
    formulas at both ends.
    """
    y = _check_samples(grid, samples)
    h = grid.gaps
    hm, hp = h[:-1], h[1:]
    d = np.empty_like(y)
    d[1:-1] = (-hp / (hm * (hm + hp)) * y[:-2]
               + (hp - hm) / (hm * hp) * y[1:-1]
               + hm / (hp * (hm + hp)) * y[2:])
    a, b = h[0], h[1]
    d[0] = (-(2 * a + b) / (a * (a + b)) * y[0]
            + (a + b) / (a * b) * y[1]
            - a / (b * (a + b)) * y[2])
    a, b = h[-1], h[-2]
    d[-1] = ((2 * a + b) / (a * (a + b)) * y[-1]
             - (a + b) / (a * b) * y[-2]
             + a / (b * (a + b)) * y[-3])
    return d


def second_derivative_stencil(grid: RadialGrid, samples) -> np.ndarray:
    """Three-point second derivative at the interior nodes (length N-2)."""
    y = _check_samples(grid, samples)
    h = grid.gaps
    hm, hp = h[:-1], h[1:]
    return 2.0 * ((y[2:] - y[1:-1]) / hp - (y[1:-1] - y[:-2]) / hm) / (hm + hp)
