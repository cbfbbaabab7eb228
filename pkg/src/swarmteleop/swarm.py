"""Coverage-controlled swarm simulation.

A commanded polygon becomes a Gaussian-mixture coverage density on a fixed
raster over the arena. Robots with unicycle kinematics descend the
locational cost by moving toward the density-weighted centroids of their
grid Voronoi cells; single-integrator commands are turned into wheel
commands through an offset-point change of coordinates.
"""

from __future__ import annotations

import json
import math
import socket
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .dictionary import ArenaSpec, PolygonSpec

__all__ = [
    "DensityField",
    "GmmComponent",
    "RobotPose",
    "SwarmParams",
    "SwarmState",
    "broadcast_density",
    "centroids",
    "control_step",
    "export_density_csv",
    "export_poses_csv",
    "gmm_components",
    "polygon_to_gmm",
    "random_swarm",
    "settled",
    "unicycle_commands",
    "voronoi_partition",
]

_VERTEX_VAR = 0.007  # coordinate-wise vertex variance per unit of edge-segment length
_EDGE_VAR_ALONG = 0.07
_EDGE_VAR_ACROSS = 0.007
_DENSITY_FLOOR = 1e-9
_DUPLICATE_EPS = 1e-9


@dataclass(frozen=True)
class GmmComponent:
    mean: tuple[float, float]
    cov: tuple[tuple[float, float], tuple[float, float]]
    weight: float


@dataclass(frozen=True)
class RobotPose:
    """External view of one robot: planar position, heading, wheel commands."""

    x: float
    y: float
    theta: float
    v: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True)
class SwarmParams:
    kappa: float = 1.0  # proportional gain toward the cell centroid
    lam: float = 0.05  # offset-point distance for the unicycle mapping
    dt: float = 0.02
    # commanded-speed floor sits near 3e-3 on dictionary densities (grid
    # jitter keeps centroids creeping), so the detector must sit above it
    settle_speed: float = 0.01
    grid_shape: tuple[int, int] = (150, 100)  # (nx, ny) cells
    neighbor_coupling: bool = False

    def __post_init__(self):
        if min(self.kappa, self.lam, self.dt) <= 0:
            raise ValueError("kappa, lambda, dt must be positive")


@dataclass
class DensityField:
    """GMM parameters plus their raster over the arena.

    ``phi`` has shape (ny, nx) and is floored and normalized so that
    phi.sum() * cell_area == 1.
    """

    components: tuple[GmmComponent, ...]
    arena: ArenaSpec
    phi: np.ndarray
    qx: np.ndarray  # flattened cell-center coordinates, length nx*ny
    qy: np.ndarray
    cell_area: float


@dataclass
class SwarmState:
    positions: np.ndarray  # (n, 2)
    headings: np.ndarray  # (n,)
    density: DensityField
    params: SwarmParams = field(default_factory=SwarmParams)
    commands: np.ndarray | None = None  # (n, 2) of (v, omega)
    pdot: np.ndarray | None = None  # last commanded planar velocities

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        self.headings = np.asarray(self.headings, dtype=float)
        if self.positions.shape[0] < 1:
            raise ValueError("need at least one robot")
        if self.commands is None:
            self.commands = np.zeros_like(self.positions)

    @property
    def n_robots(self) -> int:
        return self.positions.shape[0]

    def poses(self) -> list[RobotPose]:
        return [
            RobotPose(
                x=float(p[0]),
                y=float(p[1]),
                theta=float(t),
                v=float(c[0]),
                omega=float(c[1]),
            )
            for p, t, c in zip(self.positions, self.headings, self.commands)
        ]


def gmm_components(poly: PolygonSpec) -> tuple[GmmComponent, ...]:
    """Mixture components for a polygon: one per vertex, two per edge.

    For an edge from v1 to v2 let w = 2(v2 - v1)/3. Vertices carry
    isotropic covariance 0.007*|w|; the two edge components sit at
    v1 + w/2 and v1 + w with eigen-variances 0.07*|w| along the edge and
    0.007*|w| across it. Weights are uniform.
    """
    if poly.radius <= 0:
        raise ValueError("polygon radius must be positive")
    verts = poly.vertices()
    n = len(verts)
    comps: list[GmmComponent] = []
    for i in range(n):
        v1 = np.asarray(verts[i])
        v2 = np.asarray(verts[(i + 1) % n])
        w = 2.0 * (v2 - v1) / 3.0
        wn = float(np.linalg.norm(w))
        comps.append(
            GmmComponent(
                mean=(float(v1[0]), float(v1[1])),
                cov=((_VERTEX_VAR * wn, 0.0), (0.0, _VERTEX_VAR * wn)),
                weight=1.0,
            )
        )
        u = w / wn
        uperp = np.array([w[1], -w[0]]) / wn  # [[0,1],[-1,0]] w, normalized
        rot = np.column_stack([u, uperp])
        cov = rot @ np.diag([_EDGE_VAR_ALONG * wn, _EDGE_VAR_ACROSS * wn]) @ rot.T
        for mean in (v1 + w / 2.0, v1 + w):
            comps.append(
                GmmComponent(
                    mean=(float(mean[0]), float(mean[1])),
                    cov=tuple(map(tuple, cov)),
                    weight=1.0,
                )
            )
    total = float(len(comps))
    return tuple(replace(c, weight=c.weight / total) for c in comps)


def _grid(arena: ArenaSpec, grid_shape: tuple[int, int]):
    nx, ny = grid_shape
    xs = (np.arange(nx) + 0.5) * (arena.width / nx)
    ys = (np.arange(ny) + 0.5) * (arena.height / ny)
    qx, qy = np.meshgrid(xs, ys)  # (ny, nx)
    return qx.ravel(), qy.ravel(), (arena.width / nx) * (arena.height / ny)


def polygon_to_gmm(
    poly: PolygonSpec,
    arena: ArenaSpec = ArenaSpec(),
    grid_shape: tuple[int, int] = (150, 100),
) -> DensityField:
    """Rasterized coverage density for a polygon command."""
    comps = gmm_components(poly)
    qx, qy, cell_area = _grid(arena, grid_shape)
    phi = np.zeros_like(qx)
    for c in comps:
        cov = np.asarray(c.cov)
        det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
        if det <= 0:
            raise ValueError("component covariance is not positive definite")
        inv = np.array([[cov[1, 1], -cov[0, 1]], [-cov[1, 0], cov[0, 0]]]) / det
        dx = qx - c.mean[0]
        dy = qy - c.mean[1]
        quad = inv[0, 0] * dx * dx + (inv[0, 1] + inv[1, 0]) * dx * dy + inv[1, 1] * dy * dy
        phi += c.weight * np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))
    phi = phi + _DENSITY_FLOOR
    phi /= phi.sum() * cell_area
    ny, nx = grid_shape[1], grid_shape[0]
    return DensityField(
        components=comps,
        arena=arena,
        phi=phi.reshape(ny, nx),
        qx=qx,
        qy=qy,
        cell_area=cell_area,
    )


def _separated_positions(positions: np.ndarray) -> np.ndarray:
    """Nudge exact duplicates apart so the tessellation is well defined."""
    pos = positions.copy()
    seen: dict[tuple[float, float], int] = {}
    for i in range(pos.shape[0]):
        key = (float(pos[i, 0]), float(pos[i, 1]))
        while key in seen:
            pos[i, 0] += _DUPLICATE_EPS
            key = (float(pos[i, 0]), float(pos[i, 1]))
        seen[key] = i
    return pos


def voronoi_partition(state: SwarmState) -> tuple[np.ndarray, list[set[int]]]:
    """Assign grid cells to nearest robots; return assignment + neighbor sets.

    The assignment is a flat array over cells holding robot indices;
    robots whose cells touch across a grid edge are mutual neighbors.
    """
    pos = _separated_positions(state.positions)
    d = state.density
    dx = d.qx[None, :] - pos[:, 0, None]
    dy = d.qy[None, :] - pos[:, 1, None]
    assign = np.argmin(dx * dx + dy * dy, axis=0)

    ny, nx = d.phi.shape
    grid = assign.reshape(ny, nx)
    neighbors: list[set[int]] = [set() for _ in range(state.n_robots)]
    for a, b in ((grid[:, :-1], grid[:, 1:]), (grid[:-1, :], grid[1:, :])):
        diff = a != b
        for i, j in zip(a[diff].ravel(), b[diff].ravel()):
            neighbors[i].add(int(j))
            neighbors[j].add(int(i))
    return assign, neighbors


def centroids(state: SwarmState, assign: np.ndarray) -> np.ndarray:
    """Density-weighted centers of mass of each robot's cells."""
    d = state.density
    w = d.phi.ravel()
    n = state.n_robots
    mass = np.bincount(assign, weights=w, minlength=n)
    if np.any(mass <= 0):
        raise RuntimeError("a robot owns no grid cells; tessellation degenerate")
    cx = np.bincount(assign, weights=w * d.qx, minlength=n) / mass
    cy = np.bincount(assign, weights=w * d.qy, minlength=n) / mass
    return np.column_stack([cx, cy])


def unicycle_commands(theta: np.ndarray, pdot: np.ndarray, lam: float) -> np.ndarray:
    """Map planar velocity commands to (v, omega) via the offset point.

    [v, omega] = [[cos t, sin t], [-sin t / lam, cos t / lam]] pdot; the
    point lam ahead of the axle then tracks pdot exactly.
    """
    ct, st = np.cos(theta), np.sin(theta)
    v = ct * pdot[:, 0] + st * pdot[:, 1]
    om = (-st * pdot[:, 0] + ct * pdot[:, 1]) / lam
    return np.column_stack([v, om])


def _locational_cost(state: SwarmState, assign: np.ndarray) -> float:
    d = state.density
    pos = state.positions
    dx = d.qx - pos[assign, 0]
    dy = d.qy - pos[assign, 1]
    return float(((dx * dx + dy * dy) * d.phi.ravel()).sum() * d.cell_area)


def _centroids_at(state: SwarmState, positions: np.ndarray) -> np.ndarray:
    probe = replace_positions(state, positions)
    assign, _ = voronoi_partition(probe)
    return centroids(probe, assign)


def _coupling_term(state: SwarmState, cents: np.ndarray, neighbors: list[set[int]]) -> np.ndarray:
    """Finite-difference neighbor coupling sum_j (dc_i/dp_j) kappa(c_j - p_j)."""
    base = state.positions
    delta = 1e-4
    extra = np.zeros_like(base)
    lloyd = state.params.kappa * (cents - base)
    for j in range(state.n_robots):
        jac = np.zeros((state.n_robots, 2, 2))  # jac[i, :, axis] = dc_i/dp_j[axis]
        for axis in range(2):
            bumped = base.copy()
            bumped[j, axis] += delta
            c_plus = _centroids_at(state, bumped)
            bumped = base.copy()
            bumped[j, axis] -= delta
            c_minus = _centroids_at(state, bumped)
            jac[:, :, axis] = (c_plus - c_minus) / (2 * delta)
        for i in range(state.n_robots):
            if j in neighbors[i]:
                extra[i] += jac[i] @ lloyd[j]
    return extra


def replace_positions(state: SwarmState, positions: np.ndarray) -> SwarmState:
    return SwarmState(
        positions=positions,
        headings=state.headings.copy(),
        density=state.density,
        params=state.params,
    )


def control_step(state: SwarmState) -> float:
    """Advance the swarm one step in place; returns the locational cost.

    The cost is evaluated on the pre-step poses with the fresh partition,
    so consecutive return values trace the descent.
    """
    assign, neighbors = voronoi_partition(state)
    cents = centroids(state, assign)
    cost = _locational_cost(state, assign)

    p = state.params
    pdot = p.kappa * (cents - state.positions)
    if p.neighbor_coupling:
        pdot = pdot + _coupling_term(state, cents, neighbors)
    cmds = unicycle_commands(state.headings, pdot, p.lam)

    v, om = cmds[:, 0], cmds[:, 1]
    state.positions[:, 0] += v * np.cos(state.headings) * p.dt
    state.positions[:, 1] += v * np.sin(state.headings) * p.dt
    state.headings = np.mod(state.headings + om * p.dt + math.pi, 2 * math.pi) - math.pi
    arena = state.density.arena
    np.clip(state.positions[:, 0], 0.0, arena.width, out=state.positions[:, 0])
    np.clip(state.positions[:, 1], 0.0, arena.height, out=state.positions[:, 1])
    state.commands = cmds
    state.pdot = pdot
    return cost


def settled(state: SwarmState) -> bool:
    """True when every commanded planar speed is below the threshold."""
    if state.pdot is None:
        assign, _ = voronoi_partition(state)
        cents = centroids(state, assign)
        state.pdot = state.params.kappa * (cents - state.positions)
    speeds = np.linalg.norm(state.pdot, axis=1)
    return bool(np.max(speeds) < state.params.settle_speed)


def random_swarm(
    density: DensityField,
    n_robots: int = 10,
    seed=0,
    params: SwarmParams | None = None,
) -> SwarmState:
    """Swarm at seeded uniform poses inside the arena."""
    rng = np.random.default_rng(seed)
    arena = density.arena
    pos = np.column_stack(
        [
            rng.uniform(0.05 * arena.width, 0.95 * arena.width, n_robots),
            rng.uniform(0.05 * arena.height, 0.95 * arena.height, n_robots),
        ]
    )
    headings = rng.uniform(-math.pi, math.pi, n_robots)
    return SwarmState(
        positions=pos,
        headings=headings,
        density=density,
        params=params if params is not None else SwarmParams(),
    )


def broadcast_density(
    field_: DensityField, host: str = "127.0.0.1", port: int = 9750
) -> bytes:
    """Send the GMM parameters as one UDP datagram; returns the payload.

    Packet layout (JSON): {"version": 1, "kind": "gmm_density",
    "arena": {"width", "height"}, "components": [{"mean": [x, y],
    "cov": [[a, b], [c, d]], "weight": w}, ...]}. Off by default; callers
    opt in explicitly.
    """
    payload = json.dumps(
        {
            "version": 1,
            "kind": "gmm_density",
            "arena": {"width": field_.arena.width, "height": field_.arena.height},
            "components": [
                {"mean": list(c.mean), "cov": [list(r) for r in c.cov], "weight": c.weight}
                for c in field_.components
            ],
        }
    ).encode()
    with socket.socket(socket.AF_INET, socket.SOCK_DGRAM) as sock:
        sock.sendto(payload, (host, port))
    return payload


def export_density_csv(field_: DensityField, path) -> None:
    """Write the raster as (x, y, phi) rows."""
    with open(path, "w") as fh:
        fh.write("x,y,phi\n")
        for x, y, v in zip(field_.qx, field_.qy, field_.phi.ravel()):
            fh.write(f"{x!r},{y!r},{v!r}\n")


def export_poses_csv(state: SwarmState, path) -> None:
    """Write robot poses as (robot, x, y, theta, v, omega) rows."""
    with open(path, "w") as fh:
        fh.write("robot,x,y,theta,v,omega\n")
        for i, pose in enumerate(state.poses()):
            fh.write(f"{i},{pose.x!r},{pose.y!r},{pose.theta!r},{pose.v!r},{pose.omega!r}\n")
