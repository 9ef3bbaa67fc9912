"""Single-track racing car on a closed track, with Frenet-frame utilities.

The car state vector is (x, y, yaw, vx, vy, yaw_rate): world position,
heading, body-frame longitudinal/lateral velocity, and yaw rate. Controls
are (steering angle, drive acceleration). Tires are linear in slip angle; a
kinematic-bicycle blend takes over at low speed where slip angles are
ill-conditioned.

Tracks are closed centerline polylines with a constant width. The racing
step cost rewards progress speed along the centerline and penalizes leaving
the track (softplus boundary term), large slip angles, and heading error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CAR_STATE_FIELDS = ("x", "y", "yaw", "vx", "vy", "yaw_rate")


@dataclass(frozen=True)
class TrackSpec:
    """Closed centerline polyline plus width and an arc-length table.

    points has shape (P, 2) with points[0] == points[-1]. arc_lengths[i] is
    the cumulative centerline distance up to points[i]; total_length equals
    its final entry.
    """

    points: np.ndarray
    width: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
            raise ValueError("points must be (P, 2) with P >= 4")
        if not np.allclose(pts[0], pts[-1], atol=1e-9):
            raise ValueError("centerline must be closed (first point == last point)")
        if self.width <= 0.0:
            raise ValueError("width must be positive")
        object.__setattr__(self, "points", pts)

        vecs = np.diff(pts, axis=0)
        lens = np.hypot(vecs[:, 0], vecs[:, 1])
        if np.any(lens <= 0.0):
            raise ValueError("centerline has zero-length segments")
        cum = np.concatenate([[0.0], np.cumsum(lens)])
        # Segment tables used by the projection; derived, not user-supplied.
        object.__setattr__(self, "arc_lengths", cum)
        object.__setattr__(self, "_seg_starts", pts[:-1])
        object.__setattr__(self, "_seg_vecs", vecs)
        object.__setattr__(self, "_seg_lens", lens)
        object.__setattr__(self, "_seg_inv_len2", 1.0 / (lens * lens))
        object.__setattr__(self, "_seg_headings", np.arctan2(vecs[:, 1], vecs[:, 0]))

    @property
    def total_length(self) -> float:
        return float(self.arc_lengths[-1])

    @classmethod
    def from_csv(cls, path, width: float) -> "TrackSpec":
        """Load a centerline from CSV rows of x,y. The loop is closed
        automatically if the last point differs from the first."""
        pts = np.atleast_2d(np.loadtxt(path, delimiter=","))
        if not np.allclose(pts[0], pts[-1], atol=1e-9):
            pts = np.vstack([pts, pts[0]])
        return cls(points=pts, width=width)


def oval_track(total_length: float = 14.2, radius: float = 1.8,
               width: float = 1.0, spacing: float = 0.02) -> TrackSpec:
    """Counterclockwise oval: two straights joined by two semicircles.

    Straight lengths are chosen so the nominal centerline length equals
    total_length. The start point is the beginning of the bottom straight,
    heading +x. The polyline is discretized at roughly `spacing` meters.
    """
    straight = (total_length - 2.0 * math.pi * radius) / 2.0
    if straight <= 0.0:
        raise ValueError("total_length too short for the given radius")

    def straight_pts(p0, p1):
        n = max(1, round(np.hypot(*(np.subtract(p1, p0))) / spacing))
        t = np.arange(n) / n
        return p0 + t[:, None] * (np.subtract(p1, p0))

    def arc_pts(center, start_angle):
        n = max(1, round(math.pi * radius / spacing))
        ang = start_angle + math.pi * np.arange(n) / n
        return center + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)

    half = straight / 2.0
    parts = [
        straight_pts((-half, -radius), (half, -radius)),
        arc_pts(np.array([half, 0.0]), -math.pi / 2.0),
        straight_pts((half, radius), (-half, radius)),
        arc_pts(np.array([-half, 0.0]), math.pi / 2.0),
    ]
    pts = np.vstack(parts)
    pts = np.vstack([pts, pts[0]])
    return TrackSpec(points=pts, width=width)


@dataclass(frozen=True)
class FrenetState:
    """Track-relative coordinates of one or more query points."""

    arc_pos: np.ndarray
    lateral: np.ndarray
    tangent_heading: np.ndarray
    tangential_velocity: np.ndarray


def _project(track: TrackSpec, xy: np.ndarray):
    """Nearest-segment projection. xy is (..., 2). Returns
    (arc_pos, lateral, tangent_heading, distance) without validity checks."""
    q = np.asarray(xy, dtype=float)
    flat = q.reshape(-1, 2)
    d = flat[:, None, :] - track._seg_starts[None, :, :]
    t = np.clip(np.einsum("bpk,pk->bp", d, track._seg_vecs) * track._seg_inv_len2, 0.0, 1.0)
    off = d - t[:, :, None] * track._seg_vecs[None, :, :]
    dist2 = np.einsum("bpk,bpk->bp", off, off)
    idx = np.argmin(dist2, axis=1)
    rows = np.arange(flat.shape[0])

    t_best = t[rows, idx]
    arc = (track.arc_lengths[idx] + t_best * track._seg_lens[idx]) % track.total_length
    heading = track._seg_headings[idx]
    d_best = off[rows, idx]
    # Signed offset: positive to the left of the travel direction.
    tangent = track._seg_vecs[idx] / track._seg_lens[idx, None]
    lateral = tangent[:, 0] * d_best[:, 1] - tangent[:, 1] * d_best[:, 0]
    dist = np.sqrt(dist2[rows, idx])
    shape = q.shape[:-1]
    return (arc.reshape(shape), lateral.reshape(shape),
            heading.reshape(shape), dist.reshape(shape))


def frenet_project(track: TrackSpec, x, y, yaw=0.0, vx=0.0, vy=0.0,
                   max_offset: float = 5.0) -> FrenetState:
    """Project world points onto the centerline.

    Returns arc position (wrapped modulo total_length), signed lateral
    offset (positive left of travel), the centerline tangent heading, and
    the velocity component along the tangent implied by (yaw, vx, vy).
    Raises if any point lies farther than max_offset from the centerline,
    which signals the car left the track region entirely.
    """
    x, y, yaw, vx, vy = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(y, dtype=float),
        np.asarray(yaw, dtype=float), np.asarray(vx, dtype=float),
        np.asarray(vy, dtype=float))
    arc, lateral, heading, dist = _project(track, np.stack([x, y], axis=-1))
    if np.any(dist > max_offset):
        raise ValueError(f"point(s) farther than {max_offset} m from the centerline")
    rel = yaw - heading
    v_tan = vx * np.cos(rel) - vy * np.sin(rel)
    return FrenetState(arc_pos=arc, lateral=lateral, tangent_heading=heading,
                       tangential_velocity=v_tan)


def _wrap_angle(theta):
    return (theta + np.pi) % (2.0 * np.pi) - np.pi


def racing_cost(tangential_velocity, lateral_offset, slip_angle,
                yaw, tangent_heading, track_width: float):
    """Progress-speed reward plus boundary, slip, and heading penalties.

    c = -v_tan
        + 100 * softplus(100 * (|n| - width / 2))
        + 100 * max(slip - 0.3, 0)
        + 2 * wrap(yaw - tangent_heading)^2

    The boundary term uses the unsigned offset so both track edges repel,
    and the softplus is evaluated as logaddexp to stay finite for points
    far outside the track. Pass the slip angle as a magnitude for a
    symmetric slip penalty.
    """
    v_tan = np.asarray(tangential_velocity, dtype=float)
    n = np.abs(np.asarray(lateral_offset, dtype=float))
    slip = np.asarray(slip_angle, dtype=float)
    boundary = 100.0 * np.logaddexp(0.0, 100.0 * (n - 0.5 * track_width))
    slip_pen = 100.0 * np.maximum(slip - 0.3, 0.0)
    heading_pen = 2.0 * _wrap_angle(np.asarray(yaw, dtype=float)
                                    - np.asarray(tangent_heading, dtype=float)) ** 2
    return -v_tan + boundary + slip_pen + heading_pen


@dataclass(frozen=True)
class CarParams:
    """Parameters of a small (1:10 scale) single-track car.

    Cornering stiffnesses are linear-tire coefficients in N/rad. Between
    blend_low and blend_high m/s the stepper fades from a kinematic bicycle
    (well-conditioned at rest) to the dynamic model.
    """

    mass: float = 3.74
    lf: float = 0.15875
    lr: float = 0.17145
    inertia_z: float = 0.04712
    cornering_front: float = 90.0
    cornering_rear: float = 96.0
    steer_limit: float = 0.4
    accel_min: float = -3.0
    accel_max: float = 3.0
    v_max: float = 5.0
    blend_low: float = 0.5
    blend_high: float = 1.0
    dt: float = 0.05

    def __post_init__(self):
        for name in ("mass", "lf", "lr", "inertia_z", "cornering_front",
                     "cornering_rear", "steer_limit", "v_max", "dt"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.accel_min >= self.accel_max:
            raise ValueError("accel_min must be below accel_max")
        if not 0.0 <= self.blend_low < self.blend_high:
            raise ValueError("need 0 <= blend_low < blend_high")

    @property
    def wheelbase(self) -> float:
        return self.lf + self.lr


def single_track_step(params: CarParams, state: np.ndarray, u: np.ndarray) -> np.ndarray:
    """One Euler step of the blended kinematic/dynamic bicycle model.

    state is (..., 6) ordered as CAR_STATE_FIELDS, u is (..., 2) =
    (steering angle, drive acceleration). vx is clamped to [0, v_max].
    """
    state = np.asarray(state, dtype=float)
    u = np.asarray(u, dtype=float)
    x, y, yaw = state[..., 0], state[..., 1], state[..., 2]
    vx, vy, omega = state[..., 3], state[..., 4], state[..., 5]
    steer = np.clip(u[..., 0], -params.steer_limit, params.steer_limit)
    accel = np.clip(u[..., 1], params.accel_min, params.accel_max)
    dt, wb = params.dt, params.wheelbase

    # Kinematic bicycle: slip states follow algebraically from the steering.
    vx_kin = np.clip(vx + dt * accel, 0.0, params.v_max)
    omega_kin = vx_kin * np.tan(steer) / wb
    vy_kin = omega_kin * params.lr

    # Dynamic bicycle with linear tire forces.
    with np.errstate(all="ignore"):
        alpha_f = np.arctan2(vy + params.lf * omega, vx) - steer
        alpha_r = np.arctan2(vy - params.lr * omega, vx)
        force_f = -params.cornering_front * alpha_f
        force_r = -params.cornering_rear * alpha_r
        vx_dyn = np.clip(vx + dt * (accel + vy * omega - force_f * np.sin(steer) / params.mass),
                         0.0, params.v_max)
        vy_dyn = vy + dt * ((force_f * np.cos(steer) + force_r) / params.mass - vx * omega)
        omega_dyn = omega + dt * (params.lf * force_f * np.cos(steer)
                                  - params.lr * force_r) / params.inertia_z

    w = np.clip((vx - params.blend_low) / (params.blend_high - params.blend_low), 0.0, 1.0)
    vx_n = (1.0 - w) * vx_kin + w * vx_dyn
    vy_n = (1.0 - w) * vy_kin + w * vy_dyn
    omega_n = (1.0 - w) * omega_kin + w * omega_dyn

    yaw_n = yaw + dt * omega_n
    x_n = x + dt * (vx_n * np.cos(yaw) - vy_n * np.sin(yaw))
    y_n = y + dt * (vx_n * np.sin(yaw) + vy_n * np.cos(yaw))
    return np.stack([x_n, y_n, yaw_n, vx_n, vy_n, omega_n], axis=-1)


def track_progress(track: TrackSpec, positions: np.ndarray) -> float:
    """Unwrapped centerline progress of a position trace (T, 2): the sum of
    per-step arc-length increments, each wrapped into (-L/2, L/2]."""
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 2 or positions.shape[1] != 2:
        raise ValueError("positions must be (T, 2)")
    if positions.shape[0] < 2:
        return 0.0
    arc, _, _, _ = _project(track, positions)
    steps = np.diff(arc)
    half = track.total_length / 2.0
    steps = (steps + half) % track.total_length - half
    return float(steps.sum())
