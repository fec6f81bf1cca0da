"""Independent brute-force oracles used to validate the analytic geometry.

These deliberately avoid the closed-form machinery in supdrive.geometry:
the centerline is traced with a midpoint-rule integrator and all distance
queries are dense-sampling searches, so agreement between the two is
evidence, not tautology.
"""

from __future__ import annotations

import math

import numpy as np

from supdrive.geometry import RoadSpec


def integrate_centerline(road: RoadSpec, step: float = 0.01):
    """Centerline samples (points (N,2), headings (N,), arc positions (N,))."""
    xs, ys, hs, ss = [road.start_pose[0]], [road.start_pose[1]], [road.start_pose[2]], [0.0]
    x, y, h = road.start_pose
    s_total = 0.0
    for kappa, length in road.segments:
        n = int(math.ceil(length / step))
        ds = length / n
        for _ in range(n):
            hm = h + 0.5 * kappa * ds
            x += ds * math.cos(hm)
            y += ds * math.sin(hm)
            h += kappa * ds
            s_total += ds
            xs.append(x)
            ys.append(y)
            hs.append(h)
            ss.append(s_total)
    return np.stack([xs, ys], axis=1), np.array(hs), np.array(ss)


def nearest_centerline_bruteforce(points: np.ndarray, cl_pts: np.ndarray,
                                  cl_hs: np.ndarray):
    """Distance and signed offset of each point to the sampled centerline."""
    dists = np.empty(len(points))
    offsets = np.empty(len(points))
    for i, p in enumerate(np.atleast_2d(points)):
        d2 = np.sum((cl_pts - p[None, :]) ** 2, axis=1)
        j = int(np.argmin(d2))
        d = math.sqrt(d2[j])
        nx, ny = -math.sin(cl_hs[j]), math.cos(cl_hs[j])
        side = (p[0] - cl_pts[j, 0]) * nx + (p[1] - cl_pts[j, 1]) * ny
        dists[i] = d
        offsets[i] = d if side >= 0 else -d
    return dists, offsets


def point_at(road: RoadSpec, s: float, offset: float, step: float = 0.005):
    """Point at arc position s displaced by offset along the left normal."""
    cl_pts, cl_hs, cl_ss = integrate_centerline(road, step)
    j = int(np.argmin(np.abs(cl_ss - s)))
    h = cl_hs[j]
    return (cl_pts[j, 0] - offset * math.sin(h),
            cl_pts[j, 1] + offset * math.cos(h)), h


def ray_march_boundary(road: RoadSpec, origin, direction, max_range: float,
                       step: float = 0.001) -> float:
    """Signed distance to the first on/off-lane status change along a ray.

    Uses dense sampling of the exact point-to-centerline distance (validated
    separately against the integrator oracle). Positive when starting
    on-lane, negative when starting off-lane; magnitude clipped at max_range.
    """
    from supdrive.geometry import boundary_clearance

    n = int(math.ceil(max_range / step))
    ts = np.linspace(0.0, max_range, n + 1)
    pts = np.asarray(origin, dtype=float)[None, :] + ts[:, None] * np.asarray(direction)[None, :]
    inside = boundary_clearance(road, pts) >= 0.0
    changed = inside != inside[0]
    sign = 1.0 if inside[0] else -1.0
    if not changed.any():
        return sign * max_range
    k = int(np.argmax(changed))
    return sign * 0.5 * (ts[k - 1] + ts[k])


def path_crosses_offlane(road: RoadSpec, p0, p1, step: float = 0.001) -> bool:
    """1 mm dense-sampling crossing oracle for the swept segment p0 -> p1."""
    from supdrive.geometry import boundary_clearance

    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    length = float(np.linalg.norm(p1 - p0))
    n = max(1, int(math.ceil(length / step)))
    ts = np.linspace(0.0, 1.0, n + 1)
    pts = p0[None, :] + ts[:, None] * (p1 - p0)[None, :]
    return bool(np.any(boundary_clearance(road, pts) < 0.0))


def optimal_type1_time(rows: int, cols: int, emma) -> float:
    """Exact minimum completion time for an encode-all search task.

    Dynamic program over (VSTM bit-set, current fixation), starting from the
    display center. Independent of the environment's step logic beyond the
    shared duration formula.
    """
    from functools import lru_cache

    from supdrive.search_env import element_layout, emma_duration

    pos = element_layout(rows, cols, emma.element_spacing_deg)
    n = rows * cols
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def best(mask: int, fix: int) -> float:
        if mask == full:
            return 0.0
        here = (0.0, 0.0) if fix < 0 else tuple(pos[fix])
        return min(
            emma_duration(here, pos[j], emma) + best(mask | (1 << j), j)
            for j in range(n) if not mask & (1 << j))

    return best(0, -1)
