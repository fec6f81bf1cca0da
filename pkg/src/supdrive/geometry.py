"""Road geometry built from constant-curvature arc segments.

The centerline is a C1 chain of arcs and straights (each segment starts at
the previous segment's end point with the previous end heading, so tangent
continuity holds by construction). The lane is the set of points within
lane_half_width of the centerline curve; its boundary therefore consists of
the per-segment offset curves plus two circular end caps. Every query below
reduces to closed-form point/arc or ray/arc computations vectorized over
segments, which keeps the simulation hot path fast on a single core.

Conventions: units are meters and radians, positive lateral offset is to the
left of the centerline when facing along increasing arc position, and probe
directions are given relative to the vehicle heading.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

ROAD_SCHEMA_VERSION = "road/1"

# Curvatures below this are treated as straight lines.
_STRAIGHT_EPS = 1e-12
# Rays ignore boundary hits closer than this to the origin.
_T_EPS = 1e-9

# Probe directions relative to heading: ahead, left/right 0.4 rad,
# left/right 1.57 rad.
PROBE_ANGLES = (0.0, 0.4, -0.4, 1.57, -1.57)


class RoadFormatError(ValueError):
    """Raised for malformed or version-incompatible road files."""


@dataclass
class RoadGeneratorConfig:
    n_segments_min: int = 10
    n_segments_max: int = 18
    curvature_max: float = 0.003     # 1/m, must stay <= 0.05
    segment_len_min: float = 150.0   # m
    segment_len_max: float = 400.0   # m
    min_total_length: float = 4000.0  # m
    lead_in_length: float = 200.0    # m, straight first segment
    lane_half_width: float = 1.75    # m
    end_region_radius: float = 10.0  # m
    raster_resolution: float = 0.25  # m, off-road detector grid pitch


@dataclass
class RoadSpec:
    """Immutable description of one road; derived arrays are cached lazily."""

    segments: list[tuple[float, float]]      # (curvature 1/m, length m)
    lane_half_width: float                   # m
    start_pose: tuple[float, float, float]   # x m, y m, heading rad
    end_region: tuple[float, float, float]   # center x m, center y m, radius m
    speed_limit_kmh: float
    seed: int
    raster_resolution: float = 0.25          # m

    def total_length(self) -> float:
        return float(sum(length for _, length in self.segments))


@dataclass
class LaneQuery:
    lateral_offset: float   # m, signed, positive left; |offset| = distance to centerline
    arc_position: float     # m along the centerline of the nearest point
    on_lane: bool


@dataclass
class ProbeSet:
    """Boundary distances along rays from a pose, clipped at max_range.

    Off-lane poses yield all-negative values whose magnitude is the distance
    back to the lane in that direction (max_range when never reached).
    """

    d_ahead: float
    d_left_04: float
    d_right_04: float
    d_left_157: float
    d_right_157: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.d_ahead, self.d_left_04, self.d_right_04,
             self.d_left_157, self.d_right_157])


class _RoadArrays:
    """Per-segment arrays precomputed once per RoadSpec."""

    def __init__(self, road: RoadSpec):
        n = len(road.segments)
        if n == 0:
            raise RoadFormatError("road needs at least one segment")
        kappa = np.array([k for k, _ in road.segments], dtype=float)
        length = np.array([l for _, l in road.segments], dtype=float)
        if np.any(length <= 0):
            raise RoadFormatError("segment lengths must be positive")
        start = np.empty((n, 2))
        phi = np.empty(n)
        x, y, h = road.start_pose
        for i in range(n):
            start[i] = (x, y)
            phi[i] = h
            k, l = kappa[i], length[i]
            if abs(k) < _STRAIGHT_EPS:
                x += l * math.cos(h)
                y += l * math.sin(h)
            else:
                cx = x - math.sin(h) / k
                cy = y + math.cos(h) / k
                h2 = h + k * l
                x = cx + math.sin(h2) / k
                y = cy - math.cos(h2) / k
                h = h2
        self.kappa = kappa
        self.length = length
        self.start = start
        self.phi = phi
        self.s0 = np.concatenate([[0.0], np.cumsum(length)[:-1]])
        self.is_arc = np.abs(kappa) >= _STRAIGHT_EPS
        self.tangent0 = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        # Arc centers/radii; straights get placeholders masked by is_arc.
        safe_k = np.where(self.is_arc, kappa, 1.0)
        self.center = start + np.stack(
            [-np.sin(phi) / safe_k, np.cos(phi) / safe_k], axis=1)
        self.radius = 1.0 / np.abs(safe_k)
        self.sweep = np.abs(kappa) * length
        self.sgn = np.where(kappa >= 0, 1.0, -1.0)
        rel0 = start - self.center
        self.psi0 = np.arctan2(rel0[:, 1], rel0[:, 0])
        phi_end = phi + kappa * length
        self.end = np.empty((n, 2))
        self.end[:-1] = start[1:]
        self.end[-1] = (x, y)
        self.phi_end = phi_end
        self.road_start = start[0].copy()
        self.road_end = np.array([x, y])
        self.t_start = self.tangent0[0].copy()
        self.t_end = np.array([math.cos(h), math.sin(h)])
        self.total_length = float(np.sum(length))


def _arrays(road: RoadSpec) -> _RoadArrays:
    arr = road.__dict__.get("_arrays")
    if arr is None:
        arr = _RoadArrays(road)
        road.__dict__["_arrays"] = arr
    return arr


def _nearest(road: RoadSpec, points: np.ndarray):
    """Nearest-centerline data for points (N, 2).

    Returns (dist, offset, arc_pos, tangent_heading), each (N,). offset is
    signed (positive left), |offset| == dist.
    """
    g = _arrays(road)
    p = np.atleast_2d(points)[:, None, :]           # (N, 1, 2)
    rel = p - g.start[None, :, :]                   # (N, S, 2)

    # Straight candidates.
    t = np.einsum("nsk,sk->ns", rel, g.tangent0)
    t = np.clip(t, 0.0, g.length[None, :])
    cand_str = g.start[None, :, :] + t[..., None] * g.tangent0[None, :, :]

    # Arc candidates.
    v = p - g.center[None, :, :]
    vnorm = np.linalg.norm(v, axis=2)
    psi = np.arctan2(v[..., 1], v[..., 0])
    u = np.mod(g.sgn[None, :] * (psi - g.psi0[None, :]), 2.0 * math.pi)
    in_span = u <= g.sweep[None, :]
    safe_vnorm = np.where(vnorm < 1e-12, 1.0, vnorm)
    on_circle = g.center[None, :, :] + g.radius[None, :, None] * v / safe_vnorm[..., None]
    d_start = np.linalg.norm(p - g.start[None, :, :], axis=2)
    d_end = np.linalg.norm(p - g.end[None, :, :], axis=2)
    end_closer = d_end < d_start
    endpoint = np.where(end_closer[..., None], g.end[None, :, :], g.start[None, :, :])
    cand_arc = np.where(in_span[..., None], on_circle, endpoint)
    s_arc = np.where(in_span, u / np.maximum(np.abs(g.kappa)[None, :], _STRAIGHT_EPS),
                     np.where(end_closer, g.length[None, :], 0.0))

    is_arc = g.is_arc[None, :, None]
    cand = np.where(is_arc, cand_arc, cand_str)
    s_local = np.where(g.is_arc[None, :], s_arc, t)

    d = np.linalg.norm(p - cand, axis=2)            # (N, S)
    j = np.argmin(d, axis=1)
    rows = np.arange(d.shape[0])
    dist = d[rows, j]
    sj = s_local[rows, j]
    phi_c = g.phi[j] + g.kappa[j] * sj
    normal = np.stack([-np.sin(phi_c), np.cos(phi_c)], axis=1)
    side = np.einsum("nk,nk->n", np.atleast_2d(points) - cand[rows, j], normal)
    offset = np.where(side >= 0, dist, -dist)
    arc_pos = g.s0[j] + sj
    return dist, offset, arc_pos, phi_c


def lane_query(road: RoadSpec, point) -> LaneQuery:
    """Signed lateral offset, arc position and on-lane flag for one point."""
    dist, offset, arc_pos, _ = _nearest(road, np.asarray(point, dtype=float))
    return LaneQuery(
        lateral_offset=float(offset[0]),
        arc_position=float(arc_pos[0]),
        on_lane=bool(dist[0] <= road.lane_half_width),
    )


def centerline_heading(road: RoadSpec, point) -> float:
    """Tangent heading of the centerline at the nearest point."""
    _, _, _, phi_c = _nearest(road, np.asarray(point, dtype=float))
    return float(phi_c[0])


def _min_dist(road: RoadSpec, points: np.ndarray) -> np.ndarray:
    """Distance to the centerline for points (N, 2); lean variant of _nearest."""
    g = _arrays(road)
    p = np.atleast_2d(points)[:, None, :]
    rel = p - g.start[None, :, :]
    t = np.clip(np.einsum("nsk,sk->ns", rel, g.tangent0), 0.0, g.length[None, :])
    cand_str = g.start[None, :, :] + t[..., None] * g.tangent0[None, :, :]
    d_str = np.linalg.norm(p - cand_str, axis=2)

    v = p - g.center[None, :, :]
    vnorm = np.linalg.norm(v, axis=2)
    psi = np.arctan2(v[..., 1], v[..., 0])
    u = np.mod(g.sgn[None, :] * (psi - g.psi0[None, :]), 2.0 * math.pi)
    d_circle = np.abs(vnorm - g.radius[None, :])
    d_start = np.linalg.norm(p - g.start[None, :, :], axis=2)
    d_end = np.linalg.norm(p - g.end[None, :, :], axis=2)
    d_arc = np.where(u <= g.sweep[None, :], d_circle, np.minimum(d_start, d_end))

    d = np.where(g.is_arc[None, :], d_arc, d_str)
    return d.min(axis=1)


def boundary_clearance(road: RoadSpec, points: np.ndarray) -> np.ndarray:
    """Signed clearance g = half_width - dist(point, centerline), (N,).

    Positive inside the lane, negative outside; 1-Lipschitz in the point.
    """
    return road.lane_half_width - _min_dist(road, points)


def _inside(road: RoadSpec, points: np.ndarray) -> np.ndarray:
    return _min_dist(road, points) <= road.lane_half_width


def _boundary_hit_ts(road: RoadSpec, origins: np.ndarray, dirs: np.ndarray,
                     tmax: float) -> np.ndarray:
    """Candidate ray parameters of all lane-boundary element crossings.

    Returns (N, K) with NaN for invalid candidates. Candidates are a superset
    of true region-boundary crossings; callers resolve them with inside()
    tests at interval midpoints.
    """
    g = _arrays(road)
    w = road.lane_half_width
    o = origins[:, None, :]                         # (N, 1, 2)
    d = dirs[:, None, :]
    out = []

    # Straight-segment offset lines at +/- w.
    n0 = np.stack([-g.tangent0[:, 1], g.tangent0[:, 0]], axis=1)
    for sidew in (w, -w):
        base = g.start + sidew * n0                 # (S, 2)
        rel = base[None, :, :] - o                  # (N, S, 2)
        denom = d[..., 0] * g.tangent0[None, :, 1] - d[..., 1] * g.tangent0[None, :, 0]
        denom = np.where(np.abs(denom) < 1e-14, np.nan, denom)
        t = (rel[..., 0] * g.tangent0[None, :, 1] - rel[..., 1] * g.tangent0[None, :, 0]) / denom
        u = (rel[..., 0] * d[..., 1] - rel[..., 1] * d[..., 0]) / denom
        ok = ~g.is_arc[None, :] & (t > _T_EPS) & (t <= tmax) \
            & (u >= 0.0) & (u <= g.length[None, :])
        out.append(np.where(ok, t, np.nan))

    # Arc-segment offset circles. Left boundary radius |1/k - w|, right |1/k + w|.
    safe_k = np.where(g.is_arc, g.kappa, 1.0)
    for sidew in (w, -w):
        r = np.abs(1.0 / safe_k - sidew)            # (S,)
        valid_piece = g.is_arc & (r > 1e-9)
        oc = o - g.center[None, :, :]               # (N, S, 2)
        b = np.einsum("nsk,nsk->ns", oc, np.broadcast_to(d, oc.shape))
        c = np.einsum("nsk,nsk->ns", oc, oc) - r[None, :] ** 2
        disc = b * b - c
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        for sign in (-1.0, 1.0):
            t = -b + sign * sq
            hit = o + t[..., None] * d
            hv = hit - g.center[None, :, :]
            psi = np.arctan2(hv[..., 1], hv[..., 0])
            uang = np.mod(g.sgn[None, :] * (psi - g.psi0[None, :]), 2.0 * math.pi)
            ok = valid_piece[None, :] & (t > _T_EPS) & (t <= tmax) \
                & (uang <= g.sweep[None, :])
            out.append(np.where(ok, t, np.nan))

    # End caps: circles of radius w about the road endpoints, restricted to
    # the half plane beyond the road.
    for cap_pt, cap_tan, before in ((g.road_start, g.t_start, True),
                                    (g.road_end, g.t_end, False)):
        oc = origins - cap_pt[None, :]              # (N, 2)
        b = np.einsum("nk,nk->n", oc, dirs)
        c = np.einsum("nk,nk->n", oc, oc) - w * w
        disc = b * b - c
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        for sign in (-1.0, 1.0):
            t = -b + sign * sq
            hit = origins + t[:, None] * dirs
            along = np.einsum("nk,k->n", hit - cap_pt[None, :], cap_tan)
            ok = (t > _T_EPS) & (t <= tmax) \
                & ((along <= 0.0) if before else (along >= 0.0))
            out.append(np.where(ok, t, np.nan)[:, None])

    return np.concatenate([np.atleast_2d(a.reshape(origins.shape[0], -1)) for a in out], axis=1)


def _first_crossings(road: RoadSpec, origins: np.ndarray, dirs: np.ndarray,
                     tmax: float):
    """First inside/outside status change along each ray.

    Returns (t_cross (N,), initial_inside (N,)); t_cross is NaN when the
    status never changes within tmax.
    """
    n = origins.shape[0]
    ts = _boundary_hit_ts(road, origins, dirs, tmax)
    ts = np.sort(ts, axis=1)                        # NaNs sort to the end
    kmax = int(np.max(np.sum(~np.isnan(ts), axis=1), initial=0))
    ts = ts[:, :kmax]
    edges = np.concatenate([np.zeros((n, 1)), ts, np.full((n, 1), tmax)], axis=1)
    edges = np.where(np.isnan(edges), tmax, edges)
    mids = 0.5 * (edges[:, :-1] + edges[:, 1:])     # (N, K+1)
    flat = (origins[:, None, :] + mids[..., None] * dirs[:, None, :]).reshape(-1, 2)
    inside_mid = _inside(road, flat).reshape(n, -1)
    init = _inside(road, origins)
    changed = inside_mid != init[:, None]
    first = np.argmax(changed, axis=1)
    any_change = changed.any(axis=1)
    t_cross = np.where(any_change, edges[np.arange(n), first], np.nan)
    return t_cross, init


def probe_distances(road: RoadSpec, pose, max_range: float = 50.0) -> ProbeSet:
    """Boundary distances along the five probe rays from (x, y, heading).

    On-lane poses give positive distances to the first boundary crossing;
    off-lane poses give negative values whose magnitude is the distance back
    to the lane. Both are clipped at max_range.
    """
    x, y, heading = pose
    angles = heading + np.array(PROBE_ANGLES)
    origins = np.tile(np.array([[x, y]], dtype=float), (len(PROBE_ANGLES), 1))
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    t_cross, init = _first_crossings(road, origins, dirs, max_range)
    dist = np.where(np.isnan(t_cross), max_range, t_cross)
    vals = np.where(init, dist, -dist)
    return ProbeSet(*[float(v) for v in vals])


def _traversed_cells(p0: np.ndarray, p1: np.ndarray, res: float) -> np.ndarray:
    """Grid cells visited by the segment p0 -> p1 (cell indices, (M, 2))."""
    x0, y0 = float(p0[0]), float(p0[1])
    x1, y1 = float(p1[0]), float(p1[1])
    ix, iy = math.floor(x0 / res), math.floor(y0 / res)
    jx, jy = math.floor(x1 / res), math.floor(y1 / res)
    cells = [(ix, iy)]
    dx, dy = x1 - x0, y1 - y0
    sx = 1 if dx > 0 else (-1 if dx < 0 else 0)
    sy = 1 if dy > 0 else (-1 if dy < 0 else 0)
    tmx = ((ix + (sx > 0)) * res - x0) / dx if sx else math.inf
    tmy = ((iy + (sy > 0)) * res - y0) / dy if sy else math.inf
    tdx = res / abs(dx) if sx else math.inf
    tdy = res / abs(dy) if sy else math.inf
    guard = abs(jx - ix) + abs(jy - iy) + 4
    while (ix != jx or iy != jy) and guard > 0:
        if tmx <= tmy:
            ix += sx
            tmx += tdx
        else:
            iy += sy
            tmy += tdy
        cells.append((ix, iy))
        guard -= 1
    return np.array(cells, dtype=float)


def detect_offroad_transition(road: RoadSpec, prev, new):
    """Detect whether the swept path prev -> new touches off-lane ground.

    Walks the raster cells traversed by the segment and classifies them by
    the signed clearance at their centers. Cells whose coarse clearance
    magnitude is at least the raster resolution are decided outright (the
    threshold exceeds the cell half-diagonal, so the sign cannot flip inside
    the cell); ambiguous cells trigger an exact continuous-path refinement.

    Returns (crossed, refined_distance): crossed is True when any point of
    the path lies off-lane; refined_distance is the signed minimum clearance
    along the path (coarse cell-center value when no refinement was needed,
    sampled to <= 0.5 mm accuracy otherwise). Symmetric in path direction.
    """
    p0 = np.asarray(prev, dtype=float)
    p1 = np.asarray(new, dtype=float)
    res = road.raster_resolution
    cells = _traversed_cells(p0, p1, res)
    centers = (cells + 0.5) * res
    g = boundary_clearance(road, centers)
    if np.all(g >= res):
        return False, float(np.min(g))
    if np.all(np.abs(g) >= res):
        # Some cell is entirely off-lane: the path point inside it is off-lane.
        return True, float(np.min(g))

    # Refinement: exact crossing classification on the continuous path.
    seg = p1 - p0
    length = float(np.linalg.norm(seg))
    if length < 1e-12:
        g0 = float(boundary_clearance(road, p0[None, :])[0])
        return g0 < 0.0, g0
    d = (seg / length)[None, :]
    ts = _boundary_hit_ts(road, p0[None, :], d, length)[0]
    ts = np.sort(ts)
    ts = ts[~np.isnan(ts)]
    edges = np.concatenate([[0.0], ts, [length]])
    mids = 0.5 * (edges[:-1] + edges[1:])
    check_ts = np.concatenate([[0.0, length], mids])
    pts = p0[None, :] + check_ts[:, None] * seg[None, :] / length
    inside = _inside(road, pts)
    crossed = bool(np.any(~inside))

    n_samp = max(2, int(math.ceil(length / 1e-3)) + 1)
    samp_t = np.linspace(0.0, length, n_samp)
    samp = p0[None, :] + samp_t[:, None] * seg[None, :] / length
    refined = float(np.min(boundary_clearance(road, samp)))
    return crossed, refined


def in_end_region(road: RoadSpec, point) -> bool:
    cx, cy, r = road.end_region
    p = np.asarray(point, dtype=float)
    return bool((p[0] - cx) ** 2 + (p[1] - cy) ** 2 <= r * r)


def generate_road(cfg: RoadGeneratorConfig, seed: int,
                  speed_limit_kmh: float = 60.0) -> RoadSpec:
    """Sample a road: a straight lead-in followed by random gentle arcs.

    Deterministic in (cfg, seed): the same inputs produce an identical
    RoadSpec, byte for byte after serialization.
    """
    if abs(cfg.curvature_max) > 0.05:
        raise ValueError("curvature_max must stay within 0.05 1/m")
    rng = np.random.default_rng(seed)
    segments: list[tuple[float, float]] = [(0.0, float(cfg.lead_in_length))]
    total = cfg.lead_in_length
    n_target = int(rng.integers(cfg.n_segments_min, cfg.n_segments_max + 1))
    while len(segments) < n_target or total < cfg.min_total_length:
        kappa = float(rng.uniform(-cfg.curvature_max, cfg.curvature_max))
        length = float(rng.uniform(cfg.segment_len_min, cfg.segment_len_max))
        segments.append((kappa, length))
        total += length
    road = RoadSpec(
        segments=segments,
        lane_half_width=float(cfg.lane_half_width),
        start_pose=(0.0, 0.0, 0.0),
        end_region=(0.0, 0.0, float(cfg.end_region_radius)),
        speed_limit_kmh=float(speed_limit_kmh),
        seed=int(seed),
        raster_resolution=float(cfg.raster_resolution),
    )
    end = _arrays(road).road_end
    road.end_region = (float(end[0]), float(end[1]), float(cfg.end_region_radius))
    road.__dict__.pop("_arrays", None)
    return road


def road_to_json(road: RoadSpec) -> str:
    payload = {
        "schema_version": ROAD_SCHEMA_VERSION,
        "segments": [[float(k), float(l)] for k, l in road.segments],
        "lane_half_width": float(road.lane_half_width),
        "start_pose": [float(v) for v in road.start_pose],
        "end_region": [float(v) for v in road.end_region],
        "speed_limit_kmh": float(road.speed_limit_kmh),
        "seed": int(road.seed),
        "raster_resolution": float(road.raster_resolution),
    }
    return json.dumps(payload, indent=2)


def road_from_json(text: str) -> RoadSpec:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RoadFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise RoadFormatError("road file must hold a JSON object")
    version = payload.get("schema_version")
    if version != ROAD_SCHEMA_VERSION:
        raise RoadFormatError(
            f"unsupported road schema {version!r}, expected {ROAD_SCHEMA_VERSION!r}")
    try:
        return RoadSpec(
            segments=[(float(k), float(l)) for k, l in payload["segments"]],
            lane_half_width=float(payload["lane_half_width"]),
            start_pose=tuple(float(v) for v in payload["start_pose"]),
            end_region=tuple(float(v) for v in payload["end_region"]),
            speed_limit_kmh=float(payload["speed_limit_kmh"]),
            seed=int(payload["seed"]),
            raster_resolution=float(payload["raster_resolution"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RoadFormatError(f"malformed road file: {exc}") from exc
