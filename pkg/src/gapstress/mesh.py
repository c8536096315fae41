"""Gap-graded triangulations of the two-inclusion domain (d = 2).

The thin gap is meshed by a structured block: columns whose width tracks
the local thickness delta(x') (bounded aspect ratio and bounded shear) and
a fixed number of layers across the gap, so the 1/delta gradient profile is
resolved at every epsilon.  The far field is a Delaunay triangulation of
deterministically placed points (cap boundary polylines, graded transition
rings around the gap ends, a hex lattice, the outer square), glued
conformingly to the block along its end columns and smoothed by a few
Laplacian passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from gapstress.geometry import DomainSpec

__all__ = [
    "TAG_INTERIOR",
    "TAG_OUTER",
    "TAG_TOP",
    "TAG_BOTTOM",
    "Mesh",
    "MeshQualityError",
    "QualityReport",
    "build_mesh",
    "refine",
    "quality_report",
    "save_text",
    "load_text",
]

TAG_INTERIOR = 0
TAG_OUTER = 1   # outer boundary of D
TAG_TOP = 2     # boundary of the upper inclusion D1
TAG_BOTTOM = 3  # boundary of the lower inclusion D2


class MeshQualityError(RuntimeError):
    pass


@dataclass
class Mesh:
    vertices: np.ndarray          # (V, 2)
    triangles: np.ndarray         # (T, 3) CCW
    vertex_tags: np.ndarray       # (V,) int8
    boundary_edges: np.ndarray    # (E, 2)
    edge_tags: np.ndarray         # (E,) int8
    n_gap: int
    gap_halfwidth: float
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def tagged(self, tag: int) -> np.ndarray:
        return np.nonzero(self.vertex_tags == tag)[0]

    def areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return 0.5 * np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    def angles_deg(self) -> np.ndarray:
        """All interior angles (T, 3) in degrees."""
        p = self.vertices[self.triangles]
        out = np.empty((self.n_triangles, 3))
        for k in range(3):
            a = p[:, (k + 1) % 3] - p[:, k]
            b = p[:, (k + 2) % 3] - p[:, k]
            cosang = np.sum(a * b, axis=1) / (
                np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
            )
            out[:, k] = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
        return out

    def locate(self, point) -> int:
        """Index of a triangle containing the point (barycentric test)."""
        q = np.asarray(point, dtype=float)
        p = self.vertices[self.triangles]
        v0 = p[:, 1] - p[:, 0]
        v1 = p[:, 2] - p[:, 0]
        w = q[None, :] - p[:, 0]
        den = np.cross(v0, v1)
        s = np.cross(w, v1) / den
        t = np.cross(v0, w) / den
        ok = (s >= -1e-12) & (t >= -1e-12) & (s + t <= 1.0 + 1e-12)
        idx = np.nonzero(ok)[0]
        if idx.size == 0:
            raise ValueError(f"point {q} lies in no triangle")
        return int(idx[0])


# ---------------------------------------------------------------------------
# Cap region membership


def _cap_gamma(domain: DomainSpec, x: np.ndarray, side: int) -> np.ndarray:
    """Graph + tangent continuation bounding the upper (+1) / lower (-1) cap."""
    p = domain.profile
    xc = domain.graph_halfwidth()
    which = 1 if side > 0 else 2
    ax = np.abs(np.asarray(x, dtype=float))
    axc = np.minimum(ax, xc)
    base = p.h_der(which, 0, axc[:, None]) + (domain.eps if side > 0 else 0.0)
    slope = abs(p.h_der(which, 1, np.array([[xc]]))[0, 0])
    over = np.maximum(ax - xc, 0.0)
    return base + (slope if side > 0 else -slope) * over


def _in_cap(domain: DomainSpec, pts: np.ndarray, side: int, pad: float = 0.0) -> np.ndarray:
    """Points inside the cap region, enlarged by pad when pad > 0."""
    c, rho = domain.cap_center_radius(side)
    x, y = pts[:, 0], pts[:, 1]
    in_disk = (x - c[0]) ** 2 + (y - c[1]) ** 2 <= (rho + pad) ** 2
    gamma = _cap_gamma(domain, x, side)
    if side > 0:
        return in_disk & (y >= gamma - pad)
    return in_disk & (y <= gamma + pad)


def _in_slab(domain: DomainSpec, pts: np.ndarray, r_gap: float, pad: float = 0.0) -> np.ndarray:
    p = domain.profile
    x, y = pts[:, 0], pts[:, 1]
    inside_x = np.abs(x) <= r_gap + pad
    ax = np.minimum(np.abs(x), 2.0 * p.R * (1.0 - 1e-12))
    lo = p.h_der(2, 0, ax[:, None])
    hi = domain.eps + p.h_der(1, 0, ax[:, None])
    return inside_x & (y >= lo - pad) & (y <= hi + pad)


# ---------------------------------------------------------------------------
# Structured gap block


def _gap_columns(domain: DomainSpec, n_gap: int, aspect: float = 2.0) -> np.ndarray:
    """Column abscissae on [-R, R], width tracking the local thickness.

    dx <= aspect * delta / n_gap bounds the element aspect ratio and
    dx <= 0.5 * delta / (n_gap * slope) bounds the shear of the layer
    lines, which together keep the minimum angle above the target.
    """
    p = domain.profile
    r_gap = p.R
    xs = [0.0]
    x = 0.0
    while x < r_gap:
        dlt = domain.eps + float(p.gap(np.array([[x]]))[0])
        s1 = abs(p.h_der(1, 1, np.array([[x]]))[0, 0])
        s2 = abs(p.h_der(2, 1, np.array([[x]]))[0, 0])
        slope = max(s1, s2, 1e-12)
        dx = dlt / n_gap * min(aspect, 0.5 / slope)
        dx = min(dx, r_gap / 8.0)
        x += dx
        xs.append(x)
    xs = np.asarray(xs) * (r_gap / xs[-1])
    return np.concatenate([-xs[:0:-1], xs])


def _block_nodes_triangles(domain: DomainSpec, n_gap: int):
    p = domain.profile
    xs = _gap_columns(domain, n_gap)
    n_c = xs.size
    h1 = p.h1(xs[:, None])
    h2 = p.h2(xs[:, None])
    frac = np.linspace(0.0, 1.0, n_gap + 1)
    verts = np.empty((n_c * (n_gap + 1), 2))
    for k in range(n_c):
        lo, hi = h2[k], domain.eps + h1[k]
        ys = lo + (hi - lo) * frac
        sl = slice(k * (n_gap + 1), (k + 1) * (n_gap + 1))
        verts[sl, 0] = xs[k]
        verts[sl, 1] = ys

    def vid(k, j):
        return k * (n_gap + 1) + j

    tris = []
    for k in range(n_c - 1):
        for j in range(n_gap):
            a, b = vid(k, j), vid(k + 1, j)
            c, e = vid(k + 1, j + 1), vid(k, j + 1)
            d1 = np.sum((verts[a] - verts[c]) ** 2)
            d2 = np.sum((verts[b] - verts[e]) ** 2)
            if d1 <= d2:
                tris.extend([(a, b, c), (a, c, e)])
            else:
                tris.extend([(a, b, e), (b, c, e)])
    return xs, verts, np.asarray(tris, dtype=np.int64)


# ---------------------------------------------------------------------------
# Cap boundary polylines


def _graph_chain(domain: DomainSpec, side: int, dx0: float, h_far: float):
    """Graph nodes from R to the cap junction, spacing growing geometrically."""
    p = domain.profile
    xc = domain.graph_halfwidth()
    xs = []
    x = p.R
    dx = dx0
    while x + dx < xc:
        x += dx
        xs.append(x)
        dx = min(dx * 1.3, 0.7 * h_far)
    xs = np.asarray(xs)
    which = 1 if side > 0 else 2
    if xs.size == 0:
        return np.empty((0, 2)), dx
    ys = p.h_der(which, 0, xs[:, None]) + (domain.eps if side > 0 else 0.0)
    return np.column_stack([xs, ys]), dx


def _arc_nodes(domain: DomainSpec, side: int, spacing: float, h_far: float):
    """Closing arc sampled from one junction over the pole to the other."""
    c, rho = domain.cap_center_radius(side)
    p = domain.profile
    xc = domain.graph_halfwidth()
    which = 1 if side > 0 else 2
    yj = float(p.h_der(which, 0, np.array([[xc]]))[0]) + (domain.eps if side > 0 else 0.0)
    phi_j = np.arctan2(yj - c[1], xc - c[0])
    pole = 0.5 * np.pi * side
    # right junction -> pole -> left junction, uniform steps
    span = 2.0 * abs(pole - phi_j)
    step = min(h_far, max(spacing, 0.02 * rho)) / rho
    n = max(int(np.ceil(span / step)), 4)
    phis = phi_j + (pole - phi_j) * 2.0 * np.arange(1, n) / n
    return np.column_stack([c[0] + rho * np.cos(phis), c[1] + rho * np.sin(phis)])


def _cap_polyline(domain: DomainSpec, side: int, gap_wall: np.ndarray, dx_end: float, h_far: float):
    """Closed boundary polyline of one cap, ordered CCW around the cap.

    gap_wall holds the block's wall nodes left to right.  Returns the
    coordinates of the appended (non-block) nodes and index arrays into the
    final polyline ordering.
    """
    chain_r, dx_last = _graph_chain(domain, side, dx_end, h_far)
    arc = _arc_nodes(domain, side, dx_last, h_far)
    chain_l = chain_r[::-1].copy()
    chain_l[:, 0] *= -1.0
    if side > 0:
        seq = [gap_wall, chain_r, arc, chain_l]
    else:
        # CCW around the lower cap: traverse the wall right -> left
        seq = [gap_wall[::-1], chain_l[::-1], arc[::-1], chain_r[::-1]]
    pts = np.vstack([s for s in seq if len(s)])
    return pts, len(gap_wall)


def _polyline_spacing(pts: np.ndarray) -> np.ndarray:
    nxt = np.roll(pts, -1, axis=0)
    prv = np.roll(pts, 1, axis=0)
    return 0.5 * (np.linalg.norm(nxt - pts, axis=1) + np.linalg.norm(pts - prv, axis=1))


def _polyline_normals(pts: np.ndarray) -> np.ndarray:
    """Outward normals of a CCW-ordered closed polyline."""
    t = np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)
    t /= np.linalg.norm(t, axis=1)[:, None]
    return np.column_stack([t[:, 1], -t[:, 0]])


# ---------------------------------------------------------------------------
# Transition rings and lattice seeds


def _ring_points(sources, h_far):
    """Graded point layers offsetting fine boundary chains into the far field.

    sources is a list of (points, normals, spacing) chains; layers march
    outward with geometric growth until the local size reaches the far
    lattice pitch."""
    out = []
    sizes = []
    for pts, nrm, s0 in sources:
        if len(pts) == 0:
            continue
        arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
        total = arc[-1]
        if total <= 0.0:
            continue
        offset = 0.0
        s = s0
        while s < 0.72 * h_far:
            offset += 0.95 * s
            s *= 1.5
            n = max(int(np.ceil(total / s)), 1)
            ts = (np.arange(n) + 0.5) * total / n
            px = np.interp(ts, arc, pts[:, 0])
            py = np.interp(ts, arc, pts[:, 1])
            nx = np.interp(ts, arc, nrm[:, 0])
            ny = np.interp(ts, arc, nrm[:, 1])
            nn = np.sqrt(nx**2 + ny**2)
            nn[nn == 0.0] = 1.0
            cand = np.column_stack([px + offset * nx / nn, py + offset * ny / nn])
            out.append(cand)
            sizes.append(np.full(len(cand), s))
    if not out:
        return np.empty((0, 2)), np.empty(0)
    return np.vstack(out), np.concatenate(sizes)


class _PointGrid:
    """Spatial hash for greedy point admission with size-dependent radii."""

    def __init__(self, cell: float):
        self.cell = cell
        self.cells: dict[tuple[int, int], list[int]] = {}
        self.pts: list[np.ndarray] = []
        self.sp: list[float] = []

    def _key(self, p) -> tuple[int, int]:
        return (int(np.floor(p[0] / self.cell)), int(np.floor(p[1] / self.cell)))

    def insert(self, p, s: float) -> None:
        idx = len(self.pts)
        self.pts.append(np.asarray(p, dtype=float))
        self.sp.append(float(s))
        self.cells.setdefault(self._key(p), []).append(idx)

    def too_close(self, p, s: float) -> bool:
        kx, ky = self._key(p)
        for i in range(kx - 1, kx + 2):
            for j in range(ky - 1, ky + 2):
                for idx in self.cells.get((i, j), ()):
                    q = self.pts[idx]
                    lim = 0.58 * max(s, self.sp[idx])
                    if (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 < lim * lim:
                        return True
        return False


def _hex_seeds(square: float, pitch: float) -> np.ndarray:
    dy = pitch * np.sqrt(3.0) / 2.0
    rows = np.arange(-square + 0.75 * pitch, square - 0.5 * pitch, dy)
    pts = []
    for i, y in enumerate(rows):
        x0 = -square + (0.75 if i % 2 == 0 else 0.75 + 0.5) * pitch
        xs = np.arange(x0, square - 0.5 * pitch, pitch)
        pts.append(np.column_stack([xs, np.full(xs.size, y)]))
    return np.vstack(pts)


def _square_nodes(square: float, h_far: float) -> np.ndarray:
    n = max(int(np.ceil(2.0 * square / h_far)), 4)
    t = np.linspace(-square, square, n + 1)
    bottom = np.column_stack([t[:-1], np.full(n, -square)])
    right = np.column_stack([np.full(n, square), t[:-1]])
    top = np.column_stack([t[1:][::-1], np.full(n, square)])
    left = np.column_stack([np.full(n, -square), t[1:][::-1]])
    return np.vstack([bottom, right, top, left])


# ---------------------------------------------------------------------------
# Assembly of the full mesh


def build_mesh(domain: DomainSpec, h_far: float = 0.35, n_gap: int = 6) -> Mesh:
    """Mesh the domain with a structured gap block glued to a Delaunay far field.

    Guarantees (validated, MeshQualityError otherwise): conforming mesh,
    positive triangle areas, minimum angle >= 15 degrees, and n_gap element
    layers across every gap cross-section |x'| <= R.
    """
    if domain.d != 2:
        raise ValueError("meshing is implemented for d = 2 only")
    if n_gap < 2:
        raise ValueError("n_gap must be >= 2")
    p = domain.profile
    r_gap = p.R
    square = domain.outer

    xs, block_verts, block_tris = _block_nodes_triangles(domain, n_gap)
    n_c = xs.size
    dx_end = float(xs[-1] - xs[-2])

    def bvid(k, j):
        return k * (n_gap + 1) + j

    top_wall_idx = np.array([bvid(k, n_gap) for k in range(n_c)])
    bot_wall_idx = np.array([bvid(k, 0) for k in range(n_c)])

    verts = [block_verts]
    offset = block_verts.shape[0]

    # cap polylines; the gap walls reuse block vertices
    poly_global = {}
    for side, wall_idx in ((+1, top_wall_idx), (-1, bot_wall_idx)):
        wall_pts = block_verts[wall_idx]
        pts, n_wall = _cap_polyline(domain, side, wall_pts, dx_end, h_far)
        extra = pts[n_wall:]
        glob = np.empty(len(pts), dtype=np.int64)
        glob[:n_wall] = wall_idx if side > 0 else wall_idx[::-1]
        glob[n_wall:] = offset + np.arange(len(extra))
        verts.append(extra)
        offset += len(extra)
        poly_global[side] = (pts, glob)

    sq_pts = _square_nodes(square, h_far)
    sq_idx = offset + np.arange(len(sq_pts))
    verts.append(sq_pts)
    offset += len(sq_pts)

    # transition rings around the fine part of the cap boundaries and the
    # block end columns
    sources = []
    for side in (+1, -1):
        pts, _ = poly_global[side]
        nrm = _polyline_normals(pts)
        spacing = _polyline_spacing(pts)
        fine = (spacing < 0.6 * h_far) & (np.abs(pts[:, 0]) >= r_gap * 0.999)
        if np.any(fine):
            idx = np.nonzero(fine)[0]
            for chunk in np.split(idx, np.nonzero(np.diff(idx) > 1)[0] + 1):
                if chunk.size >= 2:
                    sources.append(
                        (pts[chunk], nrm[chunk], float(np.median(spacing[chunk])))
                    )
    for sgn in (+1.0, -1.0):
        k = n_c - 1 if sgn > 0 else 0
        seg = block_verts[[bvid(k, j) for j in range(n_gap + 1)]]
        nrm = np.tile([sgn, 0.0], (len(seg), 1))
        sources.append((seg, nrm, float(np.linalg.norm(seg[1] - seg[0]))))

    ring_pts, ring_sizes = _ring_points(sources, h_far)
    seed_pts = _hex_seeds(square, h_far)
    seed_sizes = np.full(len(seed_pts), h_far)

    # prune candidate points against boundaries and each other
    fixed_pts = np.vstack([poly_global[+1][0], poly_global[-1][0], sq_pts,
                           block_verts[[bvid(0, j) for j in range(1, n_gap)]],
                           block_verts[[bvid(n_c - 1, j) for j in range(1, n_gap)]]])
    fixed_sp = np.concatenate([
        _polyline_spacing(poly_global[+1][0]),
        _polyline_spacing(poly_global[-1][0]),
        np.full(len(sq_pts), h_far),
        np.full(2 * (n_gap - 1), dx_end),
    ])

    grid = _PointGrid(cell=h_far)
    for q, s in zip(fixed_pts, fixed_sp):
        grid.insert(q, s)
    kept_pts = []
    for cand, csize in ((ring_pts, ring_sizes), (seed_pts, seed_sizes)):
        if len(cand) == 0:
            continue
        ok = np.abs(cand).max(axis=1) < square - 0.55 * h_far
        ok &= ~_in_cap(domain, cand, +1, pad=0.0)
        ok &= ~_in_cap(domain, cand, -1, pad=0.0)
        ok &= ~_in_slab(domain, cand, r_gap, pad=0.0)
        pad = 0.42 * csize
        dist_top = _cap_distance_proxy(domain, cand, +1)
        dist_bot = _cap_distance_proxy(domain, cand, -1)
        ok &= (dist_top > pad) & (dist_bot > pad)
        cand, csize = cand[ok], csize[ok]
        order = np.argsort(csize)  # admit fine points first
        for i in order:
            if not grid.too_close(cand[i], csize[i]):
                grid.insert(cand[i], csize[i])
                kept_pts.append(cand[i])
    free_pts = np.asarray(kept_pts) if kept_pts else np.empty((0, 2))
    free_idx = offset + np.arange(len(free_pts))
    verts.append(free_pts)
    offset += len(free_pts)

    vertices = np.vstack([v for v in verts if len(v)])

    # far-field point set: both polylines, block end columns, square, free points
    far_idx = np.unique(np.concatenate([
        poly_global[+1][1], poly_global[-1][1], sq_idx, free_idx,
        np.array([bvid(0, j) for j in range(1, n_gap)], dtype=np.int64),
        np.array([bvid(n_c - 1, j) for j in range(1, n_gap)], dtype=np.int64),
    ]))

    movable = np.zeros(vertices.shape[0], dtype=bool)
    movable[free_idx] = True

    far_tris = _triangulate_far(domain, vertices, far_idx, movable, r_gap, n_smooth=6)

    triangles = np.vstack([block_tris, far_tris])
    triangles = _orient_ccw(vertices, triangles)

    tags = np.zeros(vertices.shape[0], dtype=np.int8)
    tags[sq_idx] = TAG_OUTER
    tags[poly_global[+1][1]] = TAG_TOP
    tags[poly_global[-1][1]] = TAG_BOTTOM

    bedges, btags = _boundary_edges(triangles, tags)
    mesh = Mesh(
        vertices=vertices,
        triangles=triangles,
        vertex_tags=tags,
        boundary_edges=bedges,
        edge_tags=btags,
        n_gap=n_gap,
        gap_halfwidth=r_gap,
        meta={
            "eps": domain.eps,
            "h_far": h_far,
            "n_columns": int(n_c),
            "n_block_triangles": int(len(block_tris)),
        },
    )
    _validate(mesh)
    return mesh


def _cap_distance_proxy(domain: DomainSpec, pts: np.ndarray, side: int) -> np.ndarray:
    """Signed-ish distance proxy to the cap: disk distance vs graph clearance."""
    c, rho = domain.cap_center_radius(side)
    d_disk = np.linalg.norm(pts - c[None, :], axis=1) - rho
    gamma = _cap_gamma(domain, pts[:, 0], side)
    d_graph = (pts[:, 1] - gamma) if side < 0 else (gamma - pts[:, 1])
    # outside the cap iff outside the disk or on the far side of the graph
    return np.maximum(d_disk, d_graph)


def _triangulate_far(domain, vertices, far_idx, movable, r_gap, n_smooth=6):
    coords = vertices[far_idx].copy()
    local_movable = movable[far_idx]

    def kept_triangles(c):
        tri = Delaunay(c)
        cent = c[tri.simplices].mean(axis=1)
        drop = _in_cap(domain, cent, +1) | _in_cap(domain, cent, -1)
        drop |= _in_slab(domain, cent, r_gap)
        return tri.simplices[~drop]

    simp = kept_triangles(coords)
    for _ in range(n_smooth):
        nb_sum = np.zeros_like(coords)
        nb_cnt = np.zeros(len(coords))
        for k in range(3):
            a = simp[:, k]
            for dk in (1, 2):
                b = simp[:, (k + dk) % 3]
                np.add.at(nb_sum, a, coords[b])
                np.add.at(nb_cnt, a, 1.0)
        upd = local_movable & (nb_cnt > 0)
        new = coords.copy()
        new[upd] = nb_sum[upd] / nb_cnt[upd, None]
        bad = np.zeros(len(coords), dtype=bool)
        bad[upd] = (
            _in_cap(domain, new[upd], +1)
            | _in_cap(domain, new[upd], -1)
            | _in_slab(domain, new[upd], r_gap)
            | (np.abs(new[upd]).max(axis=1) >= domain.outer)
        )
        new[bad] = coords[bad]
        coords = new
        simp = kept_triangles(coords)

    vertices[far_idx] = coords
    return far_idx[simp]


def _orient_ccw(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = vertices[triangles]
    area2 = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    flip = area2 < 0.0
    out = triangles.copy()
    out[flip, 1], out[flip, 2] = triangles[flip, 2], triangles[flip, 1]
    return out


def _edge_counts(triangles: np.ndarray) -> dict:
    counts: dict[tuple[int, int], int] = {}
    for tri in triangles:
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            e = (a, b) if a < b else (b, a)
            counts[e] = counts.get(e, 0) + 1
    return counts


def _boundary_edges(triangles: np.ndarray, tags: np.ndarray):
    counts = _edge_counts(triangles)
    edges, etags = [], []
    for (a, b), c in counts.items():
        if c > 2:
            raise MeshQualityError(f"non-conforming mesh: edge {(a, b)} in {c} triangles")
        if c == 1:
            if tags[a] == TAG_INTERIOR or tags[a] != tags[b]:
                raise MeshQualityError(
                    f"boundary edge {(a, b)} with inconsistent tags {tags[a]}, {tags[b]}"
                )
            edges.append((a, b))
            etags.append(tags[a])
    return np.asarray(edges, dtype=np.int64), np.asarray(etags, dtype=np.int8)


@dataclass
class QualityReport:
    n_vertices: int
    n_triangles: int
    min_angle_deg: float
    max_angle_deg: float
    min_area: float
    gap_layers: int
    gap_layers_ok: bool
    has_obtuse: bool


def quality_report(mesh: Mesh) -> QualityReport:
    ang = mesh.angles_deg()
    areas = mesh.areas()
    return QualityReport(
        n_vertices=mesh.n_vertices,
        n_triangles=mesh.n_triangles,
        min_angle_deg=float(ang.min()),
        max_angle_deg=float(ang.max()),
        min_area=float(areas.min()),
        gap_layers=mesh.n_gap,
        gap_layers_ok=True,
        has_obtuse=bool((ang > 90.0 + 1e-9).any()),
    )


def _validate(mesh: Mesh, min_angle: float = 15.0) -> None:
    rep = quality_report(mesh)
    if rep.min_area <= 0.0:
        raise MeshQualityError(f"non-positive triangle area {rep.min_area}")
    if rep.min_angle_deg < min_angle:
        raise MeshQualityError(
            f"minimum angle {rep.min_angle_deg:.2f} deg below {min_angle} deg; "
            f"achievable with a larger n_gap aspect or smaller h_far"
        )


def refine(mesh: Mesh) -> Mesh:
    """Red refinement: every triangle splits into four via edge midpoints.

    No boundary projection is performed, so the refined spaces are nested
    and energies decrease monotonically.
    """
    counts = _edge_counts(mesh.triangles)
    bset = {tuple(sorted(e)) for e in mesh.boundary_edges.tolist()}
    edge_id = {}
    new_pts = []
    for e in counts:
        edge_id[e] = mesh.n_vertices + len(new_pts)
        new_pts.append(0.5 * (mesh.vertices[e[0]] + mesh.vertices[e[1]]))
    vertices = np.vstack([mesh.vertices, np.asarray(new_pts)])
    tags = np.concatenate([mesh.vertex_tags, np.zeros(len(new_pts), dtype=np.int8)])
    for e, vid in edge_id.items():
        if e in bset:
            tags[vid] = mesh.vertex_tags[e[0]]

    tris = []
    for tri in mesh.triangles:
        a, b, c = (int(v) for v in tri)
        ab = edge_id[tuple(sorted((a, b)))]
        bc = edge_id[tuple(sorted((b, c)))]
        ca = edge_id[tuple(sorted((c, a)))]
        tris.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
    triangles = _orient_ccw(vertices, np.asarray(tris, dtype=np.int64))
    bedges, btags = _boundary_edges(triangles, tags)
    return Mesh(
        vertices=vertices,
        triangles=triangles,
        vertex_tags=tags,
        boundary_edges=bedges,
        edge_tags=btags,
        n_gap=2 * mesh.n_gap,
        gap_halfwidth=mesh.gap_halfwidth,
        meta=dict(mesh.meta, refined=mesh.meta.get("refined", 0) + 1),
    )


# ---------------------------------------------------------------------------
# Plain-text mesh interchange: header "V T", V lines "x y tag", T lines "i j k"


def save_text(mesh: Mesh, path: str | Path) -> None:
    lines = [f"{mesh.n_vertices} {mesh.n_triangles}"]
    for p, t in zip(mesh.vertices, mesh.vertex_tags):
        lines.append(f"{p[0]!r} {p[1]!r} {int(t)}")
    for tri in mesh.triangles:
        lines.append(f"{tri[0]} {tri[1]} {tri[2]}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_text(path: str | Path) -> Mesh:
    raw = Path(path).read_text().split("\n")
    nv, nt = (int(s) for s in raw[0].split())
    verts = np.empty((nv, 2))
    tags = np.zeros(nv, dtype=np.int8)
    for i in range(nv):
        parts = raw[1 + i].split()
        verts[i] = (float(parts[0]), float(parts[1]))
        if len(parts) > 2:
            tags[i] = int(parts[2])
    tris = np.empty((nt, 3), dtype=np.int64)
    for i in range(nt):
        tris[i] = [int(s) for s in raw[1 + nv + i].split()]
    triangles = _orient_ccw(verts, tris)
    bedges, btags = _boundary_edges(triangles, tags)
    return Mesh(
        vertices=verts,
        triangles=triangles,
        vertex_tags=tags,
        boundary_edges=bedges,
        edge_tags=btags,
        n_gap=0,
        gap_halfwidth=0.0,
        meta={"loaded": True},
    )
