"""Locate the goban grid in a single edge map with no prior information.

The strategy: strong Hough lines form two pencils (families of concurrent
lines, one per grid direction). Each pencil's vanishing point comes straight
from the Hough-space geometry; a ground line parallel to the horizon turns
the perspective fan back into an equispaced ruler, which lets missing lines
be synthesized and intruders pruned. Coupling the two sorted families row-k
and column-k recovers a grid diagonal that anchors the second family, and a
final check against image evidence catches the wooden board edge masquerading
as an outermost grid line.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import cv2
import numpy as np

from .config import PipelineConfig
from .errors import (
    DegenerateHorizon,
    EmptyEdgeMap,
    GridNotFound,
    InsufficientPencils,
    NoDiagonal,
    NoEquispacedSubset,
)
from .geometry import (
    apply_homography,
    hpoint,
    homography_from_points,
    is_ideal,
    join,
    line_direction,
    meet,
    normalize_line,
    parallel_line_through,
    refine_line_on_edges,
)
from .preprocess import EdgeMap, RawFrame, cap_resolution, edge_map_dog, normalize_gamma

GRID_SIZES = (19, 13, 9)


@dataclass(frozen=True)
class HoughLine:
    """A detected line x cos(theta) + y sin(theta) = rho; rank 0 is strongest."""

    rho: float
    theta: float  # radians in [0, pi)
    rank: int = 0

    def as_line(self) -> np.ndarray:
        return np.array([np.cos(self.theta), np.sin(self.theta), -self.rho])


@dataclass(frozen=True)
class Pencil:
    """Lines through a common (possibly ideal) point."""

    lines: tuple[HoughLine, ...]
    tangent_slopes: tuple[float, ...]  # d(rho)/d(theta) of the Hough-space curve per member
    vanishing_point: np.ndarray  # homogeneous (3,)

    def __len__(self) -> int:
        return len(self.lines)

    def mean_direction(self) -> np.ndarray:
        # doubled-angle average: directions are orientation-free
        ang = np.array([l.theta for l in self.lines])
        c, s = np.cos(2 * ang).mean(), np.sin(2 * ang).mean()
        theta = 0.5 * np.arctan2(s, c)
        return np.array([-np.sin(theta), np.cos(theta)])


@dataclass(frozen=True)
class Grid:
    """The located N x N lattice and its board-to-frame map."""

    size: int
    intersections: np.ndarray  # (N, N, 2): [row, col] -> (x, y)
    homography: np.ndarray  # lattice (col, row) -> frame
    ground_line: np.ndarray | None = None
    horizon: np.ndarray | None = None
    flags: frozenset = frozenset()

    def corner_positions(self) -> dict[str, np.ndarray]:
        n = self.size - 1
        return {
            "TL": self.intersections[0, 0],
            "TR": self.intersections[0, n],
            "BL": self.intersections[n, 0],
            "BR": self.intersections[n, n],
        }

    def spacing_at(self, col: int, row: int) -> float:
        """Mean distance to lattice neighbors, in pixels."""
        dists = []
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            i, j = col + di, row + dj
            if 0 <= i < self.size and 0 <= j < self.size:
                dists.append(np.linalg.norm(
                    self.intersections[row, col] - self.intersections[j, i]))
        return float(np.mean(dists))

    def mean_spacing(self) -> float:
        n = self.size - 1
        c = self.corner_positions()
        per = (np.linalg.norm(c["TL"] - c["TR"]) + np.linalg.norm(c["TR"] - c["BR"])
               + np.linalg.norm(c["BR"] - c["BL"]) + np.linalg.norm(c["BL"] - c["TL"]))
        return float(per / (4 * n))


def lattice_points(n: int) -> np.ndarray:
    """(N*N, 2) array of (col, row) lattice coordinates, row-major."""
    jj, ii = np.mgrid[0:n, 0:n]
    return np.c_[ii.ravel(), jj.ravel()].astype(np.float64)


def grid_from_homography(h: np.ndarray, size: int, ground_line=None, horizon=None,
                         flags: frozenset = frozenset()) -> Grid:
    pts = apply_homography(h, lattice_points(size)).reshape(size, size, 2)
    return Grid(size, pts, h, ground_line, horizon, flags)


# ---------------------------------------------------------------- detection

def detect_lines(edge: EdgeMap, max_lines: int = 100,
                 rho_res: float = 1.0, theta_res_deg: float = 0.5) -> list[HoughLine]:
    """Strongest Hough lines, vote-ordered, with near-duplicates merged."""
    if edge.count() == 0:
        raise EmptyEdgeMap("no set pixels")
    img = edge.bits.astype(np.uint8) * 255
    threshold = max(40, int(0.06 * min(edge.width, edge.height)))
    theta_res = np.deg2rad(theta_res_deg)
    raw = cv2.HoughLines(img, rho_res, theta_res, threshold)
    if raw is None:
        raw = cv2.HoughLines(img, rho_res, theta_res, max(20, threshold // 2))
    if raw is None:
        return []
    rho = raw[:, 0, 0].astype(np.float64)
    theta = raw[:, 0, 1].astype(np.float64)
    # fold theta into [0, pi): (rho, theta) and (-rho, theta - pi) are one line
    wrap = theta >= np.pi - 0.5 * theta_res
    theta[wrap] -= np.pi
    rho[wrap] = -rho[wrap]
    neg = theta < 0
    theta[neg] += np.pi
    rho[neg] = -rho[neg]

    kept: list[HoughLine] = []
    kept_rt: list[tuple[float, float]] = []
    tol_t, tol_r = np.deg2rad(1.5), 4.0
    for r, t in zip(rho[: max_lines * 6], theta[: max_lines * 6]):
        dup = False
        for kr, kt in kept_rt:
            dt = abs(t - kt)
            if min(dt, np.pi - dt) <= tol_t:
                rr = r if dt <= tol_t else -r  # mirrored comparison near the wrap
                if abs(rr - kr) <= tol_r:
                    dup = True
                    break
        if not dup:
            kept_rt.append((r, t))
            kept.append(HoughLine(float(r), float(t), rank=len(kept)))
            if len(kept) >= max_lines:
                break
    return kept


# ------------------------------------------------------------------ pencils

def vanishing_point(line: HoughLine, m: float) -> np.ndarray:
    """Common point of a pencil from one member and its Hough-space tangent slope.

    With m = d(rho)/d(theta) along the curve rho(theta) = x0 cos + y0 sin traced
    by a pencil through (x0, y0), the member at (rho, theta) gives back
    (rho cos - m sin, rho sin + m cos) = (x0, y0). An infinite slope means the
    members are parallel and the result is the ideal point along them.
    """
    c, s = np.cos(line.theta), np.sin(line.theta)
    if not np.isfinite(m):
        return np.array([-s, c, 0.0])
    return np.array([line.rho * c - m * s, line.rho * s + m * c, 1.0])


def _ls_vanishing_point(thetas: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    """Least-squares concurrency point of lines given in (rho, theta) form."""
    c, s = np.cos(thetas), np.sin(thetas)
    m11, m12, m22 = (c * c).sum(), (c * s).sum(), (s * s).sum()
    M = np.array([[m11, m12], [m12, m22]])
    b = np.array([(c * rhos).sum(), (s * rhos).sum()])
    w, _ = np.linalg.eigh(M)
    if w[0] < 1e-7 * max(w[1], 1e-12):
        # parallel family: ideal point along the common direction
        th = 0.5 * np.arctan2(np.sin(2 * thetas).mean(), np.cos(2 * thetas).mean())
        return np.array([-np.sin(th), np.cos(th), 0.0])
    x, y = np.linalg.solve(M, b)
    return np.array([x, y, 1.0])


def _pencil_residuals_px(thetas: np.ndarray, rhos: np.ndarray, vp: np.ndarray,
                         frame_center: np.ndarray, diag: float) -> np.ndarray:
    """Per-line miss distance w.r.t. a candidate vanishing point, in in-frame pixels.

    For far or ideal points the raw point-to-line distance explodes with the
    lever arm, so it is rescaled to the positional error the miss causes inside
    the frame.
    """
    c, s = np.cos(thetas), np.sin(thetas)
    if is_ideal(vp):
        d = vp[:2] / np.hypot(vp[0], vp[1])
        return np.abs(d[0] * c + d[1] * s) * diag
    x, y = vp[0] / vp[2], vp[1] / vp[2]
    raw = np.abs(c * x + s * y - rhos)
    lever = np.hypot(x - frame_center[0], y - frame_center[1])
    return raw * (diag / max(diag, lever))


def _tangent_slopes(thetas: np.ndarray, vp: np.ndarray) -> np.ndarray:
    if is_ideal(vp):
        return np.full(len(thetas), np.inf)
    x, y = vp[0] / vp[2], vp[1] / vp[2]
    return -x * np.sin(thetas) + y * np.cos(thetas)


def find_pencil_candidates(
    lines: list[HoughLine],
    frame_shape: tuple[int, int],
    tol_px: float = 2.5,
    min_members: int = 5,
    max_pencils: int = 4,
) -> list[Pencil]:
    """Greedy extraction of concurrent-line families, largest first.

    Seeds come from all pairwise intersections (equivalent to scanning the
    aligned/curved point sets the members trace in Hough space), then each
    family's point is refit by least squares and the membership re-extended.
    """
    h, w = frame_shape
    center = np.array([w / 2.0, h / 2.0])
    diag = float(np.hypot(w, h))
    thetas = np.array([l.theta for l in lines])
    rhos = np.array([l.rho for l in lines])
    n = len(lines)
    if n < 2:
        return []

    L = np.c_[np.cos(thetas), np.sin(thetas), -rhos]
    ii, jj = np.triu_indices(n, k=1)
    cand = np.cross(L[ii], L[jj])
    ok = np.linalg.norm(cand, axis=1) > 1e-9
    cand = cand[ok]

    remaining = np.ones(n, dtype=bool)
    pencils: list[Pencil] = []
    for _ in range(max_pencils):
        best_count, best_mask = 0, None
        for p in cand:
            r = _pencil_residuals_px(thetas, rhos, p, center, diag)
            mask = (r < tol_px) & remaining
            cnt = int(mask.sum())
            if cnt > best_count:
                best_count, best_mask = cnt, mask
        if best_mask is None or best_count < min_members:
            break
        mask = best_mask
        vp = np.zeros(3)
        for _ in range(3):
            vp = _ls_vanishing_point(thetas[mask], rhos[mask])
            r = _pencil_residuals_px(thetas, rhos, vp, center, diag)
            new_mask = (r < tol_px) & remaining
            if new_mask.sum() < min_members:
                break
            mask = new_mask
        idx = np.nonzero(mask)[0]
        slopes = _tangent_slopes(thetas[idx], vp)
        pencils.append(Pencil(tuple(lines[k] for k in idx), tuple(slopes), vp))
        remaining &= ~mask
        if remaining.sum() < min_members:
            break
    pencils.sort(key=len, reverse=True)
    return pencils


def find_pencils(lines: list[HoughLine], frame_shape: tuple[int, int] = (1080, 1920),
                 tol_px: float = 2.5, min_members: int = 5) -> tuple[Pencil, Pencil]:
    """The two largest disjoint pencils; raises when fewer than two exist."""
    pencils = find_pencil_candidates(lines, frame_shape, tol_px, min_members)
    if len(pencils) < 2:
        raise InsufficientPencils(
            f"found {len(pencils)} concurrent families of >= {min_members} lines")
    return pencils[0], pencils[1]


# ------------------------------------------------------------- ground line

def ground_line(v1: np.ndarray, v2: np.ndarray, frame_center: tuple[float, float]
                ) -> tuple[np.ndarray, np.ndarray]:
    """Horizon through both vanishing points and a parallel through the center."""
    def _canon(v):
        return v / v[2] if not is_ideal(v) else v / np.hypot(v[0], v[1])

    a, b = _canon(np.asarray(v1, float)), _canon(np.asarray(v2, float))
    horizon = np.cross(a, b)
    if np.linalg.norm(horizon) < 1e-9:
        raise DegenerateHorizon("vanishing points coincide")
    cx, cy = frame_center
    if np.hypot(horizon[0], horizon[1]) < 1e-12 * abs(horizon[2]):
        # both points ideal: the horizon is the line at infinity and every
        # finite line is "parallel" to it; use a level line through the center
        return np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, -cy])
    horizon = normalize_line(horizon)
    gl = parallel_line_through(horizon, cx, cy)
    if abs(horizon[0] * cx + horizon[1] * cy + horizon[2]) < 1e-9:
        # center sits on the horizon; push the ground line a quarter frame off
        gl = parallel_line_through(horizon, cx - horizon[0] * cy / 2, cy - horizon[1] * cy / 2)
    return horizon, gl


def _gl_param(gl: np.ndarray, frame_center: tuple[float, float]):
    """Origin and unit direction parameterizing positions along a line."""
    l = normalize_line(gl)
    cx, cy = frame_center
    d = l[0] * cx + l[1] * cy + l[2]
    origin = np.array([cx - d * l[0], cy - d * l[1]])
    g = np.array([-l[1], l[0]])
    if g[0] < 0 or (g[0] == 0 and g[1] < 0):
        g = -g
    return origin, g


# ------------------------------------------------------- 1D lattice fitting

@dataclass
class LatticeFit1D:
    positions: np.ndarray  # (N,) fitted slot positions
    observed: np.ndarray   # (N,) observed position or nan where synthesized
    spacing: float
    member_of_slot: list[int | None]  # index into input positions, per slot


def fit_lattice_1d(
    values: np.ndarray,
    weights: np.ndarray,
    target: int,
    tol_frac: float = 0.2,
    merge_eps: float | None = None,
) -> LatticeFit1D:
    """Best equispaced ``target``-slot arrangement covering 1D positions.

    Merges near-duplicates, estimates the pitch from consecutive gaps, snaps
    members to integer slots (pruning those off by more than ``tol_frac`` of a
    pitch), and picks the ``target``-wide window with the most member support.
    Raises NoEquispacedSubset when no window reaches target/2 members.
    """
    values = np.asarray(values, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    order = np.argsort(values)
    values, weights = values[order], weights[order]
    src_index = order

    need = int(np.ceil(target / 2))
    if len(values) < 2:
        raise NoEquispacedSubset(f"{len(values)} positions for target {target}")

    gaps = np.diff(values)
    if merge_eps is None:
        ref = np.median(gaps[gaps > 0]) if (gaps > 0).any() else 1.0
        merge_eps = 0.15 * ref
    merged_v, merged_w, merged_src = [], [], []
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[j + 1] - values[j] <= merge_eps:
            j += 1
        chunk_w = weights[i:j + 1]
        merged_v.append(float(np.average(values[i:j + 1], weights=chunk_w)))
        merged_w.append(float(chunk_w.sum()))
        merged_src.append(int(src_index[i + int(np.argmax(chunk_w))]))
        i = j + 1
    v = np.array(merged_v)
    wt = np.array(merged_w)
    if len(v) < need:
        raise NoEquispacedSubset(f"{len(v)} distinct positions, need {need}")

    gaps = np.diff(v)
    s0 = float(np.median(gaps))
    best = None
    for s_cand in {s0, s0 / 2.0, s0 / 3.0, 2.0 * s0}:
        if s_cand <= 3.0 * merge_eps or s_cand <= 0:
            continue
        anchor = v[int(np.argmax(wt))]
        phi, s = anchor, s_cand
        inl = np.ones(len(v), dtype=bool)
        k = np.rint((v - phi) / s)
        for _ in range(3):
            res = v - (phi + k * s)
            inl = np.abs(res) <= tol_frac * s
            if inl.sum() < 2:
                break
            A = np.c_[np.ones(inl.sum()), k[inl]]
            sol, *_ = np.linalg.lstsq(A * wt[inl, None], wt[inl, None] * np.c_[v[inl]], rcond=None)
            phi, s = float(sol[0, 0]), float(sol[1, 0])
            if s <= 3.0 * merge_eps:
                break
            k = np.rint((v - phi) / s)
        if s <= 3.0 * merge_eps or inl.sum() < 2:
            continue
        # resolve slot collisions: keep the best-fitting member per k
        res = np.abs(v - (phi + k * s))
        slot_best: dict[int, int] = {}
        for idx in np.nonzero(inl)[0]:
            kk = int(k[idx])
            if kk not in slot_best or res[idx] < res[slot_best[kk]]:
                slot_best[kk] = idx
        score = (len(slot_best), -float(np.mean([res[i2] for i2 in slot_best.values()])))
        if best is None or score > best[0]:
            best = (score, phi, s, slot_best)
    if best is None:
        raise NoEquispacedSubset("no pitch candidate produced a consistent fit")

    _, phi, s, slot_best = best
    ks = sorted(slot_best)
    best_window, best_support = None, -1.0
    for w0 in range(ks[0] - (target - 1), ks[-1] + 1):
        members = [kk for kk in ks if w0 <= kk < w0 + target]
        if len(members) < need:
            continue
        support = len(members) + 1e-3 * sum(wt[slot_best[kk]] for kk in members)
        if support > best_support:
            best_support, best_window = support, w0
    if best_window is None:
        raise NoEquispacedSubset(f"no {target}-slot window holds {need} members")

    positions = np.empty(target)
    observed = np.full(target, np.nan)
    member_of_slot: list[int | None] = [None] * target
    for t in range(target):
        kk = best_window + t
        if kk in slot_best:
            idx = slot_best[kk]
            positions[t] = v[idx]
            observed[t] = v[idx]
            member_of_slot[t] = merged_src[idx]
        else:
            positions[t] = phi + kk * s
    return LatticeFit1D(positions, observed, float(s), member_of_slot)


def complete_equispaced_pencil(
    pencil: Pencil,
    gl: np.ndarray,
    target: int,
    frame_center: tuple[float, float] = (960.0, 540.0),
    tol_frac: float = 0.2,
) -> list[np.ndarray]:
    """Exactly ``target`` pencil lines with equispaced ground-line crossings.

    Observed members keep their measured crossing; missing slots are
    synthesized through the vanishing point; off-lattice intruders are pruned.
    """
    origin, g = _gl_param(gl, frame_center)
    ts, weights = [], []
    nrank = max(l.rank for l in pencil.lines) + 1
    diag_cap = 50.0 * np.hypot(*frame_center) * 2
    for l in pencil.lines:
        p = meet(l.as_line(), gl)
        if is_ideal(p):
            continue
        x, y = p[0] / p[2], p[1] / p[2]
        t = (x - origin[0]) * g[0] + (y - origin[1]) * g[1]
        if abs(t) > diag_cap:
            continue
        ts.append(t)
        weights.append(float(nrank - l.rank))
    if len(ts) < int(np.ceil(target / 2)):
        raise NoEquispacedSubset(f"{len(ts)} usable crossings for target {target}")
    fit = fit_lattice_1d(np.array(ts), np.array(weights), target, tol_frac, merge_eps=2.0)
    vp = pencil.vanishing_point
    out = []
    for t in fit.positions:
        pt = hpoint(origin[0] + t * g[0], origin[1] + t * g[1])
        out.append(normalize_line(join(vp, pt)))
    return out


# ---------------------------------------------------------------- coupling

@dataclass(frozen=True)
class DiagonalMatch:
    indices: tuple[int, ...]  # couple indices on the aligned subset
    line: np.ndarray


def couple_diagonal(verticals: list[np.ndarray], horizontals: list[np.ndarray],
                    tol_px: float = 3.0, min_points: int = 5) -> DiagonalMatch:
    """Pair sorted verticals and horizontals index-by-index; the longest aligned
    subset of their intersections is a diagonal of the grid."""
    n = min(len(verticals), len(horizontals))
    pts = []
    for k in range(n):
        p = meet(verticals[k], horizontals[k])
        if is_ideal(p):
            raise NoDiagonal("coupled lines are parallel")
        pts.append([p[0] / p[2], p[1] / p[2]])
    pts = np.array(pts)
    if n < min_points:
        raise NoDiagonal(f"only {n} couples")
    best_idx: np.ndarray | None = None
    for a in range(n - 1):
        for b in range(a + 1, n):
            d = pts[b] - pts[a]
            nrm = np.hypot(*d)
            if nrm < 1e-9:
                continue
            normal = np.array([-d[1], d[0]]) / nrm
            dist = np.abs((pts - pts[a]) @ normal)
            inl = np.nonzero(dist < tol_px)[0]
            if best_idx is None or len(inl) > len(best_idx):
                best_idx = inl
    if best_idx is None or len(best_idx) < min_points:
        raise NoDiagonal("no aligned subset of coupled intersections")
    sub = pts[best_idx]
    c = sub.mean(axis=0)
    d = sub - c
    _, vecs = np.linalg.eigh(d.T @ d)
    a_, b_ = vecs[:, 0]
    line = normalize_line(np.array([a_, b_, -(a_ * c[0] + b_ * c[1])]))
    return DiagonalMatch(tuple(int(i) for i in best_idx), line)


# ------------------------------------------------ horizontal reconstruction

def _fit_projective_1d(u: np.ndarray, q: np.ndarray) -> tuple[float, float, float]:
    """Fit q = (A u + B) / (C u + 1) by least squares."""
    A = np.c_[u, np.ones(len(u)), -q * u]
    sol, *_ = np.linalg.lstsq(A, q, rcond=None)
    return float(sol[0]), float(sol[1]), float(sol[2])


def complete_horizontals(
    members: list[np.ndarray],
    member_weights: list[float],
    diag: np.ndarray,
    verticals: list[np.ndarray],
    vp_h: np.ndarray,
    target: int,
    frame_center: tuple[float, float],
    tol_frac: float = 0.2,
) -> list[np.ndarray]:
    """Rebuild all grid rows from observed members plus the diagonal anchor.

    Each column j crosses the diagonal at the lattice point of row j (up to a
    constant offset), giving a projective ruler along the diagonal. Observed
    rows land on integer ruler positions; the same lattice completion as for
    the ground line then fills in the rest through the row vanishing point.
    """
    origin, g = _gl_param(diag, frame_center)
    qs = []
    for v in verticals:
        p = meet(v, diag)
        if is_ideal(p):
            raise GridNotFound("couple_diagonal", "diagonal parallel to a column")
        x, y = p[0] / p[2], p[1] / p[2]
        qs.append((x - origin[0]) * g[0] + (y - origin[1]) * g[1])
    qs = np.array(qs)
    u_cols = np.arange(len(verticals), dtype=np.float64)
    A, B, C = _fit_projective_1d(u_cols, qs)

    def q_of_u(u: float) -> float:
        return (A * u + B) / (C * u + 1.0)

    def u_of_q(q: float) -> float:
        return (B - q) / (q * C - A)

    us, ws = [], []
    for line, w in zip(members, member_weights):
        p = meet(line, diag)
        if is_ideal(p):
            continue
        x, y = p[0] / p[2], p[1] / p[2]
        q = (x - origin[0]) * g[0] + (y - origin[1]) * g[1]
        den = q * C - A
        if abs(den) < 1e-12:
            continue
        u = u_of_q(q)
        if -2 * target < u < 3 * target:
            us.append(u)
            ws.append(w)
    if len(us) < int(np.ceil(target / 2)):
        raise NoEquispacedSubset(f"{len(us)} usable rows for target {target}")
    fit = fit_lattice_1d(np.array(us), np.array(ws), target, tol_frac, merge_eps=0.12)
    out = []
    for u in fit.positions:
        q = q_of_u(float(u))
        pt = hpoint(origin[0] + q * g[0], origin[1] + q * g[1])
        out.append(normalize_line(join(vp_h, pt)))
    return out


# ----------------------------------------------------------- border checks

def _stroke_evidence(bits: np.ndarray, p: np.ndarray, direction: np.ndarray,
                     reach: float, min_frac: float = 0.4) -> bool:
    """Is there an edge stroke running from near p along ``direction``?"""
    h, w = bits.shape
    d = direction / np.hypot(*direction)
    ts = np.linspace(0.15 * reach, 0.85 * reach, 6)
    lateral = np.array([-d[1], d[0]])
    hits = 0
    for t in ts:
        q = p + t * d
        found = False
        for off in (-1.0, 0.0, 1.0):
            s = q + off * lateral
            xi, yi = int(round(s[0])), int(round(s[1]))
            if 0 <= xi < w and 0 <= yi < h and bits[yi, xi]:
                found = True
                break
        if found:
            hits += 1
    return hits >= min_frac * len(ts)


def border_evidence_score(grid: Grid, edge: EdgeMap, side: str,
                          lattice_offset: int = 0) -> float | None:
    """Fraction of one border row/column showing a crossing-stroke junction.

    ``side`` picks the border; ``lattice_offset`` probes lines shifted outward
    from the grid (for the window-shift test). Returns None when the probed
    line leaves the frame.
    """
    n = grid.size
    h_img, w_img = edge.bits.shape
    if side in ("top", "bottom"):
        fixed = (-lattice_offset) if side == "top" else (n - 1 + lattice_offset)
        coords = np.c_[np.arange(n, dtype=np.float64), np.full(n, float(fixed))]
        inward = 1.0 if side == "top" else -1.0
        axis = "row"
    else:
        fixed = (-lattice_offset) if side == "left" else (n - 1 + lattice_offset)
        coords = np.c_[np.full(n, float(fixed)), np.arange(n, dtype=np.float64)]
        inward = 1.0 if side == "left" else -1.0
        axis = "col"
    pts = apply_homography(grid.homography, coords)
    if (pts[:, 0] < 1).any() or (pts[:, 0] > w_img - 2).any() \
            or (pts[:, 1] < 1).any() or (pts[:, 1] > h_img - 2).any():
        return None
    hits = 0
    for k in range(n):
        i, j = coords[k]
        if axis == "row":
            step = apply_homography(grid.homography, np.array([i, j + inward])) - pts[k]
        else:
            step = apply_homography(grid.homography, np.array([i + inward, j])) - pts[k]
        reach = float(np.hypot(*step))
        if _stroke_evidence(edge.bits, pts[k], step, reach * 0.5):
            hits += 1
    return hits / n


def amend_borders(grid: Grid, frame: RawFrame, edge: EdgeMap,
                  threshold: float = 0.4) -> Grid:
    """Shift the lattice window when an outermost line is really the board edge.

    A true border line has the perpendicular grid strokes running inward from
    its intersections; the wooden edge one spacing outside does not. When one
    side scores poorly and the slot one spacing beyond the opposite side scores
    well, the whole window slides by one line.
    """
    h = grid.homography.copy()
    flags = set(grid.flags)
    for low_side, high_side, di, dj in (
        ("bottom", "top", 0, -1),   # drop bottom line, adopt one above the top
        ("top", "bottom", 0, 1),
        ("right", "left", -1, 0),
        ("left", "right", 1, 0),
    ):
        g = grid_from_homography(h, grid.size)
        score_low = border_evidence_score(g, edge, low_side)
        score_beyond = border_evidence_score(g, edge, high_side, lattice_offset=1)
        if score_low is None or score_beyond is None:
            flags.add("partial_visibility")
            continue
        if score_low < threshold and score_beyond >= threshold:
            shift = np.array([[1.0, 0, di], [0, 1.0, dj], [0, 0, 1.0]])
            h = h @ shift
    return grid_from_homography(h, grid.size, grid.ground_line, grid.horizon,
                                frozenset(flags))


# ---------------------------------------------------------------- locating

def _pick_vertical(p1: Pencil, p2: Pencil, gl: np.ndarray) -> tuple[Pencil, Pencil]:
    g = line_direction(gl)

    def offset_from_perp(p: Pencil) -> float:
        d = p.mean_direction()
        ang = np.degrees(np.arccos(min(1.0, abs(float(np.dot(d, g))))))
        return abs(90.0 - ang)

    o1, o2 = offset_from_perp(p1), offset_from_perp(p2)
    if abs(o1 - o2) < 5.0:  # both near 45 degrees: larger pencil wins
        return (p1, p2) if len(p1) >= len(p2) else (p2, p1)
    return (p1, p2) if o1 < o2 else (p2, p1)


def _sort_lines_along(lines: list[np.ndarray], carrier: np.ndarray,
                      frame_center: tuple[float, float],
                      weights: list[float] | None = None):
    origin, g = _gl_param(carrier, frame_center)
    ts = []
    for l in lines:
        p = meet(l, carrier)
        if is_ideal(p):
            ts.append(np.inf)
            continue
        x, y = p[0] / p[2], p[1] / p[2]
        ts.append((x - origin[0]) * g[0] + (y - origin[1]) * g[1])
    order = np.argsort(ts)
    sorted_lines = [lines[i] for i in order if np.isfinite(ts[i])]
    if weights is None:
        return sorted_lines
    return sorted_lines, [weights[i] for i in order if np.isfinite(ts[i])]


def _grid_from_families(verticals: list[np.ndarray], horizontals: list[np.ndarray],
                        size: int) -> np.ndarray:
    pts = np.empty((size, size, 2))
    for j, hl in enumerate(horizontals):
        for i, vl in enumerate(verticals):
            p = meet(vl, hl)
            if is_ideal(p):
                raise GridNotFound("homography", "parallel grid families")
            pts[j, i] = (p[0] / p[2], p[1] / p[2])
    return pts


def _refine_family(lines: list[np.ndarray], crossings: np.ndarray, bits: np.ndarray,
                   family: str, spacing: float) -> list[np.ndarray]:
    out = []
    n = crossings.shape[0]
    for k, line in enumerate(lines):
        if family == "vertical":
            p0, p1 = crossings[0, k], crossings[n - 1, k]
        else:
            p0, p1 = crossings[k, 0], crossings[k, n - 1]
        ext = 0.4 * spacing * (p1 - p0) / max(1e-9, np.linalg.norm(p1 - p0))
        refined = refine_line_on_edges(bits, line, p0 - ext, p1 + ext,
                                       halfwidth=2.5, samples=72)
        out.append(refined if refined is not None else line)
    return out


def locate_grid(frame: RawFrame, cfg: PipelineConfig | None = None,
                edge: EdgeMap | None = None) -> Grid:
    """Run the whole location procedure on one frame.

    Tries board sizes largest-first; raises GridNotFound carrying the first
    failing stage of the last size attempted.
    """
    cfg = cfg or PipelineConfig()
    work = cap_resolution(frame, cfg.resolution_cap)
    if edge is None:
        work = normalize_gamma(work)
        edge = edge_map_dog(work, cfg.dog_radius, cfg.dog_sigma_narrow,
                            cfg.dog_sigma_wide, cfg.dog_threshold)
    center = (work.width / 2.0, work.height / 2.0)

    try:
        lines = detect_lines(edge, cfg.max_lines, cfg.hough_rho_res, cfg.hough_theta_res_deg)
    except EmptyEdgeMap as e:
        raise GridNotFound("detect_lines", str(e)) from e
    if len(lines) < 2 * cfg.pencil_min_members:
        raise GridNotFound("detect_lines", f"only {len(lines)} lines")

    pencils = find_pencil_candidates(lines, edge.bits.shape,
                                     cfg.pencil_tolerance_px, cfg.pencil_min_members)
    if len(pencils) < 2:
        raise GridNotFound("find_pencils", f"{len(pencils)} families")

    pairs = [(a, b) for a in range(len(pencils)) for b in range(len(pencils)) if a < b]
    last_err: GridNotFound | None = None
    for ia, ib in pairs[:4]:
        pa, pb = pencils[ia], pencils[ib]
        ang = np.degrees(np.arccos(min(1.0, abs(float(
            np.dot(pa.mean_direction(), pb.mean_direction()))))))
        if ang < 20.0:
            continue
        try:
            return _locate_with_pencils(pa, pb, edge, center, cfg)
        except GridNotFound as e:
            last_err = e
    raise last_err or GridNotFound("find_pencils", "no workable pencil pair")


def _locate_with_pencils(p1: Pencil, p2: Pencil, edge: EdgeMap,
                         center: tuple[float, float], cfg: PipelineConfig) -> Grid:
    try:
        horizon, gl = ground_line(p1.vanishing_point, p2.vanishing_point, center)
    except DegenerateHorizon as e:
        raise GridNotFound("ground_line", str(e)) from e

    vert, horiz = _pick_vertical(p1, p2, gl)
    nrank = max(max(l.rank for l in vert.lines), max(l.rank for l in horiz.lines)) + 1

    last: GridNotFound | None = None
    for size in GRID_SIZES:
        try:
            vlines = complete_equispaced_pencil(vert, gl, size, center, cfg.spacing_tolerance)
        except NoEquispacedSubset as e:
            last = GridNotFound("complete_vertical", str(e))
            continue
        vlines = _sort_lines_along(vlines, gl, center)

        transversal = normalize_line(join(vert.vanishing_point, hpoint(*center)))
        hw = [float(nrank - l.rank) for l in horiz.lines]
        hmembers, hweights = _sort_lines_along(
            [l.as_line() for l in horiz.lines], transversal, center, hw)
        if len(hmembers) < cfg.pencil_min_members:
            last = GridNotFound("couple_diagonal", "too few horizontal members")
            continue
        try:
            diag = couple_diagonal(vlines, hmembers, tol_px=3.0)
        except NoDiagonal as e:
            last = GridNotFound("couple_diagonal", str(e))
            continue
        try:
            hlines = complete_horizontals(hmembers, hweights, diag.line, vlines,
                                          horiz.vanishing_point, size, center,
                                          cfg.spacing_tolerance)
        except (NoEquispacedSubset, GridNotFound) as e:
            last = GridNotFound("complete_horizontal", str(e))
            continue
        hlines = _sort_lines_along(hlines, transversal, center)

        try:
            crossings = _grid_from_families(vlines, hlines, size)
        except GridNotFound as e:
            last = e
            continue
        spacing = float(np.linalg.norm(crossings[0, 0] - crossings[0, 1]))
        vref = _refine_family(vlines, crossings, edge.bits, "vertical", spacing)
        href = _refine_family(hlines, crossings, edge.bits, "horizontal", spacing)
        try:
            crossings = _grid_from_families(vref, href, size)
        except GridNotFound:
            crossings = _grid_from_families(vlines, hlines, size)

        lat = lattice_points(size)
        homography = homography_from_points(lat, crossings.reshape(-1, 2))
        fitted = apply_homography(homography, lat)
        residual = float(np.median(np.linalg.norm(fitted - crossings.reshape(-1, 2), axis=1)))
        if residual > 3.0:
            last = GridNotFound("homography", f"median residual {residual:.1f}px")
            continue
        grid = grid_from_homography(homography, size, gl, horizon)
        return amend_borders(grid, None, edge, cfg.border_evidence_threshold)
    raise last or GridNotFound("complete_vertical", "no size fits")
