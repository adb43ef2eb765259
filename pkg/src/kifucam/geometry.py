"""Homogeneous 2D geometry: points, lines, homographies, edge-band line fits.

Points and lines are length-3 float arrays. A point (x, y, w) with w == 0 is
ideal (a direction); a line (a, b, c) satisfies ax + by + c = 0 and is kept
normalized so hypot(a, b) == 1 whenever it came through :func:`normalize_line`.
"""

from __future__ import annotations

import numpy as np

IDEAL_W = 1e-9


def hpoint(x: float, y: float) -> np.ndarray:
    return np.array([x, y, 1.0])


def hdir(dx: float, dy: float) -> np.ndarray:
    n = float(np.hypot(dx, dy))
    return np.array([dx / n, dy / n, 0.0])


def is_ideal(p: np.ndarray) -> bool:
    return abs(p[2]) <= IDEAL_W * float(np.hypot(p[0], p[1]))


def dehom(p: np.ndarray) -> tuple[float, float]:
    if is_ideal(p):
        raise ZeroDivisionError("cannot dehomogenize an ideal point")
    return float(p[0] / p[2]), float(p[1] / p[2])


def join(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Line through two homogeneous points."""
    return np.cross(p, q)


def meet(l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
    """Homogeneous intersection point of two lines."""
    return np.cross(l1, l2)


def line_from_rho_theta(rho: float, theta: float) -> np.ndarray:
    """Line x cos(theta) + y sin(theta) = rho as (a, b, c)."""
    return np.array([np.cos(theta), np.sin(theta), -rho])


def normalize_line(line: np.ndarray) -> np.ndarray:
    n = float(np.hypot(line[0], line[1]))
    if n == 0.0:
        raise ValueError("line at infinity has no Euclidean normal form")
    return line / n


def line_point_distance(line: np.ndarray, p: np.ndarray) -> float:
    """Euclidean distance from a finite point to a line."""
    l = normalize_line(line)
    x, y = dehom(p)
    return abs(l[0] * x + l[1] * y + l[2])


def line_direction(line: np.ndarray) -> np.ndarray:
    """Unit direction vector of a line (2-vector)."""
    l = normalize_line(line)
    return np.array([-l[1], l[0]])


def parallel_line_through(line: np.ndarray, x: float, y: float) -> np.ndarray:
    l = normalize_line(line)
    return np.array([l[0], l[1], -(l[0] * x + l[1] * y)])


def angle_between_directions(d1: np.ndarray, d2: np.ndarray) -> float:
    """Undirected angle between two 2D directions, in [0, pi/2]."""
    c = abs(float(np.dot(d1, d2)) / (np.hypot(*d1) * np.hypot(*d2)))
    return float(np.arccos(min(1.0, c)))


def homography_from_points(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Direct linear transform with Hartley normalization.

    ``src`` and ``dst`` are (N, 2) arrays, N >= 4. Returns H with H @ (x, y, 1)
    proportional to the destination point.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.shape[0] < 4:
        raise ValueError("need at least 4 point correspondences of equal count")

    def _norm(pts):
        c = pts.mean(axis=0)
        d = np.sqrt(((pts - c) ** 2).sum(axis=1)).mean()
        s = np.sqrt(2.0) / max(d, 1e-12)
        T = np.array([[s, 0, -s * c[0]], [0, s, -s * c[1]], [0, 0, 1.0]])
        return T

    Ts, Td = _norm(src), _norm(dst)
    sh = (Ts @ np.c_[src, np.ones(len(src))].T).T
    dh = (Td @ np.c_[dst, np.ones(len(dst))].T).T

    n = len(src)
    A = np.zeros((2 * n, 9))
    A[0::2, 0:3] = sh
    A[0::2, 6:9] = -dh[:, 0:1] * sh
    A[1::2, 3:6] = sh
    A[1::2, 6:9] = -dh[:, 1:2] * sh
    _, _, vt = np.linalg.svd(A)
    Hn = vt[-1].reshape(3, 3)
    H = np.linalg.inv(Td) @ Hn @ Ts
    return H / H[2, 2]


def apply_homography(H: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Map (N, 2) points through H, returning (N, 2)."""
    pts = np.asarray(pts, dtype=np.float64)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    ph = np.c_[pts, np.ones(len(pts))] @ H.T
    out = ph[:, :2] / ph[:, 2:3]
    return out[0] if single else out


def fit_line_tls(points: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Total-least-squares line through (N, 2) points, as normalized (a, b, c)."""
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 2:
        raise ValueError("need at least 2 points")
    w = np.ones(len(pts)) if weights is None else np.asarray(weights, dtype=np.float64)
    c = (pts * w[:, None]).sum(axis=0) / w.sum()
    d = pts - c
    cov = (d * w[:, None]).T @ d
    _, vecs = np.linalg.eigh(cov)
    normal = vecs[:, 0]  # eigenvector of the smaller eigenvalue
    a, b = normal
    return normalize_line(np.array([a, b, -(a * c[0] + b * c[1])]))


def refine_line_on_edges(
    bits: np.ndarray,
    line: np.ndarray,
    p0: tuple[float, float],
    p1: tuple[float, float],
    halfwidth: float = 3.0,
    samples: int = 64,
) -> np.ndarray | None:
    """Snap a line to the centerline of edge-pixel support between two endpoints.

    Walks ``samples`` stations along the segment p0-p1, takes the perpendicular
    profile of set pixels within ``halfwidth``, and TLS-fits the profile
    centroids. Stations with no support, or solid blobs wider than 70% of the
    profile (stone bodies, occluders), are skipped. Returns None when fewer
    than 8 stations survive.
    """
    l = normalize_line(line)
    h, w = bits.shape
    p0 = np.asarray(p0, dtype=np.float64)
    p1 = np.asarray(p1, dtype=np.float64)
    t = np.linspace(0.0, 1.0, samples)
    stations = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
    normal = np.array([l[0], l[1]])
    offs = np.arange(-int(np.ceil(halfwidth)), int(np.ceil(halfwidth)) + 1, dtype=np.float64)

    # project stations onto the line so the profile is centered on it
    d = stations @ normal + l[2]
    stations = stations - d[:, None] * normal[None, :]

    px = np.rint(stations[:, None, 0] + offs[None, :] * normal[0]).astype(int)
    py = np.rint(stations[:, None, 1] + offs[None, :] * normal[1]).astype(int)
    inside = (px >= 0) & (px < w) & (py >= 0) & (py < h)
    hit = np.zeros(px.shape, dtype=bool)
    hit[inside] = bits[py[inside], px[inside]]

    counts = hit.sum(axis=1)
    ok = (counts > 0) & (counts <= 0.7 * len(offs))
    if ok.sum() < 8:
        return None
    centroid_off = (hit * offs[None, :]).sum(axis=1)[ok] / counts[ok]
    centers = stations[ok] + centroid_off[:, None] * normal[None, :]

    fit = fit_line_tls(centers, weights=counts[ok].astype(np.float64))
    # one trimmed re-fit to shed stations polluted by crossing strokes
    res = np.abs(centers @ fit[:2] + fit[2])
    keep = res <= max(1.0, 2.0 * np.median(res))
    if keep.sum() >= 8 and keep.sum() < len(centers):
        fit = fit_line_tls(centers[keep], weights=counts[ok][keep].astype(np.float64))
    return fit
