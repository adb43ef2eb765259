"""Synthetic goban scenes with exact ground truth.

Renders perspective frames of a board (wood texture, grid, lenticular stones
with highlights and drop shadows, board side faces, arm-shaped occluders,
lighting gradient, sensor noise) and scripts whole games from SGF including
the disturbance interludes around every move. Ground truth per frame carries
the exact grid homography, the physical and logical board, and the pending
captures, so the detection pipeline can be scored without any real footage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import cv2
import numpy as np

from .errors import DegeneratePose, SgfInvalid
from .grid_locator import Grid, grid_from_homography
from .preprocess import RawFrame
from .rules import BLACK, WHITE, BoardState, Coord, expected_captures
from . import sgf as sgf_mod


@dataclass(frozen=True)
class CameraPose:
    elevation_deg: float = 35.0
    azimuth_deg: float = 0.0
    distance: float = 1.9  # board widths from board center
    focal_px: float = 1500.0


@dataclass(frozen=True)
class SceneSpec:
    board_size: int = 19
    spacing_mm: float = 22.0
    stone_diameter_mm: float = 21.8
    stone_height_mm: float = 10.0
    board_margin_mm: float = 14.0
    board_thickness_mm: float = 28.0
    line_width_mm: float = 1.0
    texture_seed: int = 7
    lighting_gradient: float = 0.12
    noise_sigma: float = 2.0
    frame_width: int = 1920
    frame_height: int = 1080

    def __post_init__(self):
        if not self.stone_diameter_mm > 0.9 * self.spacing_mm:
            raise ValueError("stones must be at least 0.9x the line spacing")

    @property
    def board_width_mm(self) -> float:
        return (self.board_size - 1) * self.spacing_mm + 2 * self.board_margin_mm


@dataclass(frozen=True)
class HeldStone:
    board_mm: tuple[float, float]
    color: int = BLACK
    height_mm: float = 5.0


@dataclass(frozen=True)
class Occluder:
    polygons: tuple[np.ndarray, ...]  # each (K, 2) float in frame pixels
    fill: tuple[int, int, int] = (196, 152, 118)  # skin
    held: HeldStone | None = None


OCCLUDER_FILLS = (
    (196, 152, 118),  # skin
    (224, 198, 170),  # pale skin
    (28, 26, 30),     # near-black sleeve
    (238, 238, 234),  # near-white sleeve
    (70, 88, 140),    # blue clothing
)

WOOD_BASE = np.array([182, 142, 92], dtype=np.float64)
LINE_COLOR = np.array([48, 38, 28], dtype=np.float64)
TABLE_COLOR = np.array([74, 54, 44], dtype=np.float64)
SIDE_COLOR = np.array([150, 112, 70], dtype=np.float64)


def _camera_matrices(scene: SceneSpec, pose: CameraPose):
    """World (mm, board plane z=0) to image: full projection and the plane homography."""
    el = math.radians(pose.elevation_deg)
    az = math.radians(pose.azimuth_deg)
    if not 10.0 < pose.elevation_deg <= 90.0:
        raise DegeneratePose(f"elevation {pose.elevation_deg} out of (10, 90]")
    w = scene.board_width_mm
    c = pose.distance * w * np.array(
        [math.cos(el) * math.sin(az), -math.cos(el) * math.cos(az), math.sin(el)])
    fwd = -c / np.linalg.norm(c)
    up = np.array([0.0, 0.0, 1.0])
    x_cam = np.cross(fwd, up)
    nx = np.linalg.norm(x_cam)
    if nx < 1e-9:  # looking straight down: pick east as image right
        x_cam = np.array([1.0, 0.0, 0.0])
    else:
        x_cam /= nx
    y_cam = np.cross(fwd, x_cam)
    r = np.stack([x_cam, y_cam, fwd])
    k = np.array([
        [pose.focal_px, 0.0, scene.frame_width / 2.0],
        [0.0, pose.focal_px, scene.frame_height / 2.0],
        [0.0, 0.0, 1.0],
    ])
    ext = np.c_[r, -r @ c]  # 3x4
    proj = k @ ext
    h_mm = proj[:, [0, 1, 3]]
    if abs(np.linalg.det(h_mm)) < 1e-9:
        raise DegeneratePose("board plane projects degenerately")
    return proj, h_mm, c


def project_points(proj: np.ndarray, pts_mm: np.ndarray) -> np.ndarray:
    """Project (N, 3) world mm points to (N, 2) pixels."""
    ph = np.c_[pts_mm, np.ones(len(pts_mm))] @ proj.T
    return ph[:, :2] / ph[:, 2:3]


def lattice_to_mm(scene: SceneSpec) -> np.ndarray:
    """Affine lattice (col, row) -> board mm (x east, y north)."""
    n, s = scene.board_size, scene.spacing_mm
    half = (n - 1) / 2.0
    return np.array([[s, 0.0, -s * half], [0.0, -s, s * half], [0.0, 0.0, 1.0]])


def ground_truth_grid(scene: SceneSpec, pose: CameraPose) -> Grid:
    _, h_mm, _ = _camera_matrices(scene, pose)
    h_lat = h_mm @ lattice_to_mm(scene)
    return grid_from_homography(h_lat / h_lat[2, 2], scene.board_size)


_STAR_POINTS = {
    19: [(i, j) for i in (3, 9, 15) for j in (3, 9, 15)],
    13: [(3, 3), (3, 9), (9, 3), (9, 9), (6, 6)],
    9: [(2, 2), (2, 6), (6, 2), (6, 6), (4, 4)],
}


@lru_cache(maxsize=6)
def _board_texture(scene: SceneSpec, px_per_mm: float = 2.0) -> np.ndarray:
    """Top-down board image: wood grain, grid lines, star points."""
    rng = np.random.default_rng(scene.texture_seed)
    w_mm = scene.board_width_mm
    side = int(round(w_mm * px_per_mm))
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
    grain = (np.sin(xx * (0.06 + 0.02 * np.sin(yy * 0.008 + rng.uniform(0, 6.3)))
                    + rng.uniform(0, 6.3))
             * 6.0 + rng.normal(0, 2.0, (side, side)))
    tex = WOOD_BASE[None, None, :] + grain[:, :, None] * np.array([1.0, 0.9, 0.7])
    tex = np.clip(tex, 0, 255)

    def mm2px(v: float) -> float:
        return v * px_per_mm

    lw = max(1, int(round(mm2px(scene.line_width_mm))))
    for i in range(scene.board_size):
        p = mm2px(scene.board_margin_mm + i * scene.spacing_mm)
        lo, hi = int(round(p - lw / 2)), int(round(p - lw / 2)) + lw
        a, b = int(round(mm2px(scene.board_margin_mm))), int(round(mm2px(w_mm - scene.board_margin_mm)))
        tex[a:b + 1, lo:hi] = LINE_COLOR
        tex[lo:hi, a:b + 1] = LINE_COLOR
    rad = int(round(mm2px(2.2)))
    for (i, j) in _STAR_POINTS.get(scene.board_size, []):
        cx = int(round(mm2px(scene.board_margin_mm + i * scene.spacing_mm)))
        cy = int(round(mm2px(scene.board_margin_mm + j * scene.spacing_mm)))
        cv2.circle(tex, (cx, cy), rad, LINE_COLOR.tolist(), -1, cv2.LINE_AA)
    return tex.astype(np.uint8)


@lru_cache(maxsize=4)
def _noise_pool(seed: int, h: int, w: int) -> np.ndarray:
    rng = np.random.default_rng(seed ^ 0x9E3779B9)
    return rng.normal(0.0, 1.0, (h + 96, w + 96)).astype(np.float32)


def _frame_rng(scene: SceneSpec, frame_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array(
        [scene.texture_seed, frame_index], dtype=np.uint64)))


def _stone_rim_mm(x: float, y: float, r: float, z: float, n_pts: int = 20) -> np.ndarray:
    ang = np.linspace(0, 2 * np.pi, n_pts, endpoint=False)
    return np.c_[x + r * np.cos(ang), y + r * np.sin(ang), np.full(n_pts, z)]


def _fill_projected(img: np.ndarray, pts_px: np.ndarray, color, alpha: float = 1.0):
    poly = np.rint(pts_px).astype(np.int32)
    if alpha >= 1.0:
        cv2.fillConvexPoly(img, poly, color, cv2.LINE_AA)
    else:
        overlay = img.copy()
        cv2.fillConvexPoly(overlay, poly, color, cv2.LINE_AA)
        cv2.addWeighted(overlay, alpha, img, 1 - alpha, 0, dst=img)


def render_frame(
    scene: SceneSpec,
    pose: CameraPose,
    board: BoardState | None = None,
    occluders: tuple[Occluder, ...] = (),
    frame_index: int = 0,
) -> tuple[RawFrame, Grid]:
    """Render one frame; returns it with the exact ground-truth grid."""
    board = board or BoardState(scene.board_size)
    if board.size != scene.board_size:
        raise ValueError("board size does not match scene")
    proj, h_mm, cam = _camera_matrices(scene, pose)
    w_img, h_img = scene.frame_width, scene.frame_height
    rng = _frame_rng(scene, frame_index)

    img = np.empty((h_img, w_img, 3), dtype=np.uint8)
    img[:] = TABLE_COLOR.astype(np.uint8)

    # board side faces (only those facing the camera)
    w2 = scene.board_width_mm / 2.0
    t = scene.board_thickness_mm
    corners = [(-w2, -w2), (w2, -w2), (w2, w2), (-w2, w2)]
    normals = [(0, -1), (1, 0), (0, 1), (-1, 0)]
    for a in range(4):
        b = (a + 1) % 4
        mid = 0.5 * (np.array(corners[a]) + np.array(corners[b]))
        if (cam[0] - mid[0]) * normals[a][0] + (cam[1] - mid[1]) * normals[a][1] <= 0:
            continue
        quad = np.array([
            [*corners[a], 0.0], [*corners[b], 0.0],
            [*corners[b], -t], [*corners[a], -t]])
        _fill_projected(img, project_points(proj, quad), SIDE_COLOR.tolist())

    # board top: warp the texture
    tex = _board_texture(scene)
    px_per_mm = tex.shape[0] / scene.board_width_mm
    tex2mm = np.array([[1.0 / px_per_mm, 0, -w2], [0, -1.0 / px_per_mm, w2], [0, 0, 1.0]])
    h_tex = h_mm @ tex2mm
    warped = cv2.warpPerspective(tex, h_tex.astype(np.float64), (w_img, h_img),
                                 flags=cv2.INTER_LINEAR)
    mask = cv2.warpPerspective(np.full(tex.shape[:2], 255, np.uint8),
                               h_tex.astype(np.float64), (w_img, h_img),
                               flags=cv2.INTER_NEAREST)
    img[mask > 0] = warped[mask > 0]

    lat2mm = lattice_to_mm(scene)
    r_st = scene.stone_diameter_mm / 2.0
    z_eq = scene.stone_height_mm / 2.0

    stones = board.stones()
    if stones:
        centers_mm = np.array([(lat2mm @ np.array([i, j, 1.0]))[:2] for i, j in stones])
        # shadows first, then stones far-to-near
        for (x, y) in centers_mm:
            rim = _stone_rim_mm(x + 2.4, y - 1.8, r_st * 0.95, 0.0)
            pts = project_points(proj, rim)
            poly = np.rint(pts).astype(np.int32)
            m = np.zeros((h_img, w_img), np.uint8)
            cv2.fillConvexPoly(m, poly, 1)
            img[m > 0] = (img[m > 0] * 0.55).astype(np.uint8)
        order = np.argsort([project_points(proj, np.array([[x, y, z_eq]]))[0, 1]
                            for x, y in centers_mm])
        for k in order:
            (i, j), (x, y) = stones[k], centers_mm[k]
            srng = np.random.default_rng(scene.texture_seed * 1_000_003 + i * 31 + j)
            color = board.get((i, j))
            if color == BLACK:
                base = np.clip(np.array([40, 40, 44]) + srng.normal(0, 3, 3), 0, 255)
                hi = (120, 120, 124)
            else:
                base = np.clip(np.array([229, 227, 219]) + srng.normal(0, 3, 3), 0, 255)
                hi = (252, 252, 250)
            rim = _stone_rim_mm(x, y, r_st, z_eq)
            _fill_projected(img, project_points(proj, rim), base.tolist())
            hrim = _stone_rim_mm(x - 1.6, y + 1.6, r_st * 0.3, scene.stone_height_mm * 0.85)
            _fill_projected(img, project_points(proj, hrim), hi, alpha=0.8)

    for occ in occluders:
        for poly in occ.polygons:
            cv2.fillPoly(img, [np.rint(poly).astype(np.int32)], occ.fill, cv2.LINE_AA)
        if occ.held is not None:
            hx, hy = occ.held.board_mm
            rim = _stone_rim_mm(hx, hy, r_st, occ.held.height_mm + z_eq)
            col = (45, 45, 48) if occ.held.color == BLACK else (230, 228, 220)
            _fill_projected(img, project_points(proj, rim), col)

    out = img.astype(np.float32)
    if scene.lighting_gradient:
        gx = np.linspace(-0.5, 0.5, w_img, dtype=np.float32)
        gy = np.linspace(-0.5, 0.5, h_img, dtype=np.float32)
        ramp = 1.0 + scene.lighting_gradient * (gx[None, :] * 0.7 + gy[:, None] * 0.3)
        out *= ramp[:, :, None]
    if scene.noise_sigma > 0:
        pool = _noise_pool(scene.texture_seed, h_img, w_img)
        oy, ox = int(rng.integers(0, 96)), int(rng.integers(0, 96))
        out += scene.noise_sigma * pool[oy:oy + h_img, ox:ox + w_img, None]
    frame = RawFrame(np.clip(out, 0, 255).astype(np.uint8), frame_index=frame_index)

    h_lat = h_mm @ lat2mm
    return frame, grid_from_homography(h_lat / h_lat[2, 2], scene.board_size)


# ------------------------------------------------------------ occluder paths

def arm_occluder(
    scene: SceneSpec,
    pose: CameraPose,
    target_mm: tuple[float, float],
    progress: float,
    side: str = "bottom",
    width_px: float = 95.0,
    fill: tuple[int, int, int] = OCCLUDER_FILLS[0],
    held: HeldStone | None = None,
) -> Occluder:
    """An arm entering from a frame edge toward a board point, with a hand blob.

    ``progress`` 0 keeps it off-frame, 1 puts the hand on the target. The path
    passes over the board so intermediate frames disturb the stone detector.
    """
    _, h_mm, _ = _camera_matrices(scene, pose)
    tp = h_mm @ np.array([target_mm[0], target_mm[1], 1.0])
    target_px = tp[:2] / tp[2]
    w_img, h_img = scene.frame_width, scene.frame_height
    anchors = {
        "bottom": np.array([target_px[0] * 0.7 + w_img * 0.15, h_img + 60.0]),
        "top": np.array([target_px[0] * 0.7 + w_img * 0.15, -60.0]),
        "left": np.array([-60.0, target_px[1]]),
        "right": np.array([w_img + 60.0, target_px[1]]),
    }
    base = anchors[side]
    tip = base + progress * (target_px - base)
    d = target_px - base
    nrm = np.hypot(*d)
    if nrm < 1e-6:
        d = np.array([0.0, -1.0])
        nrm = 1.0
    d = d / nrm
    perp = np.array([-d[1], d[0]])
    arm = np.array([
        base + perp * width_px * 0.55,
        base - perp * width_px * 0.55,
        tip - perp * width_px * 0.36,
        tip + perp * width_px * 0.36,
    ])
    ang = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    hand = tip[None, :] + 0.55 * width_px * np.c_[np.cos(ang), np.sin(ang)]
    polys = (arm, hand) if progress > 0.02 else ()
    return Occluder(polys, fill, held=held if progress > 0.5 else None)


def blob_occluder(center_px: tuple[float, float], radius_px: float,
                  fill: tuple[int, int, int] = OCCLUDER_FILLS[2]) -> Occluder:
    ang = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    poly = np.c_[center_px[0] + radius_px * np.cos(ang) * 1.2,
                 center_px[1] + radius_px * np.sin(ang)]
    return Occluder((poly,), fill)


# ------------------------------------------------------- synthetic edge maps

def stone_ring_bits(shape: tuple[int, int], center: tuple[float, float],
                    radius: float, rng: np.random.Generator,
                    coverage: float = 0.85, jitter: float = 0.6,
                    squash: float = 1.0) -> np.ndarray:
    """Edge pixels of a stone outline: a jittered, partially broken ring."""
    bits = np.zeros(shape, dtype=bool)
    n = int(2 * np.pi * radius * 2.2)
    ang = np.linspace(0, 2 * np.pi, n, endpoint=False)
    keep = np.ones(n, dtype=bool)
    n_gaps = rng.integers(1, 4)
    for _ in range(n_gaps):
        g0 = rng.uniform(0, 2 * np.pi)
        glen = rng.uniform(0.3, 1.2) * (1 - coverage) * 2 * np.pi
        da = np.abs((ang - g0 + np.pi) % (2 * np.pi) - np.pi)
        keep &= da > glen / 2
    rr = radius + rng.normal(0, jitter, n)
    xs = center[0] + rr * np.cos(ang)
    ys = center[1] + rr * np.sin(ang) * squash
    xi = np.rint(xs[keep]).astype(int)
    yi = np.rint(ys[keep]).astype(int)
    ok = (xi >= 0) & (xi < shape[1]) & (yi >= 0) & (yi < shape[0])
    bits[yi[ok], xi[ok]] = True
    return bits


def clutter_bits(shape: tuple[int, int], center: tuple[float, float],
                 radius: float, rng: np.random.Generator,
                 target_count_in_annulus: int,
                 inner: float, outer: float) -> np.ndarray:
    """Eyeglasses-like clutter: short random segments and wide arcs, dosed so
    the annulus around ``center`` holds roughly ``target_count_in_annulus``
    set pixels."""
    bits = np.zeros(shape, dtype=bool)
    h, w = shape
    yy_c, xx_c = center[1], center[0]

    def annulus_count() -> int:
        ys, xs = np.nonzero(bits)
        d = np.hypot(xs - xx_c, ys - yy_c)
        return int(((d >= inner) & (d <= outer)).sum())

    guard = 0
    while annulus_count() < target_count_in_annulus and guard < 300:
        guard += 1
        if rng.random() < 0.55:
            # segment crossing the neighborhood
            a = rng.uniform(0, 2 * np.pi)
            cx = xx_c + rng.normal(0, radius)
            cy = yy_c + rng.normal(0, radius)
            length = rng.uniform(radius * 0.8, radius * 3)
            t = np.linspace(-length / 2, length / 2, int(length * 2.2))
            xs = cx + t * np.cos(a)
            ys = cy + t * np.sin(a)
        else:
            # arc about some unrelated far-off center
            ca = rng.uniform(0, 2 * np.pi)
            cr = rng.uniform(radius * 2.2, radius * 5)
            ax = xx_c + cr * np.cos(ca)
            ay = yy_c + cr * np.sin(ca)
            span = rng.uniform(0.4, 1.4)
            a0 = np.arctan2(yy_c - ay, xx_c - ax) + rng.uniform(-0.4, 0.4)
            t = np.linspace(a0 - span / 2, a0 + span / 2, int(cr * span * 2.2))
            xs = ax + cr * np.cos(t)
            ys = ay + cr * np.sin(t)
        xi = np.rint(xs).astype(int)
        yi = np.rint(ys).astype(int)
        ok = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        bits[yi[ok], xi[ok]] = True
    return bits


# ------------------------------------------------------------- game scripts

@dataclass(frozen=True)
class MoveOverride:
    quiet_frames: int | None = None
    approach_frames: int | None = None
    hover_coord: Coord | None = None
    hover_frames: int = 0
    removal_delay_frames: int | None = None
    forget_removal: bool = False


@dataclass(frozen=True)
class FrameTruth:
    frame_index: int
    grid: Grid
    physical: BoardState
    logical: BoardState
    pending: tuple[Coord, ...]
    move_number: int
    disturbed: bool


def script_game(
    sgf_text: str,
    timing: float = 10.0,  # moves per minute
    fps: float = 6.0,
    disturbance: float = 1.2,  # seconds of hand activity per move
    scene: SceneSpec | None = None,
    pose: CameraPose | None = None,
    removal_delay_s: float = 1.2,
    lead_in_frames: int = 8,
    overrides: dict[int, MoveOverride] | None = None,
) -> Iterator[tuple[RawFrame, FrameTruth]]:
    """Frame stream of a whole scripted game with per-frame ground truth.

    Each move gets approach frames (arm sliding in over the board, stone
    visible in hand near the end), the placement, retreat frames, then quiet
    frames; captures stay on the board for the configured delay before a
    removal reach takes them off. Raises SgfInvalid for unparsable records.
    """
    game = sgf_mod.parse_sgf(sgf_text)
    try:
        sgf_mod.replay(game["size"], game["moves"], game["handicap"])
    except Exception as e:
        raise SgfInvalid(f"record does not replay: {e}") from e

    scene = scene or SceneSpec(board_size=game["size"])
    pose = pose or CameraPose()
    if scene.board_size != game["size"]:
        raise SgfInvalid("scene board size does not match the record")
    overrides = overrides or {}
    lat2mm = lattice_to_mm(scene)

    physical = BoardState(scene.board_size)
    logical = BoardState(scene.board_size)
    for c in game["handicap"]:
        physical.set(c, BLACK)
        logical.set(c, BLACK)
    pending: list[tuple[Coord, int]] = []  # (coord, frames until removal starts)
    move_number = 0
    frame_index = 0
    n_app_default = max(2, int(round(disturbance * fps * 0.6)))
    n_ret_default = max(1, int(round(disturbance * fps * 0.4)))
    frames_per_move = max(1, int(round(60.0 / timing * fps)))

    def mm_of(coord: Coord) -> tuple[float, float]:
        v = lat2mm @ np.array([coord[0], coord[1], 1.0])
        return float(v[0]), float(v[1])

    def emit(occluders: tuple[Occluder, ...], disturbed: bool):
        nonlocal frame_index, pending
        frame, grid = render_frame(scene, pose, physical, occluders, frame_index)
        truth = FrameTruth(frame_index, grid, physical.copy(), logical.copy(),
                           tuple(c for c, _ in pending), move_number, disturbed)
        frame_index += 1
        return frame, truth

    def tick_pending():
        """Advance removal timers; take stones off when a timer expires.

        Entries with a negative timer model a player who forgets the removal.
        """
        nonlocal pending
        kept: list[tuple[Coord, int]] = []
        for c, n in pending:
            if n < 0:
                kept.append((c, n))
            elif n <= 1:
                physical.set(c, 0)
            else:
                kept.append((c, n - 1))
        pending = kept

    for _ in range(lead_in_frames):
        yield emit((), False)
        tick_pending()

    for idx, (color, coord) in enumerate(game["moves"]):
        ov = overrides.get(idx, MoveOverride())
        if coord is None:
            move_number += 1
            continue
        n_app = ov.approach_frames if ov.approach_frames is not None else n_app_default
        side = "bottom" if color == BLACK else "right"
        fill = OCCLUDER_FILLS[idx % len(OCCLUDER_FILLS)]
        target_mm = mm_of(ov.hover_coord or coord)

        for s in range(n_app):
            prog = (s + 1) / n_app
            held = HeldStone(target_mm, color, height_mm=6.0) if prog > 0.55 else None
            occ = arm_occluder(scene, pose, target_mm, prog, side, fill=fill, held=held)
            yield emit((occ,), True)
            tick_pending()

        if ov.hover_coord is not None:
            hover = arm_occluder(scene, pose, target_mm, 1.0, side, fill=fill,
                                 held=HeldStone(target_mm, color, height_mm=2.0))
            for _ in range(ov.hover_frames):
                yield emit((hover,), True)
                tick_pending()
            target_mm = mm_of(coord)

        captures = expected_captures(logical, coord, color)
        physical.set(coord, color)
        logical.set(coord, color)
        for c in captures:
            logical.set(c, 0)
        delay = ov.removal_delay_frames if ov.removal_delay_frames is not None \
            else max(1, int(round(removal_delay_s * fps)))
        if not ov.forget_removal:
            pending.extend((c, delay) for c in captures)
        else:
            pending.extend((c, -1) for c in captures)  # never removed
        move_number += 1

        for s in range(n_ret_default):
            prog = 1.0 - (s + 1) / n_ret_default
            occ = arm_occluder(scene, pose, target_mm, prog, side, fill=fill)
            yield emit((occ,), True)
            tick_pending()

        quiet = ov.quiet_frames if ov.quiet_frames is not None \
            else max(0, frames_per_move - n_app - n_ret_default)
        for _ in range(quiet):
            yield emit((), False)
            tick_pending()

    for _ in range(lead_in_frames):
        yield emit((), False)
        tick_pending()
