"""Pipeline configuration: every tunable threshold in one place.

Configs load from flat ``key = value`` text files; unknown keys are rejected
so typos surface immediately.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


@dataclass
class PipelineConfig:
    # preprocessing
    dog_radius: float = 5.0
    dog_sigma_narrow: float = 1.0
    dog_sigma_wide: float = 2.0
    dog_threshold: float = 4.0
    canny_low_ratio: float = 0.5
    resolution_cap: int = 2_100_000

    # grid location
    hough_rho_res: float = 1.0
    hough_theta_res_deg: float = 0.5
    max_lines: int = 100
    pencil_tolerance_px: float = 2.5
    pencil_min_members: int = 5
    spacing_tolerance: float = 0.2
    border_evidence_threshold: float = 0.4
    locate_budget_ms: float = 300.0

    # grid tracking
    corner_accept_threshold: float = 0.5
    template_side_factor: float = 2.0
    search_radius_factor: float = 1.0
    band_halfwidth_px: float = 3.0
    displacement_cap_factor: float = 0.25
    relocate_cadence: int = 30
    track_budget_ms: float = 20.0

    # stone detection
    stone_spacing_ratio: float = 1.0
    search_side_factor: float = 0.5
    corona_inner_factor: float = 0.8
    corona_outer_factor: float = 1.2
    dark_threshold_factor: float = 0.35
    color_hysteresis: float = 0.10
    stone_height_ratio: float = 0.45

    # vacancy
    vacancy_required: int = 6
    sigma_floor_ratio: float = 0.01

    # sequencing
    t_stab: float = 0.75
    stability_min: int = 3
    stability_max: int = 6
    stale_removal_timeout_s: float = 30.0
    handicap: int = 0

    # session
    nominal_fps: float = 6.0
    board_size_hint: int = 19

    def validated(self) -> "PipelineConfig":
        if not self.dog_sigma_narrow < self.dog_sigma_wide:
            raise ValueError("dog_sigma_narrow must be < dog_sigma_wide")
        if not 0.5 <= self.t_stab <= 1.0:
            raise ValueError("t_stab must lie in [0.5, 1.0]")
        if self.vacancy_required not in (5, 6):
            raise ValueError("vacancy_required must be 5 or 6")
        if not self.corona_inner_factor < self.corona_outer_factor:
            raise ValueError("corona inner factor must be < outer factor")
        if self.board_size_hint not in (9, 13, 19):
            raise ValueError("board_size_hint must be one of 9, 13, 19")
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def load_config(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    cfg = dataclasses.replace(base) if base else PipelineConfig()
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        typ = _FIELDS[key].type
        if typ in ("int", int):
            parsed: object = int(val)
        elif typ in ("float", float):
            parsed = float(val)
        else:
            parsed = val
        setattr(cfg, key, parsed)
    return cfg.validated()


def save_config(cfg: PipelineConfig, path: str | Path) -> None:
    lines = [f"{f.name} = {getattr(cfg, f.name)}" for f in dataclasses.fields(PipelineConfig)]
    Path(path).write_text("\n".join(lines) + "\n")
