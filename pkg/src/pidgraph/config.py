"""Pipeline configuration: every tunable in one place, JSON-loadable.

Flags and config files both funnel into PipelineConfig; unknown keys are
rejected so typos fail loudly.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .codes import DEFAULT_GRAMMAR

ENV_CONFIG_VAR = "PID_GRAPH_CONFIG"


@dataclass(frozen=True)
class PipelineConfig:
    # codes
    grammar: str = DEFAULT_GRAMMAR
    blob_min_area: int = 15
    blob_max_area: int = 2000
    blob_max_height: int = 40
    blob_merge_gap: int = 10
    # tags
    rdp_epsilon_frac: float = 0.02
    tag_probe_kernel: int = 21
    apex_attachment_is_outlet: bool = True
    # lines
    hough_rho: float = 1.0
    hough_theta_deg: float = 1.0
    hough_votes: int = 80
    hough_min_line_length: float = 50.0
    hough_max_line_gap: float = 4.0
    merge_angle_tol: float = 1.5
    merge_gap_tol: float = 5.0
    merge_offset_tol: float = 2.0
    junction_kernel: int = 21
    # symbols
    template_threshold: float = 0.8
    template_nms_iou: float = 0.3
    template_dir: Optional[str] = None    # None = built-in library
    # flow
    tag_max_dist: float = 30.0
    code_max_dist: float = 30.0
    symbol_max_gap: float = 20.0

    def hough_params(self):
        from .lines import HoughParams

        return HoughParams(
            rho_resolution=self.hough_rho,
            theta_resolution=self.hough_theta_deg,
            votes_threshold=self.hough_votes,
            min_line_length=self.hough_min_line_length,
            max_line_gap=self.hough_max_line_gap,
        )


def config_from_dict(doc: dict, base: Optional[PipelineConfig] = None) -> PipelineConfig:
    base = base or PipelineConfig()
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return replace(base, **doc)


def load_config(path: Optional[str] = None) -> PipelineConfig:
    """Config resolution: explicit path, else $PID_GRAPH_CONFIG, else defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG_VAR)
    if not path:
        return PipelineConfig()
    return config_from_dict(json.loads(Path(path).read_text()))


def save_config(config: PipelineConfig, path) -> None:
    Path(path).write_text(json.dumps(asdict(config), indent=2) + "\n")
