"""
Groupoid-dim 설정 모듈
"""

import os
from pathlib import Path
from typing import Optional


CAP_ENV_VAR = "GROUPOID_DIM_CAP"
OUTPUT_ENV_VAR = "GROUPOID_DIM_OUTPUT"

# 기본 상한값
DEFAULT_CYCLE_CAP = 10_000
DEFAULT_ORBIT_CAP = 10_000
DEFAULT_CLOSURE_CAP = 10_000

# element universe: lags offset + m*modulus for |m| <= LAG_WINDOW
LAG_WINDOW = 3

DEFAULT_SEED = 20240607
NUMERIC_RETRIES = 8

# 수치 허용오차
EIGEN_CLUSTER_TOL = 1e-8
INTEGER_ROUND_TOL = 1e-6
INEQUALITY_SLACK = 1e-9
STAR_IDENTITY_TOL = 1e-10
FLOAT_COCYCLE_TOL = 1e-12

# dad search: exhaustive partitions up to this many units, hill-climb beyond
EXHAUSTIVE_UNIT_LIMIT = 10
HILL_CLIMB_STEPS = 400

# unfurl verification samples finite paths up to this length
BISECTION_SAMPLE_LENGTH = 2
BISECTION_SAMPLE_PAIRS = 40

OUTPUT_DIR = Path(__file__).parent.parent / "output"


def resolve_cap(default: int, explicit: Optional[int] = None) -> int:
    """Cap in force: explicit argument, else GROUPOID_DIM_CAP, else default."""
    if explicit is not None:
        return explicit
    raw = os.environ.get(CAP_ENV_VAR, "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError:
            return default
        if value > 0:
            return value
    return default


def output_dir() -> Path:
    raw = os.environ.get(OUTPUT_ENV_VAR, "").strip()
    return Path(raw) if raw else OUTPUT_DIR
