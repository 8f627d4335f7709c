"""Five-level integration classification driven by per-dimension cut points.

Each dimension's scalar indicator is mapped onto levels 1..5 by four
strictly increasing cuts with lower-inclusive boundaries. The shipped
cuts are illustrative defaults; institutions tune them in the versioned
threshold config file.
"""

from __future__ import annotations

from bisect import bisect_right
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import yaml

from .errors import ConfigError
from .metrics import DIMENSIONS, Dimension, DimensionProfile
from .windows import TimeWindow

THRESHOLDS_SCHEMA = "lmscube/thresholds"

Cuts = tuple[float, float, float, float]


class Level(IntEnum):
    ENTRY = 1
    ADOPTION = 2
    ADAPTATION = 3
    IMMERSION = 4
    TRANSFORMATION = 5

    @property
    def label(self) -> str:
        return self.name.capitalize()


LEVEL_LABELS = tuple(level.label for level in Level)

# Illustrative defaults, institution-tunable via the threshold config file.
# Presence counters (0..4) use [1,2,3,4] so a count of k lands on level k+1.
DEFAULT_CUTS: dict[Dimension, Cuts] = {
    Dimension.DYNAMICS: (1.0, 3.0, 7.0, 20.0),
    Dimension.INFORMATION: (1.0, 2.0, 3.0, 4.0),
    Dimension.SYNCHRONOUS: (0.5, 2.0, 5.0, 10.0),
    Dimension.ASYNCHRONOUS: (10.0, 30.0, 60.0, 85.0),
    Dimension.CONTENT: (1.0, 3.0, 8.0, 15.0),
    Dimension.DELIVERY: (1.0, 2.0, 3.0, 4.0),
    Dimension.EVALUATION: (1.0, 5.0, 15.0, 40.0),
}


@dataclass(frozen=True)
class ThresholdConfig:
    cuts: Mapping[Dimension, Cuts]
    version: int = 1


@dataclass(frozen=True)
class LevelProfile:
    cu_id: str
    window: TimeWindow
    levels: Mapping[Dimension, Level]
    composite: float

    def level_values(self) -> tuple[int, ...]:
        return tuple(int(self.levels[d]) for d in DIMENSIONS)


def default_thresholds() -> ThresholdConfig:
    return ThresholdConfig(cuts=dict(DEFAULT_CUTS))


def validate_thresholds(config: ThresholdConfig) -> list[str]:
    """Every violation in the config, or an empty list when it is sound."""
    problems: list[str] = []
    for dimension in DIMENSIONS:
        cuts = config.cuts.get(dimension)
        if cuts is None:
            problems.append(f"missing dimension: {dimension.value}")
            continue
        if len(cuts) != 4:
            problems.append(f"{dimension.value}: expected 4 cuts, got {len(cuts)}")
            continue
        values = [float(c) for c in cuts]
        if any(v != v or v in (float("inf"), float("-inf")) for v in values):
            problems.append(f"{dimension.value}: cuts must be finite")
            continue
        if any(b <= a for a, b in zip(values, values[1:])):
            problems.append(f"{dimension.value}: cuts not strictly increasing {values}")
            continue
        if values[0] < 0:
            problems.append(f"{dimension.value}: first cut must be >= 0")
    for key in config.cuts:
        if key not in DIMENSIONS:
            problems.append(f"unknown dimension: {key}")
    return problems


def ensure_valid(config: ThresholdConfig) -> ThresholdConfig:
    problems = validate_thresholds(config)
    if problems:
        raise ConfigError("invalid thresholds: " + "; ".join(problems))
    return config


def classify(value: float, cuts: Sequence[float]) -> Level:
    """Map a scalar onto a level; each cut is a lower-inclusive boundary.

    value < c1 is ENTRY, c1 <= value < c2 ADOPTION, and so on up to
    value >= c4 which is TRANSFORMATION.
    """
    if len(cuts) != 4 or any(b <= a for a, b in zip(cuts, list(cuts)[1:])):
        raise ConfigError(f"invalid cuts {list(cuts)!r}")
    return Level(1 + bisect_right(list(cuts), value))


def profile_levels(profile: DimensionProfile, config: ThresholdConfig) -> LevelProfile:
    """Classify every dimension of a profile; no-activity profiles are all ENTRY."""
    ensure_valid(config)
    if profile.no_activity:
        levels = {d: Level.ENTRY for d in DIMENSIONS}
    else:
        levels = {
            d: classify(profile.scalar(d), config.cuts[d]) for d in DIMENSIONS
        }
    return LevelProfile(
        cu_id=profile.cu_id,
        window=profile.window,
        levels=levels,
        composite=composite_score([levels[d] for d in DIMENSIONS]),
    )


def composite_score(levels: Sequence[int]) -> float:
    """Unweighted mean of the seven per-dimension levels, in [1, 5]."""
    if len(levels) != len(DIMENSIONS):
        raise ValueError(f"expected {len(DIMENSIONS)} levels, got {len(levels)}")
    values = [int(v) for v in levels]
    if any(v < 1 or v > 5 for v in values):
        raise ValueError(f"levels must be 1..5, got {values}")
    return sum(values) / len(values)


def load_thresholds(path: Path) -> ThresholdConfig:
    """Load and validate a threshold config file; unversioned files are refused."""
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read thresholds {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: thresholds file must be a mapping")
    if raw.get("schema") != THRESHOLDS_SCHEMA:
        raise ConfigError(f"{path}: expected schema {THRESHOLDS_SCHEMA!r}")
    if "version" not in raw:
        raise ConfigError(f"{path}: refusing unversioned threshold config")
    cuts_raw = raw.get("cuts")
    if not isinstance(cuts_raw, dict):
        raise ConfigError(f"{path}: missing 'cuts' mapping")
    cuts: dict[Dimension, Cuts] = {}
    for key, values in cuts_raw.items():
        try:
            dimension = Dimension(key)
        except ValueError:
            raise ConfigError(f"{path}: unknown dimension {key!r}") from None
        if not isinstance(values, list):
            raise ConfigError(f"{path}: cuts for {key} must be a list")
        cuts[dimension] = tuple(float(v) for v in values)  # type: ignore[assignment]
    config = ThresholdConfig(cuts=cuts, version=int(raw["version"]))
    return ensure_valid(config)


def dump_thresholds(config: ThresholdConfig) -> str:
    doc = {
        "schema": THRESHOLDS_SCHEMA,
        "version": config.version,
        "cuts": {d.value: [float(c) for c in config.cuts[d]] for d in DIMENSIONS},
    }
    return yaml.safe_dump(doc, sort_keys=False)
