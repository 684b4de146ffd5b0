"""Stored empirical constants for the n >= 2 exploration guarantee.

The conservative theory constants certify the guarantee but sit far below
Monte-Carlo resolution for n >= 2, so the quantitative check uses two
empirically fitted constants instead:

  c_gap   gap multiplier in the event {|f - g| > c_gap * max(eps, f)},
  c_prob  probability constant; the pass threshold on the event mass is
          c_prob / (n^3 * ln(1 + n/eps)).

They are fitted once on a fixed instance corpus (demos/run_calibration.py)
and frozen under convexplore/data/; `load_calibration` reads the artifact.
The fitting helpers live here so the recorded numbers can be reproduced.
"""
from __future__ import annotations

import json
import math
from importlib import resources
from typing import Mapping, Sequence

from .errors import ConfigError

# Smallest worst-case event mass still resolvable with ~2e4 samples.
MASS_FLOOR = 0.02


def threshold_from(c_prob: float, n: int, eps: float) -> float:
    """Pass threshold on the event mass implied by a fitted c_prob."""
    return c_prob / (n ** 3 * math.log(1.0 + n / eps))


def fit_constants(masses_by_gap: Mapping[float, Sequence[float]],
                  n: int, eps: float,
                  floor: float = MASS_FLOOR) -> tuple[float, float]:
    """Pick (c_gap, c_prob) from per-instance event masses.

    `masses_by_gap` maps each candidate gap multiplier to the event masses it
    produced on the calibration corpus. The largest multiplier whose worst
    instance stays above `floor` wins; c_prob is then set so the threshold
    equals half that worst mass, leaving a factor-2 margin for fresh
    instances drawn from the same family.
    """
    for c_gap in sorted(masses_by_gap, reverse=True):
        worst = min(masses_by_gap[c_gap])
        if worst > floor:
            c_prob = 0.5 * worst * n ** 3 * math.log(1.0 + n / eps)
            return c_gap, c_prob
    raise ConfigError(
        "no candidate gap multiplier kept a measurable event mass; "
        "widen the grid or increase the sample budget"
    )


def load_calibration(n: int) -> dict:
    """Read the frozen calibration artifact for dimension n."""
    path = resources.files("convexplore").joinpath(
        "data", f"calibration_n{n}.json")
    if not path.is_file():
        raise ConfigError(f"no stored calibration for dimension {n}")
    return json.loads(path.read_text())
