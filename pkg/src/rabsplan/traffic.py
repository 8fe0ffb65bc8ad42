"""Lognormal spatial traffic demands, one independent draw per candidate site."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidConfigError
from .scenario import Scenario

# Default per-site mean demand; not published with the lamppost study.
DEFAULT_MU_BPS = 1.5e8


@dataclass(frozen=True)
class TrafficModel:
    mu_bps: float = DEFAULT_MU_BPS
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (self.mu_bps > 0 and math.isfinite(self.mu_bps)):
            raise InvalidConfigError("mu_bps must be positive")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise InvalidConfigError("sigma must be non-negative")
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidConfigError("seed must be a 64-bit unsigned integer")

    @property
    def log_location(self) -> float:
        # Location of ln(D): mean mu in linear scale.
        return math.log(self.mu_bps) - 0.5 * self.sigma ** 2


@dataclass(frozen=True)
class DemandVector:
    demands_bps: dict[int, float]

    def as_array(self, n_sites: int | None = None) -> np.ndarray:
        n = len(self.demands_bps) if n_sites is None else n_sites
        return np.array([self.demands_bps[i] for i in range(n)], dtype=float)

    @classmethod
    def from_array(cls, values: Iterable[float]) -> "DemandVector":
        return cls({i: float(v) for i, v in enumerate(values)})

    def to_json(self) -> str:
        return json.dumps({str(k): v for k, v in sorted(self.demands_bps.items())}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DemandVector":
        return cls({int(k): float(v) for k, v in json.loads(text).items()})

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["site_id", "demand_mbps"])
        for k, v in sorted(self.demands_bps.items()):
            writer.writerow([k, repr(v / 1e6)])
        return buf.getvalue()


def standard_normals(seed: int, site_ids: Iterable[int]) -> np.ndarray:
    """One N(0, 1) draw per site id from a stream keyed on ``(seed, site_id)``.

    The value for a given id does not depend on which other ids are drawn.
    """
    return np.array([
        np.random.default_rng(np.random.SeedSequence([int(seed), int(i)])).standard_normal()
        for i in site_ids
    ], dtype=float)


def lognormal_draws(model: TrafficModel, site_ids: Iterable[int]) -> np.ndarray:
    z = standard_normals(model.seed, site_ids)
    if model.sigma == 0:
        return np.full(z.shape, float(model.mu_bps))
    return np.exp(model.log_location + model.sigma * z)


def sample_demands(model: TrafficModel, scenario: Scenario) -> DemandVector:
    if scenario.n_sites == 0:
        raise InvalidConfigError("scenario has no candidate sites")
    ids = [s.id for s in scenario.sites]
    return DemandVector(dict(zip(ids, lognormal_draws(model, ids).tolist())))
