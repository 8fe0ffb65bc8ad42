"""Manhattan-grid scenario: lamppost candidate sites, macro BS and radio constants."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .errors import InvalidConfigError


@dataclass(frozen=True)
class RadioParams:
    """Radio constants of the mmWave IAB network.

    Defaults are the 73 GHz values used for the lamppost study. Transmit
    power is per resource block.
    """

    carrier_frequency_hz: float = 73e9
    rb_bandwidth_hz: float = 2e6
    per_rb_tx_power_w: float = 0.1
    noise_psd_dbm_per_hz: float = -174.0
    se_max_bps_per_hz: float = 4.8
    main_lobe_gain_db: float = 20.0
    los_exponent: float = 2.0
    nlos_exponent: float = 3.0
    pathloss_threshold_db: float = 150.0
    # Apply SE_max to access links too (off: access rates are uncapped).
    cap_access_se: bool = False

    def __post_init__(self):
        for name in ("carrier_frequency_hz", "rb_bandwidth_hz", "per_rb_tx_power_w",
                     "se_max_bps_per_hz", "los_exponent", "nlos_exponent"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidConfigError(f"{name} must be positive and finite, got {value!r}")
        if self.nlos_exponent < self.los_exponent:
            raise InvalidConfigError("nlos_exponent must be >= los_exponent")
        if not math.isfinite(self.noise_psd_dbm_per_hz):
            raise InvalidConfigError("noise_psd_dbm_per_hz must be finite")
        if not (self.pathloss_threshold_db >= 0 and math.isfinite(self.pathloss_threshold_db)):
            raise InvalidConfigError("pathloss_threshold_db must be a non-negative finite number")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RadioParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfigError(f"unknown radio keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class Site:
    id: int
    x_m: float
    y_m: float

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x_m, self.y_m)


@dataclass(frozen=True)
class Scenario:
    sites: tuple[Site, ...]
    macro_bs: tuple[float, float] = (0.0, 0.0)
    access_cell_radius_m: float = 25.0
    radio: RadioParams = field(default_factory=RadioParams)

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        object.__setattr__(self, "macro_bs", (float(self.macro_bs[0]), float(self.macro_bs[1])))
        ids = [s.id for s in self.sites]
        if sorted(ids) != list(range(len(ids))):
            raise InvalidConfigError("site ids must be unique and dense in [0, |V|)")
        if ids != sorted(ids):
            raise InvalidConfigError("sites must be listed in id order")
        if not (self.access_cell_radius_m > 0):
            raise InvalidConfigError("access_cell_radius_m must be positive")
        seen = set()
        for s in self.sites:
            if s.xy == self.macro_bs:
                raise InvalidConfigError(f"site {s.id} coincides with the macro BS")
            if s.xy in seen:
                raise InvalidConfigError(f"site {s.id} duplicates the position of another site")
            seen.add(s.xy)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def mbs_id(self) -> int:
        """Node id of the macro BS in topologies built from this scenario."""
        return len(self.sites)

    def node_xy(self, node: int) -> tuple[float, float]:
        if node == self.mbs_id:
            return self.macro_bs
        return self.sites[node].xy

    def to_dict(self) -> dict[str, Any]:
        return {
            "sites": [{"id": s.id, "x_m": s.x_m, "y_m": s.y_m} for s in self.sites],
            "macro_bs": {"x_m": self.macro_bs[0], "y_m": self.macro_bs[1]},
            "radio": asdict(self.radio),
            "access_cell_radius_m": self.access_cell_radius_m,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Scenario":
        try:
            sites = tuple(Site(int(s["id"]), float(s["x_m"]), float(s["y_m"]))
                          for s in data["sites"])
            mbs = data.get("macro_bs", {"x_m": 0.0, "y_m": 0.0})
            return cls(
                sites=tuple(sorted(sites, key=lambda s: s.id)),
                macro_bs=(float(mbs["x_m"]), float(mbs["y_m"])),
                access_cell_radius_m=float(data.get("access_cell_radius_m", 25.0)),
                radio=RadioParams.from_dict(data.get("radio", {})),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidConfigError(f"malformed scenario: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        return cls.from_dict(json.loads(Path(path).read_text()))


def euclidean_distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def build_manhattan_grid(side_m: float = 250.0, spacing_m: float = 50.0,
                         radio: RadioParams | None = None,
                         access_cell_radius_m: float = 25.0,
                         anchor: str = "center") -> Scenario:
    """Lamppost lattice over a square map with the macro BS at the origin.

    ``anchor="center"`` puts sites at cell centres (``spacing/2 + k*spacing``),
    which gives 25 sites for a 250 m map at 50 m spacing. ``anchor="corner"``
    uses the inclusive ``0..side`` lattice and drops the origin point.
    Sites are numbered row-major: by y, then x.
    """
    if not (side_m > 0 and spacing_m > 0):
        raise InvalidConfigError("side_m and spacing_m must be positive")
    ratio = side_m / spacing_m
    cells = round(ratio)
    if cells < 1 or abs(ratio - cells) > 1e-9 * max(1.0, ratio):
        raise InvalidConfigError("spacing_m must divide side_m into an integer lattice")
    if anchor == "center":
        coords = [spacing_m / 2 + k * spacing_m for k in range(cells)]
    elif anchor == "corner":
        coords = [k * spacing_m for k in range(cells + 1)]
    else:
        raise InvalidConfigError(f"unknown anchor {anchor!r}")

    points = [(x, y) for y in coords for x in coords if (x, y) != (0.0, 0.0)]
    sites = tuple(Site(i, float(x), float(y)) for i, (x, y) in enumerate(points))
    return Scenario(sites=sites, macro_bs=(0.0, 0.0),
                    access_cell_radius_m=access_cell_radius_m,
                    radio=radio if radio is not None else RadioParams())
