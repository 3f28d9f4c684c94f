"""Shared configuration: reference boxes, window defaults, frozen constants.

The geometric stage is fixed once per study: curve centers live in a small
box ``U1`` around the origin, radii lie in ``(1 - tau, 1)``, and all curves
are clipped to a window centered at ``b = (1, 0)``.  Every unnamed bound
constant used by the test suite is calibrated once on a fixed-seed corpus
and frozen to ``data/frozen_constants.ini``; tests refuse to run without
that table.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).parent / "data"
FROZEN_CONSTANTS_PATH = DATA_DIR / "frozen_constants.ini"


@dataclass(frozen=True)
class Stage:
    """Geometric stage shared by all modules.

    center_box_halfwidth bounds the curve centers, (1 - tau, 1) the radii,
    and (window_center, window_radius) is the ambient clipping window.
    """

    center_box_halfwidth: float = 0.15
    tau: float = 0.1
    window_center: tuple[float, float] = (1.0, 0.0)
    window_radius: float = 0.25
    # ambient box used for domain checks on evaluation inputs
    domain_lo: tuple[float, float] = (-1.0, -1.5)
    domain_hi: tuple[float, float] = (2.0, 1.5)
    # nesting ratio between successive windows
    shrink_factor: float = 0.5
    # apex exclusion multiple for lifted surfaces, |x - x0| > apex_clip_mult * delta
    apex_clip_mult: float = 4.0
    # incidence fattening and comparability defaults
    c1_incidence: float = 4.0
    c0_comparable: float = 10.0
    # smallness threshold for perturbation C^3 norms
    c3_threshold: float = 0.05

    @property
    def radius_lo(self) -> float:
        return 1.0 - self.tau

    @property
    def radius_hi(self) -> float:
        return 1.0

    def in_domain(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        lo = np.asarray(self.domain_lo)
        hi = np.asarray(self.domain_hi)
        return bool(np.all(p >= lo) and np.all(p <= hi))


STAGE = Stage()


class UnfrozenConstantsError(RuntimeError):
    """Raised when the frozen-constant table is missing or incomplete."""


# every key the calibration run must pin; tests and acceptance refuse to
# start when one is missing
REQUIRED_CONSTANTS = (
    "c_area",
    "c_diameter",
    "c_xi",
    "k_inc",
    "c_census",
    "c_cells",
    "c_crossing",
    "c_kst",
    "c_cluster",
    "c_trivial_bound",
    "c_multiplicity",
    "c_apollonius",
    "c_dist_delta_lo",
    "c_dist_delta_hi",
    "c0_cylinder",
    "c_wstar",
    "calibration_corpus",
    "calibration_seed",
)


@dataclass
class FrozenConstants:
    """Calibrated bound constants, written once by ``circgeom calibrate``."""

    values: dict = field(default_factory=dict)

    def __getattr__(self, name: str) -> float:
        values = object.__getattribute__(self, "values")
        if name in values:
            return values[name]
        raise AttributeError(name)

    def get(self, name: str) -> float:
        try:
            return self.values[name]
        except KeyError:
            raise UnfrozenConstantsError(
                f"constant {name!r} is not frozen; run `circgeom calibrate` first"
            ) from None


def write_frozen_constants(values: dict, path: Path | str = FROZEN_CONSTANTS_PATH) -> Path:
    parser = configparser.ConfigParser()
    parser["constants"] = {k: repr(v) for k, v in values.items()}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        parser.write(fh)
    return path


def load_frozen_constants(path: Path | str = FROZEN_CONSTANTS_PATH) -> FrozenConstants:
    path = Path(path)
    if not path.exists():
        raise UnfrozenConstantsError(
            f"no frozen-constant table at {path}; run `circgeom calibrate` first"
        )
    parser = configparser.ConfigParser()
    parser.read(path)
    raw = dict(parser["constants"]) if parser.has_section("constants") else {}
    values = {}
    for key, text in raw.items():
        try:
            values[key] = float(text)
        except ValueError:
            values[key] = text.strip("'\"")
    missing = [k for k in REQUIRED_CONSTANTS if k not in values]
    if missing:
        raise UnfrozenConstantsError(
            f"frozen-constant table {path} is missing {missing}; rerun `circgeom calibrate`"
        )
    return FrozenConstants(values)
