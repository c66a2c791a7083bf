"""Parameter-grid enumeration, extreme-case filtering and run planning.

The default benchmark grid spans five axes (noise sigma, JPEG quality,
downscale ratio, blur kernel, exposure gamma) with an absent marker on
each.  Multi-extreme combinations are still enumerated and runnable; the
at-most-one-extreme filter is applied when aggregating, not when planning.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .degrade import DegradationParams, KernelParams, parse_angle
from .seeds import SEED_SCHEME, mix_seed

MANIFEST_VERSION = "1"

# Axis names in canonical (outermost-first) enumeration order.
AXIS_NAMES = ("noise_sigma", "jpeg_quality", "downscale_ratio", "kernel", "exposure_gamma")


@dataclass(frozen=True)
class GridAxis:
    """One grid axis: ordered values (None = stage absent) plus extreme flags."""

    values: tuple
    extremes: frozenset = frozenset()

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("grid axis must have at least one value")
        if len(set(self.values)) != len(self.values):
            raise ValueError("grid axis values must be unique")
        if None in self.extremes:
            raise ValueError("the absent marker can never be extreme")
        stray = set(self.extremes) - set(self.values)
        if stray:
            raise ValueError(f"extreme values not on the axis: {sorted(map(str, stray))}")

    def index_of(self, value) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise ValueError(f"value {value!r} is not on this grid axis") from None

    def is_extreme(self, value) -> bool:
        if value not in self.values:
            raise ValueError(f"value {value!r} is not on this grid axis")
        return value in self.extremes


@dataclass(frozen=True)
class ParamGrid:
    """Five named axes, iterated noise-outermost to exposure-innermost."""

    noise_sigma: GridAxis
    jpeg_quality: GridAxis
    downscale_ratio: GridAxis
    kernel: GridAxis
    exposure_gamma: GridAxis

    @property
    def axes(self) -> tuple[tuple[str, GridAxis], ...]:
        return tuple((name, getattr(self, name)) for name in AXIS_NAMES)

    @property
    def n_combinations(self) -> int:
        n = 1
        for _, axis in self.axes:
            n *= len(axis.values)
        return n


def default_grid() -> ParamGrid:
    """The full benchmark grid with its extreme flags."""
    pi = math.pi
    kernels = (
        None,
        KernelParams(1, 1, 0),
        KernelParams(2, 2, 0),
        KernelParams(3, 3, 0),
        KernelParams(1, 3, 0),
        KernelParams(1, 3, pi / 4),
        KernelParams(1, 3, pi / 2),
        KernelParams(1, 3, 3 * pi / 4),
    )
    return ParamGrid(
        noise_sigma=GridAxis((None, 2, 4, 8, 16, 32, 64), frozenset({64})),
        jpeg_quality=GridAxis((None, 64, 32, 16, 8, 4), frozenset({4})),
        downscale_ratio=GridAxis((None, 2, 3, 4, 8), frozenset({8})),
        kernel=GridAxis(kernels, frozenset({KernelParams(3, 3, 0)})),
        exposure_gamma=GridAxis((0.125, 0.25, 0.5, None, 2, 4, 8), frozenset({0.125, 8})),
    )


def params_at(grid: ParamGrid, index: int) -> DegradationParams:
    """Combination index -> parameter tuple (inverse of :func:`index_of`)."""
    if not 0 <= index < grid.n_combinations:
        raise ValueError(f"combination index {index} out of range")
    picks = {}
    rem = index
    for name, axis in reversed(grid.axes):
        rem, i = divmod(rem, len(axis.values))
        picks[name] = axis.values[i]
    return DegradationParams(**picks)


def index_of(grid: ParamGrid, params: DegradationParams) -> int:
    """Parameter tuple -> combination index."""
    index = 0
    for name, axis in grid.axes:
        index = index * len(axis.values) + axis.index_of(getattr(params, name))
    return index


def enumerate_combinations(grid: ParamGrid) -> list[DegradationParams]:
    """Cartesian product over all five axes in stable lexicographic order."""
    return [params_at(grid, i) for i in range(grid.n_combinations)]


def extreme_count(params: DegradationParams, grid: ParamGrid) -> int:
    """Number of axes whose value carries the extreme flag (0-5)."""
    return sum(axis.is_extreme(getattr(params, name)) for name, axis in grid.axes)


def filter_at_most_one_extreme(
    combos: Iterable[DegradationParams], grid: ParamGrid
) -> list[DegradationParams]:
    """Keep combinations with at most one extreme value, order preserved."""
    return [p for p in combos if extreme_count(p, grid) <= 1]


@dataclass(frozen=True)
class ManifestEntry:
    index: int
    params: DegradationParams
    extreme_count: int
    repeats: int
    seeds: tuple[int, ...]


@dataclass(frozen=True)
class SweepManifest:
    """Deterministic run plan: one entry per combination, seeds per repeat."""

    grid: ParamGrid
    global_seed: int
    entries: tuple[ManifestEntry, ...]
    seed_scheme: str = SEED_SCHEME
    version: str = MANIFEST_VERSION
    config_hash: str = field(default="", compare=False)

    @property
    def total_runs(self) -> int:
        return sum(e.repeats for e in self.entries)


NOISE_REPEATS = 5


def plan_runs(grid: ParamGrid, global_seed: int) -> SweepManifest:
    """Build the manifest: 5 seeded repeats when noise is active, else 1."""
    entries = []
    for i in range(grid.n_combinations):
        params = params_at(grid, i)
        repeats = NOISE_REPEATS if params.noise_sigma is not None else 1
        seeds = tuple(mix_seed(global_seed, i, r) for r in range(repeats))
        entries.append(
            ManifestEntry(
                index=i,
                params=params,
                extreme_count=extreme_count(params, grid),
                repeats=repeats,
                seeds=seeds,
            )
        )
    manifest = SweepManifest(grid=grid, global_seed=global_seed, entries=tuple(entries))
    return SweepManifest(
        grid=grid,
        global_seed=global_seed,
        entries=manifest.entries,
        config_hash=_manifest_config_hash(manifest),
    )


# ---------------------------------------------------------------------------
# JSON serialization.  Dumps are canonical (sorted keys, fixed separators)
# so manifests built from the same inputs are byte-identical.
# ---------------------------------------------------------------------------


def _axis_to_json(name: str, axis: GridAxis) -> dict:
    def enc(v):
        if v is None:
            return None
        if name == "kernel":
            return list(v.as_tuple())
        return v

    values = [enc(v) for v in axis.values]
    extremes = [enc(v) for v in axis.values if v in axis.extremes]
    return {"values": values, "extremes": extremes}


def _axis_from_json(name: str, data: dict) -> GridAxis:
    _reject_unknown(data, {"values", "extremes"}, f"grid axis {name!r}")

    def dec(v):
        if v is None:
            return None
        if name == "kernel":
            sx, sy, theta = v
            return KernelParams(float(sx), float(sy), parse_angle(theta))
        if name in ("jpeg_quality", "downscale_ratio"):
            return int(v)
        return float(v)

    return GridAxis(
        values=tuple(dec(v) for v in data["values"]),
        extremes=frozenset(dec(v) for v in data.get("extremes", [])),
    )


def grid_to_json(grid: ParamGrid) -> dict:
    return {name: _axis_to_json(name, axis) for name, axis in grid.axes}


def grid_from_json(data: dict) -> ParamGrid:
    _reject_unknown(data, set(AXIS_NAMES), "grid")
    return ParamGrid(**{name: _axis_from_json(name, data[name]) for name in AXIS_NAMES})


def load_grid(path: str | Path) -> ParamGrid:
    """Read a grid override file (JSON, same schema as the manifest header)."""
    with open(path, "r", encoding="utf-8") as fh:
        return grid_from_json(json.load(fh))


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _manifest_config_hash(manifest: SweepManifest) -> str:
    payload = canonical_json(
        {
            "version": manifest.version,
            "seed_scheme": manifest.seed_scheme,
            "global_seed": manifest.global_seed,
            "grid": grid_to_json(manifest.grid),
        }
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def manifest_to_json(manifest: SweepManifest) -> str:
    header = {
        "version": manifest.version,
        "seed_scheme": manifest.seed_scheme,
        "global_seed": manifest.global_seed,
        "grid": grid_to_json(manifest.grid),
        "config_hash": manifest.config_hash or _manifest_config_hash(manifest),
    }
    entries = [
        {
            "index": e.index,
            "params": e.params.to_dict(),
            "extreme_count": e.extreme_count,
            "repeats": e.repeats,
            "seeds": list(e.seeds),
        }
        for e in manifest.entries
    ]
    return canonical_json({"header": header, "entries": entries})


def manifest_from_json(text: str) -> SweepManifest:
    data = json.loads(text)
    _reject_unknown(data, {"header", "entries"}, "manifest")
    header = data["header"]
    _reject_unknown(
        header, {"version", "seed_scheme", "global_seed", "grid", "config_hash"}, "manifest header"
    )
    if header["version"] != MANIFEST_VERSION:
        raise ValueError(f"unsupported manifest version {header['version']!r}")
    grid = grid_from_json(header["grid"])
    entries = []
    for raw in data["entries"]:
        _reject_unknown(raw, {"index", "params", "extreme_count", "repeats", "seeds"}, "manifest entry")
        entries.append(
            ManifestEntry(
                index=raw["index"],
                params=DegradationParams.from_dict(raw["params"]),
                extreme_count=raw["extreme_count"],
                repeats=raw["repeats"],
                seeds=tuple(raw["seeds"]),
            )
        )
    return SweepManifest(
        grid=grid,
        global_seed=header["global_seed"],
        entries=tuple(entries),
        seed_scheme=header["seed_scheme"],
        config_hash=header["config_hash"],
    )


def save_manifest(manifest: SweepManifest, path: str | Path) -> None:
    Path(path).write_text(manifest_to_json(manifest), encoding="utf-8")


def load_manifest(path: str | Path) -> SweepManifest:
    return manifest_from_json(Path(path).read_text(encoding="utf-8"))


def manifest_file_hash(path: str | Path) -> str:
    """Hash of the manifest file bytes, used to guard run resumption."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _reject_unknown(data: dict, allowed: set[str], where: str) -> None:
    if not isinstance(data, dict):
        raise ValueError(f"{where}: expected a JSON object")
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"{where}: unknown fields {sorted(unknown)}")
