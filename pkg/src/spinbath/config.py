"""Run configuration: parsing, validation, presets.

The on-disk format is flat sectioned key-value text (INI-like), chosen for
diff-friendliness; every key is typed and unknown keys are rejected with
their line number. validate_config returns a RunConfig whose `resolved`
mapping carries every value actually used, defaults included, so a manifest
written from it can reproduce the run without consulting any silent
constant.
"""
from __future__ import annotations

import configparser
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .bath import (DotGeometry, NuclearSpecies, PhysicalConstants,
                   bath_components, build_clusters)
from .oracles import SmallBath
from .protocols import make_sequence
from .semiclassical import SemiclassicalConfig

__all__ = [
    "ConfigError",
    "GridAxis",
    "RunConfig",
    "ScalingConfig",
    "validate_config",
    "validate_config_map",
    "validate_scaling_config",
    "list_presets",
    "load_preset",
    "load_run_config",
    "load_scaling_config",
]

_UEV_TO_RAD_S = 1.602176634e-25 / 1.054571817e-34

_MODEL_KINDS = ("uniaxial", "semiclassical", "oracle")
_PROFILES = ("dot", "uniform")
_SPACINGS = ("linear", "log")


class ConfigError(Exception):
    """Validation failure; carries one diagnostic per violation."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))


@dataclass(frozen=True)
class GridAxis:
    lo: float
    hi: float
    steps: int
    spacing: str

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.steps)
        return np.linspace(self.lo, self.hi, self.steps)


class _Checker:
    """Accumulates diagnostics with [section] key (line N) prefixes."""

    def __init__(self, lines_by_key):
        self.diagnostics: list[str] = []
        self._lines = lines_by_key

    def error(self, section: str, key: str | None, message: str):
        where = f"[{section}]" + (f" {key}" if key else "")
        line = self._lines.get((section, key))
        if line is not None:
            where += f" (line {line})"
        self.diagnostics.append(f"{where}: {message}")

    def raise_if_any(self):
        if self.diagnostics:
            raise ConfigError(self.diagnostics)


def _key_lines(text: str) -> dict:
    """(section, key) -> line number map for diagnostics."""
    lines = {}
    section = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        m = re.match(r"\[(.+)\]$", line)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = i
            continue
        if "=" in line and section is not None:
            key = line.split("=", 1)[0].strip()
            lines[(section, key)] = i
    return lines


# --- typed getters ---------------------------------------------------------

def _get_float(check, sec, data, key, default=None, minimum=None, maximum=None,
               strict_min=None):
    raw = data.get(key)
    if raw is None:
        if default is None:
            check.error(sec, key, "required key missing")
            return None
        return default
    try:
        v = float(raw)
    except ValueError:
        check.error(sec, key, f"not a number: {raw!r}")
        return None
    if not math.isfinite(v):
        check.error(sec, key, "must be finite")
        return None
    if minimum is not None and v < minimum:
        check.error(sec, key, f"must be >= {minimum}")
        return None
    if strict_min is not None and v <= strict_min:
        check.error(sec, key, f"must be > {strict_min}")
        return None
    if maximum is not None and v > maximum:
        check.error(sec, key, f"must be <= {maximum}")
        return None
    return v


def _get_int(check, sec, data, key, default=None, minimum=None):
    raw = data.get(key)
    if raw is None:
        if default is None:
            check.error(sec, key, "required key missing")
            return None
        return default
    try:
        v = int(raw)
    except ValueError:
        check.error(sec, key, f"not an integer: {raw!r}")
        return None
    if minimum is not None and v < minimum:
        check.error(sec, key, f"must be >= {minimum}")
        return None
    return v


def _get_bool(check, sec, data, key, default):
    raw = data.get(key)
    if raw is None:
        return default
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    check.error(sec, key, f"not a boolean: {raw!r}")
    return None


def _get_choice(check, sec, data, key, choices, default=None):
    raw = data.get(key)
    if raw is None:
        if default is None:
            check.error(sec, key, f"required key missing (one of {', '.join(choices)})")
            return None
        return default
    if raw not in choices:
        check.error(sec, key, f"{raw!r} is not one of {', '.join(choices)}")
        return None
    return raw


def _reject_unknown(check, sec, data, allowed):
    for key in data:
        if key not in allowed:
            check.error(sec, key, "unknown key")


# --- schemas ---------------------------------------------------------------

_PHYSICS_KEYS = {
    "uniaxial": {"n_clusters", "profile", "polarization_p", "symmetric_dots"},
    "semiclassical": {"B_ext_T", "delta_B_rms_T", "n_clusters", "profile",
                      "outer", "intermediate", "symmetric_dots",
                      "delta_B_correlated"},
    "oracle": {"couplings_rad_per_s", "intermediate_axis"},
}

_SPECIES_KEYS = {"gamma_MHz_per_T", "total_hyperfine_ueV",
                 "total_hyperfine_rad_per_s", "abundance", "spin"}
_GEOMETRY_KEYS = {"z0_nm", "L_nm", "nu0_nm3", "N_total"}
_CONSTANT_KEYS = {"hbar_J_s", "mu_B_J_per_T", "g_electron"}
_EXECUTION_KEYS = {"threads", "seed", "mc_samples"}


@dataclass(frozen=True)
class RunConfig:
    """A fully validated and resolved sweep configuration."""

    kind: str
    t_M: GridAxis
    t_I: GridAxis
    threads: int
    seed: int
    mc_samples: int
    species: tuple[NuclearSpecies, ...]
    geometry: DotGeometry | None
    constants: PhysicalConstants
    physics: dict
    resolved: dict = field(repr=False)
    out_path: str | None = None

    def with_overrides(self, threads: int | None = None,
                       seed: int | None = None) -> "RunConfig":
        """Copy with execution overrides applied (flags/environment)."""
        import dataclasses

        new = dataclasses.replace(
            self, threads=self.threads if threads is None else threads,
            seed=self.seed if seed is None else seed)
        resolved = {sec: dict(kv) for sec, kv in self.resolved.items()}
        resolved["execution"]["threads"] = str(new.threads)
        resolved["execution"]["seed"] = str(new.seed)
        object.__setattr__(new, "resolved", resolved)
        return new

    # -- per-model builders --

    def uniaxial_clusters(self):
        return tuple(build_clusters(self.geometry, self.species,
                                    self.physics["n_clusters"],
                                    profile=self.physics["profile"]))

    def semiclassical_components(self):
        return tuple(bath_components(self.species, self.geometry,
                                     self.physics["n_clusters"],
                                     self.physics["B_ext_T"],
                                     constants=self.constants,
                                     profile=self.physics["profile"]))

    def semiclassical_point(self, components, t_M: float, t_I: float) -> SemiclassicalConfig:
        seq = make_sequence(self.physics["outer"], self.physics["intermediate"], t_M, t_I)
        return SemiclassicalConfig(
            components=components, B_ext=self.physics["B_ext_T"],
            delta_B_rms=self.physics["delta_B_rms_T"], t_M=t_M, t_I=t_I,
            sequence=seq, mc_samples=self.mc_samples, seed=self.seed,
            symmetric_dots=self.physics["symmetric_dots"],
            delta_B_correlated=self.physics["delta_B_correlated"],
            constants=self.constants)

    def oracle_bath(self) -> SmallBath:
        return SmallBath(couplings=self.physics["couplings_rad_per_s"],
                         intermediate_axis=self.physics["intermediate_axis"])


def _parse_sections(text: str):
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"parse error: {exc}"]) from exc
    return {sec: dict(parser.items(sec)) for sec in parser.sections()}


def _parse_grid_axis(check, data, key):
    raw = data.get(key)
    if raw is None:
        check.error("grid", key, "required key missing "
                    "(format: <min> <max> <steps> <linear|log>)")
        return None
    parts = raw.split()
    if len(parts) != 4:
        check.error("grid", key, "expected 4 fields: <min> <max> <steps> <linear|log>")
        return None
    try:
        lo, hi = float(parts[0]), float(parts[1])
        steps = int(parts[2])
    except ValueError:
        check.error("grid", key, f"could not parse {raw!r}")
        return None
    spacing = parts[3]
    if spacing not in _SPACINGS:
        check.error("grid", key, f"spacing must be one of {', '.join(_SPACINGS)}")
        return None
    if steps < 1:
        check.error("grid", key, "steps must be >= 1")
        return None
    if lo > hi:
        check.error("grid", key, "min must be <= max")
        return None
    if lo < 0:
        check.error("grid", key, "times must be >= 0")
        return None
    if spacing == "log" and lo <= 0:
        check.error("grid", key, "log spacing needs min > 0")
        return None
    return GridAxis(lo=lo, hi=hi, steps=steps, spacing=spacing)


def _parse_species(check, sections):
    species = []
    for sec in sorted(s for s in sections if s.startswith("species.")):
        name = sec.split(".", 1)[1]
        data = sections[sec]
        _reject_unknown(check, sec, data, _SPECIES_KEYS)
        gamma_mhz = _get_float(check, sec, data, "gamma_MHz_per_T")
        has_uev = "total_hyperfine_ueV" in data
        has_rad = "total_hyperfine_rad_per_s" in data
        if has_uev and has_rad:
            check.error(sec, None, "give total_hyperfine_ueV or "
                        "total_hyperfine_rad_per_s, not both")
            continue
        if has_uev:
            hyper = _get_float(check, sec, data, "total_hyperfine_ueV", minimum=0.0)
            hyper = None if hyper is None else hyper * _UEV_TO_RAD_S
        elif has_rad:
            hyper = _get_float(check, sec, data, "total_hyperfine_rad_per_s", minimum=0.0)
        else:
            check.error(sec, None, "required key missing: total_hyperfine_ueV "
                        "or total_hyperfine_rad_per_s")
            continue
        abundance = _get_float(check, sec, data, "abundance", minimum=0.0, maximum=1.0)
        spin = _get_float(check, sec, data, "spin", default=0.5, strict_min=0.0)
        if None in (gamma_mhz, hyper, abundance, spin):
            continue
        try:
            species.append(NuclearSpecies(
                name=name, gamma=2 * math.pi * gamma_mhz * 1e6,
                total_hyperfine=hyper, abundance=abundance, spin=spin))
        except ValueError as exc:
            check.error(sec, None, str(exc))
    if species:
        total = sum(s.abundance for s in species)
        if abs(total - 1.0) > 1e-12:
            for sec in sorted(s for s in sections if s.startswith("species.")):
                check.error(sec, "abundance",
                            f"species abundances sum to {total!r}, expected 1")
                break
    return species


def _parse_geometry(check, sections):
    data = sections.get("geometry")
    if data is None:
        return None
    _reject_unknown(check, "geometry", data, _GEOMETRY_KEYS)
    z0 = _get_float(check, "geometry", data, "z0_nm", strict_min=0.0)
    L = _get_float(check, "geometry", data, "L_nm", strict_min=0.0)
    nu0 = _get_float(check, "geometry", data, "nu0_nm3", strict_min=0.0)
    n_total = _get_int(check, "geometry", data, "N_total", minimum=1)
    if None in (z0, L, nu0, n_total):
        return None
    return DotGeometry(z0=z0 * 1e-9, L=L * 1e-9, nu0=nu0 * 1e-27, N_total=n_total)


def _parse_constants(check, sections):
    data = sections.get("constants", {})
    _reject_unknown(check, "constants", data, _CONSTANT_KEYS)
    defaults = PhysicalConstants()
    hbar = _get_float(check, "constants", data, "hbar_J_s",
                      default=defaults.hbar, strict_min=0.0)
    mu_B = _get_float(check, "constants", data, "mu_B_J_per_T",
                      default=defaults.mu_B, strict_min=0.0)
    g = _get_float(check, "constants", data, "g_electron",
                   default=defaults.g_electron)
    if None in (hbar, mu_B, g) or g == 0:
        if g == 0:
            check.error("constants", "g_electron", "must be nonzero")
        return defaults
    return PhysicalConstants(hbar=hbar, mu_B=mu_B, g_electron=g)


def validate_config_map(sections: dict, lines_by_key: dict | None = None) -> RunConfig:
    """Validate a {section: {key: value-string}} map into a RunConfig."""
    check = _Checker(lines_by_key or {})

    known_sections = {"model", "grid", "physics", "geometry", "constants",
                      "execution", "output"}
    for sec in sections:
        if sec not in known_sections and not sec.startswith("species."):
            check.error(sec, None, "unknown section")

    if "model" not in sections:
        check.error("model", None, "required section missing (keys: kind)")
    if "grid" not in sections:
        check.error("grid", None, "required section missing (keys: t_M, t_I)")

    model_data = sections.get("model", {})
    _reject_unknown(check, "model", model_data, {"kind"})
    kind = _get_choice(check, "model", model_data, "kind", _MODEL_KINDS)

    grid_data = sections.get("grid", {})
    _reject_unknown(check, "grid", grid_data, {"t_M", "t_I"})
    t_M = _parse_grid_axis(check, grid_data, "t_M")
    t_I = _parse_grid_axis(check, grid_data, "t_I")

    exec_data = sections.get("execution", {})
    _reject_unknown(check, "execution", exec_data, _EXECUTION_KEYS)
    threads = _get_int(check, "execution", exec_data, "threads", default=1, minimum=1)
    seed = _get_int(check, "execution", exec_data, "seed", default=2024, minimum=0)
    mc_samples = _get_int(check, "execution", exec_data, "mc_samples",
                          default=200, minimum=1)
    if seed is not None and seed >= 2 ** 64:
        check.error("execution", "seed", "must fit in 64 bits")

    out_data = sections.get("output", {})
    _reject_unknown(check, "output", out_data, {"format", "path"})
    _get_choice(check, "output", out_data, "format", ("csv",), default="csv")
    out_path = out_data.get("path")

    species = _parse_species(check, sections)
    geometry = _parse_geometry(check, sections)
    constants = _parse_constants(check, sections)

    physics: dict = {}
    phys_data = sections.get("physics", {})
    if kind is not None:
        _reject_unknown(check, "physics", phys_data, _PHYSICS_KEYS[kind])
        if kind in ("uniaxial", "semiclassical"):
            if not species:
                check.error("physics", None,
                            f"model {kind!r} needs at least one [species.<name>] section")
            if geometry is None:
                check.error("geometry", None,
                            f"model {kind!r} needs a [geometry] section "
                            f"(keys: {', '.join(sorted(_GEOMETRY_KEYS))})")
            default_clusters = 50 if kind == "uniaxial" else 8
            physics["n_clusters"] = _get_int(check, "physics", phys_data,
                                             "n_clusters", default=default_clusters,
                                             minimum=1)
            physics["profile"] = _get_choice(check, "physics", phys_data,
                                             "profile", _PROFILES, default="dot")
            physics["symmetric_dots"] = _get_bool(check, "physics", phys_data,
                                                  "symmetric_dots", True)
            if (kind == "semiclassical" and species and physics["n_clusters"]
                    and len(species) * physics["n_clusters"] > 128):
                check.error("physics", "n_clusters",
                            f"{len(species)} species x {physics['n_clusters']} "
                            f"clusters exceeds the window-matrix dimension cap of 128")
        if kind == "uniaxial":
            physics["polarization_p"] = _get_float(
                check, "physics", phys_data, "polarization_p",
                default=0.5, minimum=0.0, maximum=1.0)
        if kind == "semiclassical":
            physics["B_ext_T"] = _get_float(check, "physics", phys_data,
                                            "B_ext_T", strict_min=0.0)
            physics["delta_B_rms_T"] = _get_float(check, "physics", phys_data,
                                                  "delta_B_rms_T", default=0.0,
                                                  minimum=0.0)
            physics["outer"] = _valid_protocol(check, phys_data, "outer", "SE")
            physics["intermediate"] = _valid_protocol(check, phys_data,
                                                      "intermediate", "SE")
            physics["delta_B_correlated"] = _get_bool(
                check, "physics", phys_data, "delta_B_correlated", False)
        if kind == "oracle":
            raw = phys_data.get("couplings_rad_per_s")
            if raw is None:
                check.error("physics", "couplings_rad_per_s", "required key missing")
            else:
                try:
                    physics["couplings_rad_per_s"] = tuple(float(v) for v in raw.split())
                except ValueError:
                    check.error("physics", "couplings_rad_per_s",
                                f"could not parse {raw!r}")
            physics["intermediate_axis"] = _get_choice(
                check, "physics", phys_data, "intermediate_axis", ("x", "z"),
                default="x")
            if "couplings_rad_per_s" in physics and \
                    len(physics["couplings_rad_per_s"]) > 12:
                check.error("physics", "couplings_rad_per_s",
                            "at most 12 spins are simulable exactly")

    check.raise_if_any()

    resolved = _resolve_map(kind, sections, t_M, t_I, threads, seed, mc_samples,
                            species, geometry, constants, physics)
    return RunConfig(kind=kind, t_M=t_M, t_I=t_I, threads=threads, seed=seed,
                     mc_samples=mc_samples, species=tuple(species),
                     geometry=geometry, constants=constants, physics=physics,
                     resolved=resolved, out_path=out_path)


def _valid_protocol(check, data, key, default):
    raw = data.get(key, default)
    label = raw.strip().upper()
    if label in ("FID", "SE") or re.fullmatch(r"CPMG-\d+", label):
        return label
    check.error("physics", key, f"{raw!r} is not FID, SE or CPMG-<n>")
    return None


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, tuple):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def _resolve_map(kind, sections, t_M, t_I, threads, seed, mc_samples,
                 species, geometry, constants, physics) -> dict:
    """Every value the run will use, as strings.

    Input key/value strings are echoed verbatim (reparsing them takes the
    exact same arithmetic path, so a manifest rerun is bit-identical) and
    every applicable default is materialised alongside them.
    """
    out = {sec: dict(kv) for sec, kv in sections.items()}
    out["model"] = {"kind": kind}
    out.setdefault("grid", {})
    out.setdefault("execution", {})
    out["execution"].setdefault("threads", str(threads))
    out["execution"].setdefault("seed", str(seed))
    out["execution"].setdefault("mc_samples", str(mc_samples))
    out.setdefault("output", {})
    out["output"]["format"] = "csv"
    # path is echoed only if the input set it; the --out flag wins either way
    out.setdefault("constants", {})
    out["constants"].setdefault("hbar_J_s", _fmt(constants.hbar))
    out["constants"].setdefault("mu_B_J_per_T", _fmt(constants.mu_B))
    out["constants"].setdefault("g_electron", _fmt(constants.g_electron))
    for s in species:
        out[f"species.{s.name}"].setdefault("spin", _fmt(s.spin))
    if physics:
        out.setdefault("physics", {})
        for key, value in physics.items():
            if value is not None:
                out["physics"].setdefault(key, _fmt(value))
    return out


def validate_config(text: str) -> RunConfig:
    """Parse and validate sectioned key-value configuration text."""
    sections = _parse_sections(text)
    return validate_config_map(sections, _key_lines(text))


# --- scaling-study configuration -------------------------------------------

@dataclass(frozen=True)
class ScalingConfig:
    N_values: tuple[int, ...]
    species: NuclearSpecies
    geometry: DotGeometry | None
    n_clusters: int
    profile: str
    symmetric_dots: bool
    resolved: dict = field(repr=False)


def validate_scaling_config(text: str) -> ScalingConfig:
    sections = _parse_sections(text)
    check = _Checker(_key_lines(text))
    known = {"scaling", "geometry"}
    for sec in sections:
        if sec not in known and not sec.startswith("species."):
            check.error(sec, None, "unknown section")
    data = sections.get("scaling")
    if data is None:
        check.error("scaling", None, "required section missing (keys: N_values)")
        check.raise_if_any()
    _reject_unknown(check, "scaling", data,
                    {"N_values", "n_clusters", "profile", "symmetric_dots"})
    raw = data.get("N_values")
    n_values: tuple[int, ...] = ()
    if raw is None:
        check.error("scaling", "N_values", "required key missing")
    else:
        try:
            n_values = tuple(int(v) for v in raw.split())
        except ValueError:
            check.error("scaling", "N_values", f"could not parse {raw!r}")
        if len(n_values) < 2:
            check.error("scaling", "N_values", "need at least two bath sizes")
    n_clusters = _get_int(check, "scaling", data, "n_clusters", default=1, minimum=1)
    profile = _get_choice(check, "scaling", data, "profile", _PROFILES,
                          default="uniform")
    symmetric = _get_bool(check, "scaling", data, "symmetric_dots", True)

    species = _parse_species(check, sections)
    if len(species) != 1:
        check.error("scaling", None, "scaling studies use exactly one species")
    geometry = _parse_geometry(check, sections)
    if profile == "dot" and geometry is None:
        check.error("geometry", None, "profile=dot needs a [geometry] section")
    check.raise_if_any()

    resolved = {"scaling": {"N_values": " ".join(str(n) for n in n_values),
                            "n_clusters": str(n_clusters), "profile": profile,
                            "symmetric_dots": _fmt(symmetric)}}
    return ScalingConfig(N_values=n_values, species=species[0], geometry=geometry,
                         n_clusters=n_clusters, profile=profile,
                         symmetric_dots=symmetric, resolved=resolved)


# --- presets ----------------------------------------------------------------

def _preset_dir():
    return resources.files("spinbath") / "presets"


def list_presets() -> list[tuple[str, str]]:
    """(name, one-line description) for every shipped preset."""
    out = []
    for entry in sorted(_preset_dir().iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".cfg"):
            first = entry.read_text().splitlines()[0].lstrip("# ").strip()
            out.append((entry.name[:-4], first))
    return out


def load_preset(name: str) -> str:
    path = _preset_dir() / f"{name}.cfg"
    try:
        return path.read_text()
    except FileNotFoundError:
        known = ", ".join(n for n, _ in list_presets())
        raise ConfigError([f"unknown preset {name!r}; shipped presets: {known}"])


def load_run_config(source: str) -> tuple[str, RunConfig]:
    """Resolve a CLI --config argument to (run name, RunConfig).

    Accepts a path to a config file, a path to a run manifest (JSON; its
    resolved config is revalidated and reused verbatim), or the name of a
    shipped preset.
    """
    import os

    if os.path.exists(source):
        text = open(source, encoding="utf-8").read()
        name = os.path.splitext(os.path.basename(source))[0]
        if text.lstrip().startswith("{"):
            manifest = json.loads(text)
            if "config" not in manifest:
                raise ConfigError([f"{source}: JSON file has no 'config' entry"])
            if name.endswith(".manifest"):
                name = name[: -len(".manifest")]
            return name, validate_config_map(manifest["config"])
        return name, validate_config(text)
    return source, validate_config(load_preset(source))


def load_scaling_config(source: str) -> tuple[str, ScalingConfig]:
    """Like load_run_config, for scaling-study configurations."""
    import os

    if os.path.exists(source):
        name = os.path.splitext(os.path.basename(source))[0]
        return name, validate_scaling_config(open(source, encoding="utf-8").read())
    return source, validate_scaling_config(load_preset(source))
