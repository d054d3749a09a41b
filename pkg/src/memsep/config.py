"""Experiment configuration files.

Line-oriented "key = value" files with section headers; see
``config_reference.txt`` (bundled, printable via ``reference_text``) for all
keys.  Parsing is strict: unknown sections or keys raise ``ConfigError`` so
typos cannot silently change an experiment.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import geometry
from .domain_functions import make_membrane_function, make_smooth
from .errors import ConfigError
from .profiles import ConstantProfile, CosineProfile, StepProfile

COMMANDS = ("rates", "spectrum", "generator-convergence", "hydro", "qv",
            "uniqueness")

_KNOWN_KEYS = {
    "experiment": {"kind"},
    "membrane": {"kind", "center", "radius", "semi_axes", "left", "right",
                 "band_width"},
    "lattice": {"dimension", "sizes"},
    "profile": {"kind", "value", "axis", "split", "left", "right", "base",
                "amplitude"},
    "test_function": {"kind", "modes", "lambda", "eps"},
    "run": {"time", "replicas", "trajectories", "grid_points",
            "spectrum_count"},
    "output": {"directory", "dump_rates"},
}


def reference_text() -> str:
    """The bundled documentation of every config key."""
    return (resources.files("memsep") / "config_reference.txt").read_text()


@dataclass
class ExperimentConfig:
    """Validated experiment description (all catalogue names resolved)."""

    kind: str | None
    dimension: int
    sizes: list[int]
    membrane_kind: str
    membrane_params: dict
    profile_spec: dict | None
    test_function_spec: dict | None
    time: float
    replicas: int
    trajectories: int
    grid_points: int
    spectrum_count: int
    outdir: str
    dump_rates: bool
    text: str = field(repr=False, default="")

    def membrane(self):
        """Build the configured membrane, or None for the homogeneous case."""
        p = self.membrane_params
        if self.membrane_kind == "none":
            return None
        if self.membrane_kind in ("circle", "ball"):
            return geometry.ball(p["center"], p["radius"], p.get("band_width"))
        if self.membrane_kind in ("ellipse", "ellipsoid"):
            return geometry.ellipsoid(p["center"], p["semi_axes"],
                                      p.get("band_width"))
        if self.membrane_kind == "interval":
            return geometry.interval(p["left"], p["right"],
                                     p.get("band_width"))
        raise ConfigError(f"unknown membrane kind {self.membrane_kind!r}")

    def profile(self):
        spec = self.profile_spec
        if spec is None:
            raise ConfigError("this experiment requires a [profile] section")
        kind = spec["kind"]
        if kind == "constant":
            return ConstantProfile(spec.get("value", 0.5))
        if kind == "step":
            return StepProfile(spec.get("axis", 0), spec.get("split", 0.5),
                               spec.get("left", 1.0), spec.get("right", 0.0))
        if kind == "cosine":
            return CosineProfile(spec.get("axis", 0), spec.get("base", 0.5),
                                 spec.get("amplitude", 0.25))
        raise ConfigError(f"unknown profile kind {kind!r}")

    def test_function(self, membrane=None):
        spec = self.test_function_spec
        if spec is None:
            raise ConfigError("this experiment requires a [test_function] "
                              "section")
        if spec["kind"] == "smooth":
            return make_smooth(spec["modes"])
        if spec["kind"] == "membrane_jump":
            if membrane is None:
                raise ConfigError("membrane_jump test function requires a "
                                  "membrane (kind != none)")
            return make_membrane_function(membrane, spec["lambda"],
                                          spec.get("eps"))
        raise ConfigError(f"unknown test function kind {spec['kind']!r}")


def _floats(text):
    return [float(tok) for tok in text.split()]


def _parse_modes(text, dim):
    modes = []
    for tok in text.split():
        parts = tok.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad mode {tok!r}; expected trig:k1,..,kd:coef")
        trig, kvec, coef = parts
        if trig not in ("cos", "sin"):
            raise ConfigError(f"bad mode kind {trig!r}")
        k = [int(x) for x in kvec.split(",")]
        if len(k) != dim:
            raise ConfigError(f"mode {tok!r} has a {len(k)}-dimensional "
                              f"wavevector on a {dim}-dimensional lattice")
        modes.append((trig, k, float(coef)))
    if not modes:
        raise ConfigError("test_function.modes is empty")
    return modes


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")

    def get(section, key, default=None):
        if parser.has_option(section, key):
            return parser.get(section, key).strip()
        return default

    kind = get("experiment", "kind")
    if kind is not None and kind not in COMMANDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")

    if not parser.has_section("lattice"):
        raise ConfigError("a [lattice] section is required")
    dimension = int(get("lattice", "dimension", "2"))
    if dimension not in (1, 2, 3):
        raise ConfigError("lattice dimension must be 1, 2 or 3")
    sizes = [int(tok) for tok in get("lattice", "sizes", "").split()]
    if not sizes:
        raise ConfigError("lattice.sizes must list at least one N")
    if any(N < 4 for N in sizes):
        raise ConfigError("every lattice size must be at least 4")

    membrane_kind = get("membrane", "kind", "none")
    params = {}
    if membrane_kind in ("circle", "ball"):
        params["center"] = _floats(get("membrane", "center",
                                       " ".join(["0.5"] * dimension)))
        params["radius"] = float(get("membrane", "radius", "0.25"))
    elif membrane_kind in ("ellipse", "ellipsoid"):
        params["center"] = _floats(get("membrane", "center",
                                       " ".join(["0.5"] * dimension)))
        semi = get("membrane", "semi_axes")
        if semi is None:
            raise ConfigError("ellipse membrane requires semi_axes")
        params["semi_axes"] = _floats(semi)
    elif membrane_kind == "interval":
        if dimension != 1:
            raise ConfigError("interval membrane requires dimension 1")
        params["left"] = float(get("membrane", "left", "0.25"))
        params["right"] = float(get("membrane", "right", "0.75"))
    elif membrane_kind != "none":
        raise ConfigError(f"unknown membrane kind {membrane_kind!r}")
    bw = get("membrane", "band_width")
    if bw is not None:
        params["band_width"] = float(bw)
    if membrane_kind in ("circle", "ball", "ellipse", "ellipsoid"):
        if len(params["center"]) != dimension:
            raise ConfigError("membrane center has wrong dimension")
        if "semi_axes" in params and len(params["semi_axes"]) != dimension:
            raise ConfigError("membrane semi_axes has wrong dimension")

    profile_spec = None
    if parser.has_section("profile"):
        profile_spec = {"kind": get("profile", "kind", "constant")}
        for key, cast in (("value", float), ("axis", int), ("split", float),
                          ("left", float), ("right", float), ("base", float),
                          ("amplitude", float)):
            val = get("profile", key)
            if val is not None:
                profile_spec[key] = cast(val)

    tf_spec = None
    if parser.has_section("test_function"):
        tf_kind = get("test_function", "kind", "smooth")
        tf_spec = {"kind": tf_kind}
        if tf_kind == "smooth":
            modes = get("test_function", "modes")
            if modes is None:
                raise ConfigError("smooth test function requires modes")
            tf_spec["modes"] = _parse_modes(modes, dimension)
        elif tf_kind == "membrane_jump":
            tf_spec["lambda"] = float(get("test_function", "lambda", "1.0"))
            eps = get("test_function", "eps")
            tf_spec["eps"] = float(eps) if eps is not None else None
        else:
            raise ConfigError(f"unknown test function kind {tf_kind!r}")

    time = float(get("run", "time", "0.0"))
    if time < 0:
        raise ConfigError("run.time must be nonnegative")
    replicas = int(get("run", "replicas", "0"))
    trajectories = int(get("run", "trajectories", "0"))
    grid_points = int(get("run", "grid_points", "11"))
    if grid_points < 2:
        raise ConfigError("run.grid_points must be at least 2")
    spectrum_count = int(get("run", "spectrum_count", "0"))

    cfg = ExperimentConfig(
        kind=kind, dimension=dimension, sizes=sizes,
        membrane_kind=membrane_kind, membrane_params=params,
        profile_spec=profile_spec, test_function_spec=tf_spec,
        time=time, replicas=replicas, trajectories=trajectories,
        grid_points=grid_points, spectrum_count=spectrum_count,
        outdir=get("output", "directory", "out"),
        dump_rates=(get("output", "dump_rates", "false").lower()
                    in ("1", "true", "yes")),
        text=text)

    # fail fast on unresolvable catalogue names
    membrane = cfg.membrane()
    if membrane is not None and membrane.dim != dimension:
        raise ConfigError("membrane dimension does not match lattice")
    if profile_spec is not None:
        cfg.profile()
    if tf_spec is not None and tf_spec["kind"] == "smooth":
        cfg.test_function()
    return cfg
