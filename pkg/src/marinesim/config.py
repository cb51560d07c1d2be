"""Scenario files: TOML in, fully resolved numeric config out.

A scenario names a craft, controller gains, a reference, an initial state,
integration settings and the experiments to run.  ``resolve`` fills every
default and expands presets, so the echo printed by ``marinesim describe``
is itself a valid scenario that resolves to the same text.
"""
import difflib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import tomli
import tomli_w

from . import control as ctl
from . import geometry as geo
from . import references as refs
from . import vessel as vsl
from .errors import ConfigError
from .sim import SimConfig

EXPERIMENTS = ("track_body", "track_inertial", "contraction", "passivity",
               "equivalence", "rates", "invariants")

PRESETS = {"uuv_open_frame": vsl.uuv_open_frame}

_DEFAULTS = {
    "sim": {"h": 1e-3, "t_end": 60.0, "integrator": "rk4", "record_every": 100},
    "contraction": {"frame": "body", "horizon": 30.0, "record_every": 10},
    "passivity": {"frame": "body", "horizon": 30.0, "eps": 1e-6, "record_every": 10,
                  "input": "none", "amplitude": None, "period": 5.0},
    "equivalence": {"horizon": 10.0, "amplitude": None, "period": 4.0},
    "invariants": {"samples": 1000},
}


class UnknownScenario(ConfigError):
    def __init__(self, name, suggestions):
        hint = f"; did you mean: {', '.join(suggestions)}" if suggestions else ""
        super().__init__(f"unknown scenario {name!r}{hint}")
        self.name = name
        self.suggestions = suggestions


def _bundled_dir():
    return resources.files("marinesim") / "scenarios"


def list_scenarios():
    return sorted(p.name[:-5] for p in _bundled_dir().iterdir() if p.name.endswith(".toml"))


def scenario_path(name):
    """Path of a scenario given as a file path or a bundled name."""
    p = Path(name)
    if p.suffix == ".toml" and p.is_file():
        return p
    bundled = _bundled_dir() / f"{name}.toml"
    if bundled.is_file():
        return Path(str(bundled))
    names = list_scenarios()
    raise UnknownScenario(name, difflib.get_close_matches(str(name), names, n=3, cutoff=0.3)
                          or names)


def load_raw(name):
    path = scenario_path(name)
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# --------------------------------------------------------------------------
# resolution


def _floats(v, name, size=None):
    try:
        a = np.array(v, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be numeric") from None
    if size is not None and a.size != size:
        raise ConfigError(f"{name} must have {size} entries, got {a.size}")
    return a


def _matrix(v, name, n):
    a = _floats(v, name)
    if a.ndim == 1:
        if a.size != n:
            raise ConfigError(f"{name} must have {n} diagonal entries, got {a.size}")
        a = np.diag(a)
    if a.shape != (n, n):
        raise ConfigError(f"{name} must be {n}x{n}, got {a.shape}")
    return a


def _section(raw, key):
    sec = raw.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{key}] must be a table")
    return dict(sec)


def _restoring(spec, n):
    kind = spec.get("kind", "none")
    if kind == "none":
        return vsl.NoRestoring()
    if kind == "quadratic":
        return vsl.QuadraticPotential(_matrix(spec["stiffness"], "stiffness", n),
                                      _floats(spec.get("eta0", np.zeros(n)), "eta0", n))
    if kind == "hydrostatic":
        return vsl.HydrostaticRestoring(float(spec["weight"]), float(spec["buoyancy"]),
                                        _floats(spec["r_g"], "r_g", 3),
                                        _floats(spec["r_b"], "r_b", 3))
    raise ConfigError(f"unknown restoring kind {kind!r}")


def build_vessel(spec):
    spec = dict(spec)
    preset = spec.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown vessel preset {preset!r}; choose one of {sorted(PRESETS)}")
        base = PRESETS[preset]()
        merged = {"dof": base.dof.value, "name": base.name, "M": base.M,
                  "d_lin": base.d_lin, "d_quad": base.d_quad,
                  "restoring": base.restoring.describe()}
        merged.update(spec)
        spec = merged
    try:
        dof = geo.Dof(spec.get("dof", "planar3"))
    except ValueError:
        raise ConfigError(f"dof must be 'planar3' or 'full6', got {spec.get('dof')!r}") from None
    n = dof.n
    for key in ("M", "d_lin"):
        if key not in spec:
            raise ConfigError(f"[vessel] needs {key}")
    M = _floats(spec["M"], "M")
    if M.shape != (n, n):
        raise ConfigError(f"M must be {n}x{n} for {dof.value}, got {M.shape}")
    try:
        restoring = _restoring(dict(spec.get("restoring", {"kind": "none"})), n)
    except KeyError as exc:
        raise ConfigError(f"[vessel.restoring] missing {exc.args[0]}") from None
    return vsl.VesselParams(
        dof, M, _floats(spec["d_lin"], "d_lin", n),
        _floats(spec["d_quad"], "d_quad") if "d_quad" in spec else None,
        restoring, spec.get("r_gb"), str(spec.get("name", "")))


def build_gains(spec, n):
    for key in ("Lambda", "Pi", "Kd"):
        if key not in spec:
            raise ConfigError(f"[gains] needs {key}")
    return ctl.ControllerGains(_matrix(spec["Lambda"], "Lambda", n),
                               _matrix(spec["Pi"], "Pi", n),
                               _matrix(spec["Kd"], "Kd", n),
                               strict=bool(spec.get("strict", True)))


def build_reference(spec, n):
    spec = dict(spec)
    if spec.get("kind") in ("circle", "lawnmower"):
        spec.setdefault("dof", n)
    try:
        ref = refs.make_reference(spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[reference] {exc}") from None
    if ref.n != n:
        raise ConfigError(f"reference dimension {ref.n} does not match the craft ({n})")
    return ref


@dataclass
class Scenario:
    name: str
    description: str
    params: vsl.VesselParams
    gains: ctl.ControllerGains
    ref: refs.Reference
    x0: np.ndarray
    cfg: SimConfig
    experiments: list
    options: dict = field(default_factory=dict)
    resolved: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.params.n


def _tolist(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return [_tolist(x) for x in v]
    if isinstance(v, list):
        return [_tolist(x) for x in v]
    if isinstance(v, dict):
        return {k: _tolist(x) for k, x in v.items() if x is not None}
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def resolve(raw, default_name="scenario"):
    """Validate a raw mapping and return a :class:`Scenario`."""
    raw = dict(raw)
    params = build_vessel(_section(raw, "vessel"))
    n = params.n
    gains = build_gains(_section(raw, "gains"), n)
    ref = build_reference(_section(raw, "reference"), n)

    sim_spec = {**_DEFAULTS["sim"], **_section(raw, "sim")}
    cfg = SimConfig(float(sim_spec["h"]), float(sim_spec["t_end"]),
                    str(sim_spec["integrator"]), int(sim_spec["record_every"]))

    ini = _section(raw, "initial")
    eta0 = _floats(ini.get("eta", ref(0.0)[0]), "initial.eta", n)
    nu0 = _floats(ini.get("nu", np.zeros(n)), "initial.nu", n)
    try:
        geo.check_attitude(eta0)
    except ValueError as exc:
        raise ConfigError(f"initial pose: {exc}") from None
    refs.check_reference(ref, cfg.t_end)
    x0 = np.concatenate([eta0, params.M @ nu0])

    experiments = raw.get("experiments", ["track_body"])
    if isinstance(experiments, str):
        experiments = [experiments]
    bad = [e for e in experiments if e not in EXPERIMENTS]
    if bad:
        raise ConfigError(f"unknown experiments {bad}; choose from {list(EXPERIMENTS)}")

    options = {}
    for key in ("contraction", "passivity", "equivalence", "invariants"):
        opt = {**_DEFAULTS[key], **_section(raw, key)}
        options[key] = opt
    c = options["contraction"]
    c["offset"] = _floats(c.get("offset", [0.5, -0.5, 0.1] + [0.0] * (n - 3)), "contraction.offset", n)
    p = options["passivity"]
    p["delta_eta"] = _floats(p.get("delta_eta", c["offset"]), "passivity.delta_eta", n)
    p["delta_nu"] = _floats(p.get("delta_nu", np.zeros(n)), "passivity.delta_nu", n)
    if p["input"] not in ("none", "sinusoid"):
        raise ConfigError("passivity.input must be 'none' or 'sinusoid'")
    p["amplitude"] = _floats(p["amplitude"] if p["amplitude"] is not None else np.ones(n),
                             "passivity.amplitude", n)
    e = options["equivalence"]
    e["amplitude"] = _floats(e["amplitude"] if e["amplitude"] is not None
                             else 50.0 * np.ones(n), "equivalence.amplitude", n)
    for opt in (c, p):
        if opt["frame"] not in ("body", "inertial"):
            raise ConfigError("frame must be 'body' or 'inertial'")

    vessel_out = {"name": params.name, "dof": params.dof.value, "M": params.M,
                  "d_lin": params.d_lin, "d_quad": params.d_quad,
                  "restoring": params.restoring.describe()}
    if params.n == 6:
        vessel_out["r_gb"] = params.r_gb
    resolved = {
        "name": str(raw.get("name", default_name)),
        "description": str(raw.get("description", "")),
        "experiments": list(experiments),
        "vessel": vessel_out,
        "gains": {"Lambda": gains.Lambda, "Pi": gains.Pi, "Kd": gains.Kd,
                  "strict": gains.strict},
        "reference": ref.describe(),
        "initial": {"eta": eta0, "nu": nu0},
        "sim": {"h": cfg.h, "t_end": cfg.t_end, "integrator": cfg.integrator,
                "record_every": cfg.record_every},
        **{k: v for k, v in options.items()},
    }
    resolved = _tolist(resolved)
    return Scenario(resolved["name"], resolved["description"], params, gains, ref, x0,
                    cfg, list(experiments), options, resolved)


def load_scenario(name):
    raw = load_raw(name)
    return resolve(raw, default_name=Path(str(name)).stem)


def describe(name):
    """Fully resolved TOML echo of a scenario."""
    return dumps(load_scenario(name).resolved)


def dumps(resolved):
    return tomli_w.dumps(resolved)
