"""Run configuration: a small ``key = value`` format with ``[section]`` headers.

Keys may be written flat (``h = 1.5``), dotted (``model.h = 1.5``) or inside
a section (``[model]`` then ``h = 1.5``).  ``#`` starts a comment.  Lists are
comma separated, optionally bracketed; integer lists also accept inclusive
ranges ``a:b``.  Unknown keys are rejected.
"""

from dataclasses import asdict, dataclass, field

from .ensemble import Protocol, RunDescription, WitnessSpec
from .errors import ConfigInvalid, ParseError, ValidationError
from .witnesses import AnnealingConfig

KINDS = ("ensemble", "toy-model", "ground-state", "oracle-check")

# canonical key -> value type
SCHEMA = {
    "kind": "str",
    "seed": "int",
    "output": "str",
    "model.L": "int",
    "model.h": "float",
    "model.J": "float",
    "model.gamma": "float",
    "ensemble.protocol": "str",
    "ensemble.p": "floats",
    "ensemble.samples": "int",
    "ensemble.ee_positions": "int",
    "ensemble.allow_large_qfi": "bool",
    "witness.ee": "ints",
    "witness.negativity": "ints",
    "witness.qfi": "bool",
    "annealing.T0": "float",
    "annealing.cooling": "float",
    "annealing.T_min": "float",
    "annealing.moves_per_temperature": "int",
    "annealing.step": "float",
    "annealing.restarts": "int",
    "annealing.xz_plane": "bool",
    "fit.decay_length": "bool",
    "fit.central_charge": "bool",
    "fit.d_min": "int",
    "fit.ell_min": "int",
    "toy.xi0": "int",
    "toy.include_measured": "bool",
    "oracle.L": "int",
}

ALIASES = {
    "L": "model.L", "h": "model.h", "J": "model.J", "gamma": "model.gamma",
    "protocol": "ensemble.protocol", "p": "ensemble.p", "samples": "ensemble.samples",
}


def _parse_bool(text):
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _items(text):
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_ints(text):
    out = []
    for item in _items(text):
        if ":" in item:
            lo, hi = item.split(":")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(item))
    return tuple(out)


def convert(kind, text):
    text = text.strip()
    if kind == "str":
        return text.strip("\"'")
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind == "bool":
        return _parse_bool(text)
    if kind == "floats":
        return tuple(float(t) for t in _items(text))
    if kind == "ints":
        return _parse_ints(text)
    raise AssertionError(kind)


def canonical_key(key, section=None, line=None):
    full = f"{section}.{key}" if section else key
    full = ALIASES.get(full, full)
    if full not in SCHEMA:
        raise ParseError(full, "unknown key", line)
    return full


def parse_pairs(text):
    """Raw ``{canonical key: typed value}`` from configuration text."""
    values = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]") and "=" not in line:
            section = line[1:-1].strip()
            if not section:
                raise ParseError("[]", "empty section name", lineno)
            continue
        if "=" not in line:
            raise ParseError(line, "expected 'key = value'", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        full = canonical_key(key, section, lineno)
        try:
            values[full] = convert(SCHEMA[full], value)
        except ValueError as exc:
            raise ParseError(full, f"bad value {value!r} ({exc})", lineno) from exc
    return values


def apply_overrides(values, overrides):
    """Apply ``key=value`` strings from the command line on top of file values."""
    values = dict(values)
    for item in overrides or ():
        if "=" not in item:
            raise ParseError(item, "override must look like key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        full = canonical_key(key)
        try:
            values[full] = convert(SCHEMA[full], value)
        except ValueError as exc:
            raise ParseError(full, f"bad value {value!r} ({exc})") from exc
    return values


@dataclass(frozen=True)
class RunConfig:
    kind: str
    seed: int
    L: int
    h: float = 0.0
    J: float = 1.0
    gamma: float | None = None
    protocol: str | None = None
    p_grid: tuple = ()
    samples: int = 200
    ee_lengths: tuple = ()
    negativity_distances: tuple = ()
    qfi: bool = False
    ee_positions: int = 8
    allow_large_qfi: bool = False
    annealing: AnnealingConfig = field(default_factory=AnnealingConfig)
    fit_decay_length: bool = False
    fit_central_charge: bool = False
    fit_d_min: int = 3
    fit_ell_min: int = 8
    xi0: int = 2
    include_measured: bool = True
    output: str = "mac-sim-run"

    def echo(self):
        out = asdict(self)
        out["annealing"] = asdict(self.annealing)
        return out

    def description(self):
        """Ensemble run description for ``kind = ensemble``."""
        witnesses = []
        if self.ee_lengths:
            witnesses.append(WitnessSpec("ee", tuple(self.ee_lengths)))
        if self.negativity_distances:
            witnesses.append(WitnessSpec("negativity", tuple(self.negativity_distances)))
        if self.qfi:
            witnesses.append(WitnessSpec("qfi"))
        return RunDescription(
            L=self.L, h=self.h, J=self.J, gamma=self.gamma,
            protocol=Protocol.parse(self.protocol), p_grid=tuple(self.p_grid),
            witnesses=tuple(witnesses), samples=self.samples, seed=self.seed,
            ee_positions=self.ee_positions, annealing=self.annealing,
            allow_large_qfi=self.allow_large_qfi,
        )


def _require(values, key, kind):
    if key not in values:
        raise ValidationError(key, f"required for kind '{kind}'")
    return values[key]


def build_config(values, kind=None):
    """Validate raw values into a :class:`RunConfig`."""
    file_kind = values.get("kind")
    if kind is None:
        kind = file_kind
    if kind not in KINDS:
        raise ValidationError("kind", f"must be one of {', '.join(KINDS)}")
    if file_kind is not None and file_kind != kind:
        raise ValidationError("kind", f"config says '{file_kind}' but subcommand is '{kind}'")
    if "seed" not in values:
        raise ValidationError("seed", "a master seed is required")
    L_default = 8 if kind == "oracle-check" else None
    L = values.get("oracle.L", values.get("model.L", L_default)) if kind == "oracle-check" else values.get("model.L")
    if L is None:
        raise ValidationError("model.L", "required")
    if L <= 0:
        raise ValidationError("model.L", "must be positive")
    if kind == "oracle-check" and L > 12:
        raise ValidationError("oracle.L", "dense oracle supports L <= 12")
    if kind in ("ensemble", "ground-state") and L % 2:
        raise ValidationError("model.L", "must be even")
    if kind in ("ensemble", "ground-state"):
        _require(values, "model.h", kind)
    J = values.get("model.J", 1.0)
    if not J > 0:
        raise ValidationError("model.J", "must be positive")
    gamma = values.get("model.gamma")
    if gamma is not None and gamma < 0:
        raise ValidationError("model.gamma", "must be non-negative")
    p_grid = values.get("ensemble.p", ())
    for p in p_grid:
        if not 0 <= p <= 1:
            raise ValidationError("ensemble.p", f"density {p} outside [0, 1]")
    protocol = values.get("ensemble.protocol")
    if kind in ("ensemble", "toy-model"):
        if not p_grid:
            raise ValidationError("ensemble.p", "at least one density is required")
    if kind == "ensemble":
        _require(values, "ensemble.protocol", kind)
        try:
            Protocol.parse(protocol)
        except ValueError as exc:
            raise ValidationError("ensemble.protocol", str(exc)) from exc
    samples = values.get("ensemble.samples", 200)
    if samples < 1:
        raise ValidationError("ensemble.samples", "must be at least 1")
    ee = values.get("witness.ee", ())
    neg = values.get("witness.negativity", ())
    if any(not 0 < ell <= L for ell in ee):
        raise ValidationError("witness.ee", f"interval lengths must lie in 1..{L}")
    if any(not 0 < d < L for d in neg):
        raise ValidationError("witness.negativity", f"distances must lie in 1..{L - 1}")
    if kind == "ensemble" and not (ee or neg or values.get("witness.qfi")):
        raise ValidationError("witness", "select at least one witness")
    ann_keys = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("annealing.")}
    try:
        annealing = AnnealingConfig(**ann_keys)
    except ValueError as exc:
        raise ValidationError("annealing", str(exc)) from exc
    xi0 = values.get("toy.xi0", 2)
    if kind == "toy-model" and not 1 <= xi0 < L / 2:
        raise ValidationError("toy.xi0", "need 1 <= xi0 < L/2")
    positions = values.get("ensemble.ee_positions", 8)
    if positions < 1:
        raise ValidationError("ensemble.ee_positions", "must be at least 1")
    try:
        cfg = RunConfig(
            kind=kind, seed=values["seed"], L=L, h=values.get("model.h", 0.0), J=J, gamma=gamma,
            protocol=protocol, p_grid=tuple(p_grid), samples=samples, ee_lengths=tuple(ee),
            negativity_distances=tuple(neg), qfi=values.get("witness.qfi", False),
            ee_positions=positions, allow_large_qfi=values.get("ensemble.allow_large_qfi", False),
            annealing=annealing, fit_decay_length=values.get("fit.decay_length", False),
            fit_central_charge=values.get("fit.central_charge", False),
            fit_d_min=values.get("fit.d_min", 3), fit_ell_min=values.get("fit.ell_min", 8),
            xi0=xi0, include_measured=values.get("toy.include_measured", True),
            output=values.get("output", "mac-sim-run"),
        )
        if kind == "ensemble":
            cfg.description()
    except ConfigInvalid as exc:
        raise ValidationError(exc.field, str(exc).split(": ", 1)[-1]) from exc
    return cfg


def parse_config(text, kind=None, overrides=None):
    """Parse and validate configuration text (plus command-line overrides)."""
    return build_config(apply_overrides(parse_pairs(text), overrides), kind)
