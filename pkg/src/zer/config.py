"""Run configuration: YAML schema, validation and presets."""

from __future__ import annotations

from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_serializer, field_validator

from .errors import ConfigError, ModelValidationError
from .model import Hopping, ModelSpec, as_fraction
from .rg import RGConfig

ARTIFACTS = ("trace", "band_structure", "correlations", "level_decomposition",
             "momentum_occupation", "bounds", "matrices")
DEFAULT_ARTIFACTS = ARTIFACTS[:-1]
PRESETS = ("ssh", "nn", "extended")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class HoppingConfig(_Strict):
    shift: int
    alpha: int = Field(ge=0)
    beta: int = Field(ge=0)
    amplitude: complex

    @field_validator("amplitude", mode="before")
    @classmethod
    def _parse_amplitude(cls, v):
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError("amplitude as a list must be [real, imag]")
            return complex(float(v[0]), float(v[1]))
        if isinstance(v, str):
            return complex(v.replace(" ", ""))
        return v

    @field_serializer("amplitude")
    def _dump_amplitude(self, v: complex):
        return v.real if v.imag == 0 else [v.real, v.imag]


class ModelConfig(_Strict):
    name: str = ""
    cells: int = Field(ge=2)
    orbitals_per_cell: int = Field(ge=1)
    hoppings: list[HoppingConfig]
    filling: Fraction

    @field_validator("filling", mode="before")
    @classmethod
    def _parse_filling(cls, v):
        if isinstance(v, bool) or not isinstance(v, (int, float, str, Fraction)):
            raise ValueError("filling must be a number or a fraction string such as '2/5'")
        try:
            return as_fraction(v)
        except (ValueError, ZeroDivisionError) as err:
            raise ValueError(f"cannot read filling {v!r}") from err

    @field_serializer("filling")
    def _dump_filling(self, v: Fraction):
        return str(v)

    def to_spec(self) -> ModelSpec:
        return ModelSpec(
            cells=self.cells,
            orbitals_per_cell=self.orbitals_per_cell,
            hoppings=tuple(Hopping(h.shift, h.alpha, h.beta, h.amplitude) for h in self.hoppings),
            filling=self.filling,
            name=self.name,
        )


class RGSection(_Strict):
    epsilon_schedule: list[float] = Field(min_length=1)
    region_width_cells: int = Field(2, ge=1)
    blocking_factor: int = Field(2, ge=1)
    delta_null: float = Field(1e-6, gt=0)
    gap_min: float = Field(0.1, gt=0)
    max_steps: int = Field(40, ge=1)
    core_size_threshold: int = Field(8, ge=1)
    residual_abort_multiplier: float = Field(10.0, gt=0)
    band_rejection: Literal["bandwise", "strict"] = "bandwise"
    courier_rounding: Literal["projector", "clip"] = "projector"

    @field_validator("epsilon_schedule")
    @classmethod
    def _check_eps(cls, v):
        for e in v:
            if not 0 < e < 0.5:
                raise ValueError(f"epsilon {e} outside (0, 1/2)")
        return v

    def to_rg(self) -> RGConfig:
        data = self.model_dump()
        data["epsilon_schedule"] = tuple(data["epsilon_schedule"])
        return RGConfig(**data)


class OutputConfig(_Strict):
    directory: str = "zer-out"
    artifacts: list[Literal[ARTIFACTS]] = Field(default_factory=lambda: list(DEFAULT_ARTIFACTS))


class RunConfig(_Strict):
    model: ModelConfig
    rg: RGSection
    outputs: OutputConfig = Field(default_factory=OutputConfig)
    seed: int = 0

    def echo(self) -> dict:
        return self.model_dump(mode="json")


def _node_line(root, loc):
    """1-based line of the YAML node at pydantic location ``loc`` (nearest existing ancestor)."""
    node = root
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            nxt = next((v for k, v in node.value if k.value == str(key)), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            nxt = node.value[key]
        else:
            nxt = None
        if nxt is None:
            break
        node = nxt
    return node.start_mark.line + 1 if node is not None else None


def _problems(err: ValidationError, root):
    out = []
    for e in err.errors():
        loc = tuple(p for p in e["loc"] if not (isinstance(p, str) and p.startswith(("function-", "literal["))))
        field = ".".join(str(p) for p in loc) or "<root>"
        line = _node_line(root, loc) if root is not None else None
        where = f"line {line}: " if line else ""
        out.append(f"{where}{field}: {e['msg']}")
    return out


def validate_config(data, root=None) -> RunConfig:
    """Schema- and physics-validate a mapping; raises :class:`ConfigError` with every problem."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping", ["<root>: expected a mapping"])
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as err:
        problems = _problems(err, root)
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(problems), problems) from None
    try:
        cfg.model.to_spec()
        cfg.rg.to_rg()
    except (ModelValidationError, ConfigError) as err:
        line = _node_line(root, ("model",)) if root is not None else None
        msg = f"line {line}: model: {err}" if line else f"model: {err}"
        raise ConfigError(f"invalid configuration: {msg}", [msg]) from None
    return cfg


def load_text(text: str, source="<string>") -> RunConfig:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"{source}: malformed YAML: {err}", [str(err)]) from None
    return validate_config(data, root)


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err.strerror}", [str(err)]) from None
    return load_text(text, str(path))


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("zer").joinpath("presets", f"{name}.yaml").read_text()


def load_preset(name: str) -> RunConfig:
    return load_text(preset_text(name), f"preset {name}")


def dump_yaml(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.echo(), sort_keys=False, default_flow_style=None)
