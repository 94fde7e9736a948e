"""
Run Configuration for the Repeater Tool
Defaults, config file, REPEATER_* environment variables and command-line flags, merged in that order
"""

import math
import os
from typing import Dict, List, Literal, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from models.errors import ConfigError
from models.models import LinkBudget

ENV_PREFIX = 'REPEATER_'
TOOL_NAME = 'multimode-repeater'
TOOL_VERSION = '1.0.0'

# not part of the provenance header: they change where or how fast, never what
RUNTIME_KEYS = ('output', 'format', 'jobs', 'log_level')


class RunConfig(BaseModel):
    """Every parameter a command may need, with its default value"""
    model_config = ConfigDict(extra='forbid', frozen=True)

    scenario: Literal['pulsed', 'cw'] = 'pulsed'
    f_target: float = Field(0.9, gt=0.5, lt=1.0)
    eta_d: float = Field(0.9, ge=0.0, le=1.0)
    eta_m: float = Field(0.8, ge=0.0, le=1.0)
    l_att_km: float = Field(22.0, gt=0.0)
    attenuation: Literal['link', 'half_link'] = 'link'
    c_km_s: float = Field(2e5, gt=0.0)
    a: float = Field(math.inf, gt=0.0)
    caps: List[float] = Field(default_factory=lambda: [0.01, 0.1, 1.0, math.inf])
    kappa_sigma: Optional[float] = Field(None, gt=0.0)
    kappa_ttot: float = Field(100.0, gt=0.0)
    kappa_t: Optional[float] = Field(None, gt=0.0, le=50.0)
    max_depth: int = Field(4, ge=0, le=6)
    depth: int = Field(0, ge=0, le=6)

    sigma_min: float = Field(1e-3, gt=0.0)
    sigma_max: float = Field(3.0, gt=0.0)
    sigma_points: int = Field(60, ge=2)
    grid_points: int = Field(400, ge=50)
    l_min_km: float = Field(100.0, ge=10.0)
    l_max_km: float = Field(2000.0, gt=0.0)
    l_step_km: float = Field(10.0, gt=0.0)
    l_km: float = Field(500.0, ge=10.0)
    x2_min: float = Field(1e-5, gt=0.0)
    x2_max: float = Field(1e-2, gt=0.0, le=0.1)
    x2_points: int = Field(30, ge=2)

    multiplex: bool = False
    n_mm: int = Field(1000, ge=1)
    n_mem: int = Field(32, ge=1)

    output: Optional[str] = None
    format: Literal['csv', 'json'] = 'csv'
    jobs: int = Field(1, ge=1)
    log_level: Literal['DEBUG', 'INFO', 'WARNING', 'ERROR'] = 'WARNING'

    @field_validator('caps', mode='before')
    @classmethod
    def split_caps(cls, value):
        if isinstance(value, str):
            value = [item.strip() for item in value.split(',') if item.strip()]
        return [float(item) for item in value]

    @field_validator('caps')
    @classmethod
    def positive_caps(cls, value):
        if not value or any(cap <= 0 for cap in value):
            raise ValueError('intensity caps must be positive')
        return value

    @field_validator('log_level', mode='before')
    @classmethod
    def upper_level(cls, value):
        return value.upper() if isinstance(value, str) else value

    @model_validator(mode='after')
    def ordered_ranges(self):
        for lo, hi in (('sigma_min', 'sigma_max'), ('l_min_km', 'l_max_km'), ('x2_min', 'x2_max')):
            if getattr(self, lo) >= getattr(self, hi):
                raise ValueError(f'{lo} must be below {hi}')
        return self

    @property
    def budget(self):
        return LinkBudget(eta_d=self.eta_d, eta_m=self.eta_m, l_att_km=self.l_att_km, fiber_c_km_s=self.c_km_s,
                          attenuation=self.attenuation)

    @property
    def eta2(self):
        return self.eta_d * self.eta_m

    def resolved(self) -> Dict[str, object]:
        """Sorted settings that determine the numbers in an output file"""
        data = self.model_dump()
        return {key: data[key] for key in sorted(data) if key not in RUNTIME_KEYS}


def _from_file(path):
    values = dotenv_values(path)
    if not values and not os.path.exists(path):
        raise ConfigError('config file not found', path=path)
    result = {}
    for key, value in values.items():
        name = key.lower()
        if name.startswith(ENV_PREFIX.lower()):
            name = name[len(ENV_PREFIX):]
        if name not in RunConfig.model_fields:
            raise ConfigError('unknown key in config file', key=key, path=path)
        result[name] = value
    return result


def _from_environment(environ=None):
    environ = os.environ if environ is None else environ
    result = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):].lower()
            if name in RunConfig.model_fields:
                result[name] = value
    return result


def load_config(path=None, overrides=None, environ=None) -> RunConfig:
    """Merge the layers; any invalid value becomes a ConfigError"""
    merged = {}
    if path:
        merged.update(_from_file(path))
    merged.update(_from_environment(environ))
    merged.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return RunConfig(**merged)
    except ValidationError as exc:
        problems = '; '.join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors())
        raise ConfigError('invalid configuration', problems=problems) from exc
