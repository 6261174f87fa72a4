import logging
import re
from typing import Any, Dict, List, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings

from app.models.params import GenSpec, Hyperparams, SamplerConfig
from app.utils.errors import InputError

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    log_level: str = "INFO"
    n_workers: int = 1
    debug_checks: bool = False
    cache_enabled: bool = True
    cache_expiry_hours: int = 24
    mongodb_uri: Optional[str] = None
    mongodb_database: str = "pmlda"

    class Config:
        env_file = ".env"
        env_prefix = "PMLDA_"
        case_sensitive = False
        extra = "ignore"


settings = Settings()


def _number_list(value: Any) -> Any:
    if isinstance(value, str):
        parts = [p for p in re.split(r"[,\s]+", value.strip()) if p]
        return [float(p) for p in parts]
    return value


class RunConfig(BaseModel):
    """Flat run settings shared by every CLI subcommand.

    ``alpha`` may be one number, broadcast to K components, or a list.
    """

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    alpha: Union[float, List[float]] = 1.0
    lambda_: float = Field(default=1.0, alias="lambda", gt=0)
    K: int = Field(default=2, ge=2)
    T: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    f: float = Field(default=1.0, gt=0)
    thin: int = Field(default=0, ge=0)
    sigma_floor: float = Field(default=1e-6, gt=0)
    fix_pi: Optional[List[float]] = None
    fix_s: Optional[float] = Field(default=None, gt=0)

    window: int = Field(default=64, ge=1)
    stride: int = Field(default=32, ge=1)
    sigma: float = Field(default=2.0, gt=0)
    entropy_window: int = Field(default=21, ge=3)
    intensity_scale: float = Field(default=10.0, gt=0)

    lo: float = 0.4
    hi: float = 0.6

    m: float = Field(default=1.5, gt=1)
    tol: float = Field(default=1e-6, gt=0)
    max_iter: int = Field(default=300, ge=1)

    @field_validator("alpha", mode="before")
    @classmethod
    def _split_alpha(cls, value):
        value = _number_list(value)
        if isinstance(value, list) and len(value) == 1:
            return value[0]
        return value

    @field_validator("fix_pi", mode="before")
    @classmethod
    def _split_pin(cls, value):
        return _number_list(value)

    @field_validator("entropy_window")
    @classmethod
    def _odd_window(cls, value):
        if value % 2 == 0:
            raise ValueError("entropy_window must be odd")
        return value

    @model_validator(mode="after")
    def _check_consistency(self):
        if isinstance(self.alpha, list) and len(self.alpha) != self.K:
            raise ValueError(f"alpha has {len(self.alpha)} components but K={self.K}")
        if self.lo > self.hi:
            raise ValueError(f"lo={self.lo} exceeds hi={self.hi}")
        return self

    @property
    def alpha_vector(self) -> List[float]:
        if isinstance(self.alpha, list):
            return list(self.alpha)
        return [float(self.alpha)] * self.K

    def hyperparams(self) -> Hyperparams:
        return Hyperparams(alpha=self.alpha_vector, lambda_=self.lambda_, K=self.K,
                           f=self.f, T=self.T, seed=self.seed)

    def sampler_config(self, n_workers: Optional[int] = None, debug_checks: Optional[bool] = None) -> SamplerConfig:
        return SamplerConfig(
            hp=self.hyperparams(),
            thin=self.thin,
            sigma_floor=self.sigma_floor,
            fix_pi=self.fix_pi,
            fix_s=self.fix_s,
            n_workers=settings.n_workers if n_workers is None else n_workers,
            debug_checks=settings.debug_checks if debug_checks is None else debug_checks,
        )


RUN_KEYS = {name if field.alias is None else field.alias for name, field in RunConfig.model_fields.items()}


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Read a flat ``key=value`` file and apply overrides on top; overrides set to None are ignored."""
    values: Dict[str, Any] = {}
    if path is not None:
        values = _read_flat(path, RUN_KEYS)
        empty = sorted(k for k, v in values.items() if v is None or v == "")
        if empty:
            raise InputError(f"keys without a value in {path}: {', '.join(empty)}")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in RUN_KEYS:
            raise InputError(f"unknown run setting {key}")
        values[key] = value

    try:
        config = RunConfig.model_validate(values)
    except ValidationError as e:
        raise InputError(f"invalid run configuration: {e}")
    logger.debug(f"Run configuration: {config.model_dump(by_alias=True)}")
    return config


def _read_flat(path: str, known: set) -> Dict[str, Any]:
    try:
        with open(path) as fh:
            values = dict(dotenv_values(stream=fh))
    except OSError as e:
        raise InputError(f"cannot read config {path}: {e}")
    unknown = sorted(set(values) - known)
    if unknown:
        raise InputError(f"unknown keys in {path}: {', '.join(unknown)}")
    return values


GEN_KEYS = {name if field.alias is None else field.alias for name, field in GenSpec.model_fields.items()}


def load_gen_spec(path: str, overrides: Optional[Dict[str, Any]] = None) -> GenSpec:
    """Simulation settings from a flat file; matrices use ``;`` between rows, e.g. ``means=-4,-4;6,6``."""
    values = _read_flat(path, GEN_KEYS)
    for key in ("means", "cov_diag"):
        if isinstance(values.get(key), str):
            values[key] = [_number_list(row) for row in values[key].split(";") if row.strip()]
    for key in ("alpha", "fixed_pi", "fixed_z"):
        values[key] = _number_list(values.get(key))
    values = {k: v for k, v in values.items() if v not in (None, "")}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return GenSpec.model_validate(values)
    except ValidationError as e:
        raise InputError(f"invalid simulation settings: {e}")
