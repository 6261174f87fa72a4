from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.domain import TopicParams


class Hyperparams(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    alpha: List[float]
    lambda_: float = Field(alias="lambda", gt=0)
    K: int = Field(ge=2)
    f: float = Field(default=1.0, gt=0)
    T: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_alpha(self):
        if len(self.alpha) != self.K:
            raise ValueError(f"alpha has {len(self.alpha)} components but K={self.K}")
        if any(a <= 0 for a in self.alpha):
            raise ValueError("all alpha components must be positive")
        return self

    @property
    def alpha_array(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=np.float64)


class SamplerConfig(BaseModel):
    hp: Hyperparams
    thin: int = Field(default=0, ge=0)
    sigma_floor: float = Field(default=1e-6, gt=0)
    fix_pi: Optional[List[float]] = None
    fix_s: Optional[float] = Field(default=None, gt=0)
    n_workers: int = Field(default=1, ge=1)
    debug_checks: bool = False

    @model_validator(mode="after")
    def _check_pins(self):
        if self.fix_pi is not None:
            if len(self.fix_pi) != self.hp.K:
                raise ValueError("fix_pi must have K components")
            if any(p <= 0 for p in self.fix_pi) or abs(sum(self.fix_pi) - 1.0) > 1e-9:
                raise ValueError("fix_pi must lie strictly inside the simplex")
        return self


class GenSpec(BaseModel):
    """Settings for forward simulation of a corpus.

    Either ``alpha`` or ``fixed_pi`` and either ``lambda`` or ``fixed_s`` must be
    given; ``fixed_z`` forces every membership vector, which is how the blended
    emission densities can be checked directly.
    """

    model_config = ConfigDict(populate_by_name=True)

    means: List[List[float]]
    sigma2: float = Field(default=1.0, gt=0)
    cov_diag: Optional[List[List[float]]] = None
    alpha: Optional[List[float]] = None
    lambda_: Optional[float] = Field(default=None, alias="lambda", gt=0)
    fixed_pi: Optional[List[float]] = None
    fixed_s: Optional[float] = Field(default=None, gt=0)
    fixed_z: Optional[List[float]] = None
    D: int = Field(default=1, ge=1)
    N: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_consistency(self):
        K = len(self.means)
        if K < 2:
            raise ValueError("need at least two topics")
        if len({len(m) for m in self.means}) != 1:
            raise ValueError("all topic means must share one dimension")
        if self.alpha is None and self.fixed_pi is None:
            raise ValueError("either alpha or fixed_pi is required")
        if self.lambda_ is None and self.fixed_s is None:
            raise ValueError("either lambda or fixed_s is required")
        for name in ("alpha", "fixed_pi", "fixed_z"):
            value = getattr(self, name)
            if value is not None and len(value) != K:
                raise ValueError(f"{name} must have {K} components")
        if self.alpha is not None and any(a <= 0 for a in self.alpha):
            raise ValueError("all alpha components must be positive")
        for name in ("fixed_pi", "fixed_z"):
            value = getattr(self, name)
            if value is not None and (any(v < 0 for v in value) or abs(sum(value) - 1.0) > 1e-9):
                raise ValueError(f"{name} must lie on the simplex")
        return self

    @property
    def K(self) -> int:
        return len(self.means)

    def topics(self) -> TopicParams:
        return TopicParams(np.asarray(self.means), self.sigma2,
                           None if self.cov_diag is None else np.asarray(self.cov_diag))

    def hyperparams(self) -> Optional[Hyperparams]:
        """Hyperparameters of the simulated model, when both priors are specified."""
        if self.alpha is None or self.lambda_ is None:
            return None
        return Hyperparams(alpha=self.alpha, lambda_=self.lambda_, K=self.K, seed=self.seed)
