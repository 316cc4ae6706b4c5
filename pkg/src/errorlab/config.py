"""Experiment configuration with derived scale parameters.

Every artifact echoes the full resolved config, so a report or sample
store can be reproduced from its own header.  Derived fields follow the
iterated-logarithm scales: K = floor(log log T / 8) with a working floor
of 2, the clipping level V = C3 K^(1/4) (log K)^(5/4), and the nominal
outer truncation L = floor(log2 T / log3 T) (log_j = j-fold log), which
is informational at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .empirics import STRATEGIES, clip_policy
from .errors import UsageError

EXPERIMENT_KINDS = ("moments", "cdf", "laplace", "tails", "independence", "scan")
FAMILIES = ("divisor", "circle", "zeta2")
FORMATS = ("csv", "json", "bin")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    family: str = "divisor"
    T: float = 0.0
    N: int = 0
    M: int = 0
    h: int = 0
    count: int = 0
    seed: int = 0
    lambdas: tuple = ()
    alphas: tuple = ()
    v_grid: tuple = ()
    weights: str = "unit"
    strategy: str = "jittered-stratified"
    clip_c3: float = 10.0
    output: str = ""
    format: str = "json"
    workers: int = 1

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise UsageError(f"unknown experiment kind {self.kind!r}")
        if self.family not in FAMILIES:
            raise UsageError(f"unknown family {self.family!r}")
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        if self.strategy not in STRATEGIES:
            raise UsageError(f"unknown grid strategy {self.strategy!r}")
        for name in ("T",):
            if getattr(self, name) < 0:
                raise UsageError(f"{name} must be nonnegative")
        for name in ("N", "M", "h", "count", "workers"):
            if getattr(self, name) < 0:
                raise UsageError(f"{name} must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must fit in an unsigned 64-bit integer")

    # derived scales; meaningful only when T is set
    @property
    def K(self) -> int:
        return clip_policy(self.T, self.clip_c3).K if self.T > math.e else 0

    @property
    def K_eff(self) -> int:
        return clip_policy(self.T, self.clip_c3).K_eff if self.T > math.e else 2

    @property
    def V_clip(self) -> float:
        if self.T > math.e:
            return clip_policy(self.T, self.clip_c3).V
        return self.clip_c3 * 2**0.25 * math.log(2.0) ** 1.25

    @property
    def L_nominal(self) -> int:
        """floor(log2 T / log3 T), iterated natural logs; needs log3 T > 0."""
        if self.T <= 0:
            return 0
        l1 = math.log(self.T)
        if l1 <= 1.0:
            return 0
        l2 = math.log(l1)
        if l2 <= 1.0:
            return 0
        l3 = math.log(l2)
        return int(l2 / l3)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["lambdas"] = list(self.lambdas)
        d["alphas"] = list(self.alphas)
        d["v_grid"] = list(self.v_grid)
        d["derived"] = {
            "K": self.K,
            "K_eff": self.K_eff,
            "V_clip": self.V_clip,
            "L_nominal": self.L_nominal,
        }
        return d
