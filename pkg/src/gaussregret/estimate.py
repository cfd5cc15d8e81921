"""Result and configuration records shared by the estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

METHODS = ("exact", "quadrature", "monte_carlo", "bound_upper", "bound_lower")


@dataclass(frozen=True)
class MCConfig:
    samples: int = 200_000
    batches: int = 16
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not (self.samples >= self.batches >= 2):
            raise ValueError(f"need samples >= batches >= 2, got {self.samples}, {self.batches}")
        if self.workers < 1:
            raise ValueError("workers must be positive")


@dataclass(frozen=True)
class RegretEstimate:
    """A value in nats (regret, log-Wills or redundancy) with its error bar.

    ``half_width`` is the reported confidence half-width: 0 for closed forms,
    the declared truncation plus discretization budget for quadrature, and two
    batch-means standard errors (on the log scale) for Monte Carlo.
    """

    value: float
    method: str
    half_width: float = 0.0
    samples: int = 0
    seed: int | None = None
    flags: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.half_width < 0 or math.isnan(self.half_width):
            raise ValueError("half_width must be non-negative")
        if self.method == "exact" and self.half_width != 0:
            raise ValueError("exact estimates carry no error bar")

    @property
    def se(self) -> float:
        """Standard error implied by the half-width (MC convention: hw = 2 SE)."""
        return self.half_width / 2.0 if self.method == "monte_carlo" else self.half_width

    @property
    def lo(self) -> float:
        return self.value - self.half_width

    @property
    def hi(self) -> float:
        return self.value + self.half_width

    def to_dict(self, bits: bool = False) -> dict:
        c = 1.0 / math.log(2.0) if bits else 1.0
        d = {
            "value": self.value * c,
            "half_width": self.half_width * c,
            "method": self.method,
            "samples": int(self.samples),
            "seed": self.seed,
            "units": "bits" if bits else "nats",
        }
        if self.flags:
            d["flags"] = list(self.flags)
        return d
