"""
Run configuration shared by the command-line subcommands.

Defaults live here, environment variables (NCLEAPFROG_*, read after load_dotenv) override them, and
command-line flags override both.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Literal

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ncleapfrog._compat import Self
from ncleapfrog.algebra import Backend
from ncleapfrog.leapfrog import Mode

load_dotenv()

DEFAULT_OUTPUT = "output"
DEFAULT_STEPS = 10
DEFAULT_N = 6
DEFAULT_D = 2
DEFAULT_N_MAX = 3

ENV_PREFIX = "NCLEAPFROG_"
ENV_FIELDS = ("backend", "d", "N", "mode", "W", "steps", "n_max", "points", "eval_d", "output")

Command = Literal["simulate", "invariants", "biortho", "brackets"]

# Symbolic bracket checks are limited to small networks
MAX_BRACKET_N = 4

# Defaults that differ per subcommand; flags and environment still win
COMMAND_DEFAULTS: dict[str, dict] = {
    "invariants": {"N": 3},
    "brackets": {"N": 2},
}


class RunConfig(BaseModel):
    """Validated settings for one run; invalid combinations name the offending field."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command = "simulate"
    backend: Backend = Backend.RATIONAL
    d: int = Field(DEFAULT_D, ge=1, le=6)
    N: int = Field(DEFAULT_N, ge=1)
    mode: Mode = Mode.WINDOWED
    W: int | None = Field(None, ge=1)
    seed: int = Field(..., ge=0)
    steps: int = Field(DEFAULT_STEPS, ge=0)
    n_max: int = Field(DEFAULT_N_MAX, ge=0, le=8)
    points: int = Field(20, ge=1)
    eval_d: int = Field(3, ge=1, le=4)
    h_values: tuple[float, ...] = (1e-2, 1e-3)
    mu_values: tuple[int, ...] = (1, 2, 3)
    output: Path = Path(DEFAULT_OUTPUT)
    verbose: bool = False

    @model_validator(mode="after")
    def check_combination(self) -> Self:
        if self.backend is Backend.SCALAR and self.d != 1:
            raise ValueError(f"d: scalar backend is commutative and needs d=1, got d={self.d}")
        if self.command == "simulate":
            if self.N < 3:
                raise ValueError(f"N: the map needs i-1, i, i+1 distinct, got N={self.N}")
            if self.mode is Mode.WINDOWED and self.half_width < self.steps + 2:
                raise ValueError(f"W: {self.steps} steps need half-width >= {self.steps + 2}, got W={self.W}")
        if self.command == "brackets" and not 2 <= self.N <= MAX_BRACKET_N:
            raise ValueError(f"N: bracket relations are checked for 2 <= N <= {MAX_BRACKET_N}, got N={self.N}")
        if self.command == "invariants" and self.backend is Backend.FLOAT:
            raise ValueError("backend: exact conservation needs the rational or scalar backend")
        if len(self.h_values) < 2:
            raise ValueError(f"h_values: a convergence slope needs two or more step sizes, got {self.h_values}")
        if any(h <= 0 for h in self.h_values):
            raise ValueError(f"h_values: step sizes must be positive, got {self.h_values}")
        if 0 in self.mu_values:
            raise ValueError("mu_values: mu = 0 is not allowed")
        return self

    @property
    def half_width(self) -> int:
        """Window half-width; by default just wide enough for every step."""
        return self.W if self.W is not None else self.steps + 2


def env_overrides(environ: dict[str, str] | None = None) -> dict[str, str]:
    """Values of NCLEAPFROG_* variables for the known fields."""
    environ = os.environ if environ is None else environ
    out = {}
    for name in ENV_FIELDS:
        value = environ.get(f"{ENV_PREFIX}{name.upper()}")
        if value is not None:
            out[name] = value
    return out


def build_config(flags: dict, environ: dict[str, str] | None = None) -> RunConfig:
    """Merge environment defaults with explicit flags (None flags are ignored) and validate."""
    values: dict = dict(COMMAND_DEFAULTS.get(flags.get("command"), {}))
    values.update(env_overrides(environ))
    values.update({k: v for k, v in flags.items() if v is not None})
    return RunConfig(**values)


def describe_error(exc: ValidationError) -> str:
    """One line per failing field."""
    lines = []
    for error in exc.errors():
        field = ".".join(str(part) for part in error["loc"]) or "config"
        lines.append(f"{field}: {error['msg']}")
    return "; ".join(lines)
