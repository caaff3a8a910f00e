"""Run configuration: the single tolerance knob and friends."""
import os
from dataclasses import dataclass, replace

DEFAULT_TOL = 1e-9
DEFAULT_FEAS_TOL = 1e-8
DEFAULT_SEED = 0xC0FA


def _env_tol():
    raw = os.environ.get("COVX_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"COVX_TOL must be a float, got {raw!r}") from None


@dataclass(frozen=True)
class RunConfig:
    """Tolerances and RNG seed threaded through every computation.

    ``tol`` is the relative threshold for all rank decisions (singular or
    eigenvalues below ``tol * largest`` count as zero). ``feas_tol`` bounds
    constraint residuals when deciding feasibility.
    """

    tol: float = DEFAULT_TOL
    feas_tol: float = DEFAULT_FEAS_TOL
    rng_seed: int = DEFAULT_SEED
    output: str = "json"

    def __post_init__(self):
        if not 0 < self.tol < 1:
            raise ValueError(f"tol must lie in (0, 1), got {self.tol}")
        if not 0 < self.feas_tol < 1:
            raise ValueError(f"feas_tol must lie in (0, 1), got {self.feas_tol}")
        if self.output not in ("json", "text"):
            raise ValueError(f"output must be 'json' or 'text', got {self.output!r}")

    @classmethod
    def from_env(cls, **overrides):
        cfg = cls(tol=_env_tol())
        return replace(cfg, **overrides) if overrides else cfg
