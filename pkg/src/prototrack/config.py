from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from .errors import ConfigError

STRATEGIES = ("samite", "sam2_default", "feature_only", "position_only", "recent_only")


@dataclass(frozen=True)
class RunConfig:
    """Tracker hyperparameters; immutable for the length of a run."""

    alpha: float = 0.3
    window_m: int = 30
    beta: float = 0.7
    strategy: str = "samite"
    seg_threshold: float = 0.6
    binarize_threshold: float = 0.5
    seed: int = 0
    # prompt generation and its gate can be switched off for ablations
    use_prompt: bool = True
    use_gate: bool = True
    # softmax temperature of the memory read-out
    temperature: float = 0.02
    conditioner: str = "attention"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if int(self.window_m) != self.window_m or self.window_m < 1:
            raise ConfigError(f"window m must be an integer >= 1, got {self.window_m}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; choose from {', '.join(STRATEGIES)}")
        for name in ("seg_threshold", "binarize_threshold"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")
        if self.conditioner not in ("attention", "prototype"):
            raise ConfigError(f"unknown conditioner {self.conditioner!r}")

    @property
    def effective_alpha(self) -> float:
        if self.strategy == "feature_only":
            return 0.0
        if self.strategy == "position_only":
            return 1.0
        return self.alpha

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)
