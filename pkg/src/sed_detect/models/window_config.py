"""
`models/window_config` module.

Provides the WindowConfig class: the observation window tau, the decision buffer eta and
the frame period L that together define one supervised example.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import math

from dataclasses import dataclass
from typing import Any, Self

from sed_detect.types import ConfigError


DEFAULT_FRAME_PERIOD_MS = 500


def _frames_in(seconds: float, period_ms: int, label: str) -> int:
    """Converts a duration to a whole number of frames."""
    frames = seconds * 1000.0 / period_ms
    rounded = round(frames)
    if not math.isclose(frames, rounded, abs_tol=1e-9):
        raise ConfigError(f"{label}={seconds} s is not a multiple of the {period_ms} ms frame period")
    return rounded


@dataclass(frozen=True, slots=True)
class WindowConfig:
    """Observation window and buffer of the detector.

    At decision frame t the classifier sees frames ``t - tau .. t`` (inclusive) and labels
    the user state at frame ``t - eta``.

    Attributes:
        tau_s (float): Observation window in seconds.
        eta_s (float): Decision buffer in seconds; never longer than tau_s.
        frame_period_ms (int): Integration window length L in milliseconds.
    """

    tau_s: float
    eta_s: float
    frame_period_ms: int = DEFAULT_FRAME_PERIOD_MS

    def __post_init__(self) -> None:
        """Validates the window.

        Raises:
            ConfigError: If tau < eta, either is negative, or not a multiple of L.
        """
        if self.frame_period_ms <= 0:
            raise ConfigError("frame period must be positive")
        if self.tau_s < 0 or self.eta_s < 0:
            raise ConfigError("tau and eta must be non-negative")
        if self.tau_s < self.eta_s:
            raise ConfigError(f"tau ({self.tau_s} s) must be at least eta ({self.eta_s} s)")
        _frames_in(self.tau_s, self.frame_period_ms, "tau")
        _frames_in(self.eta_s, self.frame_period_ms, "eta")

    def __str__(self) -> str:
        """Returns e.g. ``tau5-eta2``."""
        return f"tau{self.tau_s:g}-eta{self.eta_s:g}"

    @property
    def tau_frames(self) -> int:
        """Observation window length in frames."""
        return _frames_in(self.tau_s, self.frame_period_ms, "tau")

    @property
    def eta_frames(self) -> int:
        """Buffer length in frames."""
        return _frames_in(self.eta_s, self.frame_period_ms, "eta")

    @property
    def n_rows(self) -> int:
        """Frames per window; both endpoints are included."""
        return self.tau_frames + 1

    @property
    def label_row(self) -> int:
        """Row of the window whose frame carries the label."""
        return self.tau_frames - self.eta_frames

    @property
    def eta_ms(self) -> int:
        """Buffer length in milliseconds."""
        return self.eta_frames * self.frame_period_ms

    def to_dict(self) -> dict[str, Any]:
        """Returns the JSON form used in model files and run records."""
        return {"tau_s": self.tau_s, "eta_s": self.eta_s, "frame_period_ms": self.frame_period_ms}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        """Creates a WindowConfig from its JSON form."""
        try:
            return cls(
                float(data["tau_s"]),
                float(data["eta_s"]),
                int(data.get("frame_period_ms", DEFAULT_FRAME_PERIOD_MS)),
            )
        except KeyError as e:
            raise ConfigError(f"window config is missing {e.args[0]}") from e


__all__ = ["DEFAULT_FRAME_PERIOD_MS", "WindowConfig"]
