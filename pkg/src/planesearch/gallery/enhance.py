"""The 12-parameter photo enhancement pipeline.

All parameters live in [0, 1] with 0.5 neutral: brightness, contrast,
saturation, then a 3x3 color-balance block (shadows/midtones/highlights x
R/G/B).  This module is the reference implementation; the browser client
mirrors the same operations and is held to +-1/255 agreement on a shared
golden-vector file.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import jsonio
from ..rng import stream

REGIONS = ("shadows", "midtones", "highlights")
CHANNELS = ("R", "G", "B")
PARAM_COUNT = 12

BRIGHTNESS_STRENGTH = 0.6
BALANCE_STRENGTH = 0.4
_LUMA = np.array([0.299, 0.587, 0.114])


def _neutral_balance() -> np.ndarray:
    return np.full((3, 3), 0.5)


@dataclass(frozen=True)
class EnhanceParams:
    """One point of the 12-dimensional enhancement space."""

    brightness: float = 0.5
    contrast: float = 0.5
    saturation: float = 0.5
    balance: np.ndarray = field(default_factory=_neutral_balance)

    def __post_init__(self):
        object.__setattr__(self, "balance", np.asarray(self.balance, dtype=float))
        if self.balance.shape != (3, 3):
            raise ValueError("balance must be a 3x3 block (regions x channels)")
        vec = self.to_vector()
        if not np.all((vec >= 0.0) & (vec <= 1.0)):
            raise ValueError("all enhancement parameters must lie in [0, 1]")

    def to_vector(self) -> np.ndarray:
        """Canonical 12-vector: brightness, contrast, saturation, balance row-major."""
        return np.concatenate([
            [self.brightness, self.contrast, self.saturation],
            self.balance.ravel(),
        ])

    @classmethod
    def from_vector(cls, vec) -> "EnhanceParams":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (PARAM_COUNT,):
            raise ValueError(f"expected a {PARAM_COUNT}-vector, got shape {vec.shape}")
        return cls(vec[0], vec[1], vec[2], vec[3:].reshape(3, 3))

    @classmethod
    def neutral(cls) -> "EnhanceParams":
        return cls()

    def to_json(self) -> dict:
        return {
            "brightness": self.brightness,
            "contrast": self.contrast,
            "saturation": self.saturation,
            "balance": {
                region: {
                    channel: float(self.balance[r, c])
                    for c, channel in enumerate(CHANNELS)
                }
                for r, region in enumerate(REGIONS)
            },
        }

    @classmethod
    def from_json(cls, doc: dict) -> "EnhanceParams":
        balance = np.array([
            [float(doc["balance"][region][channel]) for channel in CHANNELS]
            for region in REGIONS
        ])
        return cls(
            float(doc["brightness"]),
            float(doc["contrast"]),
            float(doc["saturation"]),
            balance,
        )


def apply_enhancement_vec(rgb: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Vectorized pipeline over (..., 3) float pixels, parameters as a 12-vector.

    Intermediate values are intentionally left unclamped; only the final
    result is clipped.  The contrast and saturation steps are written as
    ``c + (c - anchor) * (factor - 1)`` so neutral parameters are a bit-exact
    identity, not just an approximate one.
    """
    rgb = np.asarray(rgb, dtype=float)
    vec = np.asarray(vec, dtype=float)
    b, k, s = vec[0], vec[1], vec[2]
    balance = vec[3:].reshape(3, 3)

    c = rgb + BRIGHTNESS_STRENGTH * (b - 0.5)
    c = c + (c - 0.5) * (2.0 ** (2.0 * (k - 0.5)) - 1.0)
    luma = c @ _LUMA
    c = c + (c - luma[..., None]) * (2.0 ** (2.0 * (s - 0.5)) - 1.0)
    luma = c @ _LUMA
    w_shadow = (1.0 - luma) ** 2
    w_mid = 2.0 * luma * (1.0 - luma)
    w_high = luma**2
    shift = (
        w_shadow[..., None] * (balance[0] - 0.5)
        + w_mid[..., None] * (balance[1] - 0.5)
        + w_high[..., None] * (balance[2] - 0.5)
    )
    c = c + BALANCE_STRENGTH * shift
    return np.clip(c, 0.0, 1.0)


def apply_enhancement(rgb, params: EnhanceParams) -> np.ndarray:
    """Enhance a single pixel (triple of reals in [0, 1])."""
    rgb = np.asarray(rgb, dtype=float)
    if rgb.shape != (3,):
        raise ValueError("expected an RGB triple")
    if not np.all((rgb >= 0.0) & (rgb <= 1.0)):
        raise ValueError("pixel channels must lie in [0, 1]")
    return apply_enhancement_vec(rgb, params.to_vector())


def render_reference(image: np.ndarray, params: EnhanceParams) -> np.ndarray:
    """Apply the pipeline to an 8-bit (H, W, 3) image, returning 8-bit output."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ValueError("expected a uint8 (H, W, 3) image")
    out = apply_enhancement_vec(image / 255.0, params.to_vector())
    return np.rint(out * 255.0).astype(np.uint8)


def golden_vectors(count: int = 1024, seed: int = 20240) -> list[dict]:
    """Reference (pixel, params, output) triples for cross-implementation checks.

    Includes deterministic edge cases (black/white/primary pixels, neutral
    and extreme parameters) followed by random draws.
    """
    rng = stream(seed, 777)
    cases: list[tuple[np.ndarray, np.ndarray]] = []
    edge_pixels = [
        np.zeros(3),
        np.ones(3),
        np.full(3, 0.5),
        np.array([1.0, 0.0, 0.0]),
        np.array([0.0, 1.0, 0.0]),
        np.array([0.0, 0.0, 1.0]),
    ]
    edge_params = [
        np.full(PARAM_COUNT, 0.5),
        np.zeros(PARAM_COUNT),
        np.ones(PARAM_COUNT),
        np.concatenate([[1.0, 0.5, 0.5], np.full(9, 0.5)]),
        np.concatenate([[0.5, 1.0, 0.5], np.full(9, 0.5)]),
        np.concatenate([[0.5, 0.5, 1.0], np.full(9, 0.5)]),
    ]
    for px in edge_pixels:
        for pv in edge_params:
            cases.append((px, pv))
    while len(cases) < count:
        cases.append((rng.uniform(0.0, 1.0, 3), rng.uniform(0.0, 1.0, PARAM_COUNT)))
    out = []
    for px, pv in cases:
        out.append({
            "rgb": list(px),
            "params": list(pv),
            "out": list(apply_enhancement_vec(px, pv)),
        })
    return out


def golden_vectors_json(count: int = 1024, seed: int = 20240) -> str:
    return jsonio.dumps(golden_vectors(count, seed), indent=2)
