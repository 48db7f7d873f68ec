"""Raster export of lattice fields.

One image pixel per lattice pixel; row 0 of the grid is the top image row.
Discrete fields use a categorical palette, continuous fields a linear ramp
(gray by default, or a viridis-style ramp) over the range of unmasked
values; a constant field maps to the ramp midpoint.  Masked pixels are
fully transparent.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .fields import DiscreteField, RealField

# categorical palette for discrete fields (cycled when C+1 exceeds it)
CATEGORICAL = (
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127),
    (188, 189, 34), (23, 190, 207),
)

# coarse viridis-style anchors, linearly interpolated
_VIRIDIS = np.array([
    (68, 1, 84), (71, 44, 122), (59, 81, 139), (44, 113, 142),
    (33, 144, 141), (39, 173, 129), (92, 200, 99), (170, 220, 50),
    (253, 231, 37),
], dtype=np.float64)


def _ramp(u: np.ndarray, kind: str) -> np.ndarray:
    """Map values in [0, 1] to RGB (..., 3) uint8."""
    u = np.clip(u, 0.0, 1.0)
    if kind == "gray":
        g = np.round(u * 255).astype(np.uint8)
        return np.stack([g, g, g], axis=-1)
    if kind == "viridis":
        pos = u * (len(_VIRIDIS) - 1)
        lo = np.floor(pos).astype(int)
        hi = np.minimum(lo + 1, len(_VIRIDIS) - 1)
        frac = (pos - lo)[..., None]
        rgb = _VIRIDIS[lo] * (1 - frac) + _VIRIDIS[hi] * frac
        return np.round(rgb).astype(np.uint8)
    raise ValueError(f"unknown ramp {kind!r}")


def render_field(field, palette: str = "auto") -> Image.Image:
    """Render a field to an RGBA image (masked pixels transparent).

    palette: for discrete fields "auto" means the categorical palette; for
    real fields it selects the ramp ("gray" or "viridis").
    """
    if isinstance(field, DiscreteField):
        rgba = np.zeros((field.height, field.width, 4), dtype=np.uint8)
        colors = np.array([CATEGORICAL[c % len(CATEGORICAL)]
                           for c in range(field.C + 1)], dtype=np.uint8)
        rgba[..., :3] = colors[field.labels]
        rgba[..., 3] = np.where(field.mask, 255, 0)
        rgba[~field.mask, :3] = 0
        return Image.fromarray(rgba, mode="RGBA")
    if isinstance(field, RealField):
        kind = "gray" if palette in ("auto", "gray") else palette
        vals = field.values[field.mask]
        lo, hi = float(vals.min()), float(vals.max())
        unit = np.full(field.values.shape, 0.5)
        if hi > lo:
            unit[field.mask] = (field.values[field.mask] - lo) / (hi - lo)
        rgba = np.zeros((field.height, field.width, 4), dtype=np.uint8)
        rgba[..., :3] = _ramp(unit, kind)
        rgba[..., 3] = np.where(field.mask, 255, 0)
        rgba[~field.mask, :3] = 0
        return Image.fromarray(rgba, mode="RGBA")
    raise TypeError("render_field expects a DiscreteField or RealField")


def render_to_png(field, path: str, palette: str = "auto") -> None:
    render_field(field, palette).save(path, format="PNG")
