"""Camera-pose encoding, field-of-view algebra, and crop-aware intrinsics
updates for square face crops.

The 9-value camera pose encoding is [t (3), q (4), fov_h, fov_w]: a rigid
pose plus the vertical and horizontal fields of view in radians.  Fields of
view are tracked per axis; square pixels are not assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidCrop
from .geometry import Rotation


@dataclass(frozen=True)
class CameraPose:
    """Pose plus field of view: translation (mm), rotation, fov_h/fov_w (rad)."""

    t: np.ndarray
    q: Rotation
    fov_h: float
    fov_w: float

    def __post_init__(self):
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float).reshape(3))
        for name in ("fov_h", "fov_w"):
            v = getattr(self, name)
            if not 0.0 < v < math.pi:
                raise DomainError(f"{name}={v} outside (0, pi)")

    def as_vector(self) -> np.ndarray:
        """9-value encoding [t, q, fov_h, fov_w]."""
        return np.concatenate([self.t, self.q.quat, [self.fov_h, self.fov_w]])


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: float
    height: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise DomainError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise DomainError("image dimensions must be positive")


@dataclass(frozen=True)
class CropSpec:
    """Square crop: top-left corner, side length, and output resolution."""

    x0: float
    y0: float
    side: float
    out_size: float

    @property
    def scale(self) -> float:
        return self.out_size / self.side


def logtan_fov(phi: float) -> float:
    """ln(tan(phi/2)); monotone reparameterization of field of view.

    Differences of this quantity are invariant to uniform crop scaling,
    which is what makes it usable as an inter-frame focal-ratio target.
    """
    if not 0.0 < phi < math.pi:
        raise DomainError(f"fov {phi} outside (0, pi)")
    return math.log(math.tan(0.5 * phi))


def intrinsics_from_fov(fov_w: float, fov_h: float, width: float, height: float) -> Intrinsics:
    """Pinhole intrinsics with principal point at the image center."""
    if not (0.0 < fov_w < math.pi and 0.0 < fov_h < math.pi):
        raise DomainError("fov outside (0, pi)")
    if width <= 0 or height <= 0:
        raise DomainError("image dimensions must be positive")
    fx = (width / 2.0) / math.tan(fov_w / 2.0)
    fy = (height / 2.0) / math.tan(fov_h / 2.0)
    return Intrinsics(fx, fy, width / 2.0, height / 2.0, width, height)


def fov_from_intrinsics(k: Intrinsics) -> tuple:
    """(fov_w, fov_h) in radians; inverse of intrinsics_from_fov."""
    return (2.0 * math.atan((k.width / 2.0) / k.fx),
            2.0 * math.atan((k.height / 2.0) / k.fy))


def crop_update_intrinsics(k: Intrinsics, crop: CropSpec) -> Intrinsics:
    """Intrinsics after cropping a square region and resizing to out_size.

    With s = out_size/side: focal lengths scale by s, the principal point
    shifts by the crop corner then scales by s.  Projections through the
    updated intrinsics match crop-then-resize of the original projections
    exactly.
    """
    if crop.side <= 0:
        raise InvalidCrop(f"side={crop.side}")
    if crop.out_size <= 0:
        raise InvalidCrop(f"out_size={crop.out_size}")
    if (crop.x0 >= k.width or crop.y0 >= k.height
            or crop.x0 + crop.side <= 0 or crop.y0 + crop.side <= 0):
        raise InvalidCrop("crop rectangle does not intersect the image")
    s = crop.scale
    return Intrinsics(
        fx=k.fx * s,
        fy=k.fy * s,
        cx=(k.cx - crop.x0) * s,
        cy=(k.cy - crop.y0) * s,
        width=crop.out_size,
        height=crop.out_size,
    )


def compose_crops(first: CropSpec, second: CropSpec) -> CropSpec:
    """Single CropSpec equivalent to applying first, then second."""
    s1 = first.scale
    return CropSpec(
        x0=first.x0 + second.x0 / s1,
        y0=first.y0 + second.y0 / s1,
        side=second.side / s1,
        out_size=second.out_size,
    )


def project(k: Intrinsics, point) -> np.ndarray:
    """Pinhole projection of a camera-frame 3D point (z > 0) to pixels."""
    p = np.asarray(point, dtype=float)
    if p[2] <= 0:
        raise DomainError("point behind the camera")
    return np.array([k.fx * p[0] / p[2] + k.cx,
                     k.fy * p[1] / p[2] + k.cy])
