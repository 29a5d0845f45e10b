"""Body regions derived from head boxes plus geometric pair descriptors.

A body region extends a head box to 3x its width and 6x its height,
horizontally centered on the head and top-aligned with it, then clamped to
the image. The anchor rule (centered, top-aligned) follows common person
crop conventions; it is a configuration point, not ground truth.

The relative-distance and relative-size channels are emitted both as raw
scalars and as binary categories. The default category boundaries
(close/far at 2.0 region diagonals, small/large at area ratio 1.5) are
package defaults, overridable per call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .annotations import BBox, PersonPair
from .errors import InputError

BODY_WIDTH_FACTOR = 3.0
BODY_HEIGHT_FACTOR = 6.0
CLOSE_DISTANCE_THRESHOLD = 2.0
LARGE_RATIO_THRESHOLD = 1.5

LOC_SCALE_DIM = 14  # 2 boxes x 4 coords + (raw, far, close) + (raw, large, small)


@dataclass(frozen=True)
class RegionPair:
    """Head and derived body boxes for both persons of a pair."""

    head_a: BBox
    head_b: BBox
    body_a: BBox
    body_b: BBox
    clamped_a: bool
    clamped_b: bool


@dataclass(frozen=True)
class RelativeGeometry:
    distance_raw: float
    distance_class: str  # "close" | "far"
    ratio_raw: float
    ratio_class: str     # "large" | "small"


@dataclass(frozen=True)
class GeomFeature:
    """Image-normalized box coordinates plus pair-relative channels.

    Box tuples are (x, y, w, h) with x and w divided by image width, y and
    h by image height. Distance and ratio are computed from the heads.
    """

    head_a: tuple
    head_b: tuple
    body_a: tuple
    body_b: tuple
    distance_raw: float
    distance_class: str
    ratio_raw: float
    ratio_class: str


def body_from_head(head: BBox, image_w: float, image_h: float) -> tuple[BBox, bool]:
    """Expand a head box to its body box, clamped to the image.

    Returns (body, clamped). The head must lie inside the image.
    """
    if head.x < 0 or head.y < 0 or head.x + head.w > image_w or head.y + head.h > image_h:
        raise InputError(f"head {head} outside {image_w}x{image_h} image")
    cx = head.x + head.w / 2.0
    body = BBox(
        x=cx - BODY_WIDTH_FACTOR * head.w / 2.0,
        y=head.y,
        w=BODY_WIDTH_FACTOR * head.w,
        h=BODY_HEIGHT_FACTOR * head.h,
    )
    clamped_body = body.clamped(image_w, image_h)
    return clamped_body, clamped_body != body


def region_pair(pair: PersonPair) -> RegionPair:
    body_a, clamped_a = body_from_head(pair.person_a.head, pair.image_w, pair.image_h)
    body_b, clamped_b = body_from_head(pair.person_b.head, pair.image_w, pair.image_h)
    return RegionPair(pair.person_a.head, pair.person_b.head, body_a, body_b, clamped_a, clamped_b)


def relative_geometry(
    box_a: BBox,
    box_b: BBox,
    close_threshold: float = CLOSE_DISTANCE_THRESHOLD,
    ratio_threshold: float = LARGE_RATIO_THRESHOLD,
) -> RelativeGeometry:
    """Distance in mean-diagonal units and larger-over-smaller area ratio."""
    if box_a.area <= 0 or box_b.area <= 0:
        raise InputError("regions must have positive area")
    (ax, ay), (bx, by) = box_a.center, box_b.center
    mean_diag = (box_a.diagonal + box_b.diagonal) / 2.0
    distance = math.hypot(ax - bx, ay - by) / mean_diag
    ratio = max(box_a.area, box_b.area) / min(box_a.area, box_b.area)
    return RelativeGeometry(
        distance_raw=distance,
        distance_class="close" if distance < close_threshold else "far",
        ratio_raw=ratio,
        ratio_class="large" if ratio >= ratio_threshold else "small",
    )


def _normalized(box: BBox, image_w: float, image_h: float) -> tuple:
    return (box.x / image_w, box.y / image_h, box.w / image_w, box.h / image_h)


def geom_feature(
    pair: PersonPair,
    close_threshold: float = CLOSE_DISTANCE_THRESHOLD,
    ratio_threshold: float = LARGE_RATIO_THRESHOLD,
) -> GeomFeature:
    """Normalized head/body coordinates plus head-based relative channels.

    Swapping the two person slots swaps the per-person tuples but leaves
    distance and ratio unchanged.
    """
    regions = region_pair(pair)
    rel = relative_geometry(regions.head_a, regions.head_b, close_threshold, ratio_threshold)
    w, h = pair.image_w, pair.image_h
    return GeomFeature(
        head_a=_normalized(regions.head_a, w, h),
        head_b=_normalized(regions.head_b, w, h),
        body_a=_normalized(regions.body_a, w, h),
        body_b=_normalized(regions.body_b, w, h),
        distance_raw=rel.distance_raw,
        distance_class=rel.distance_class,
        ratio_raw=rel.ratio_raw,
        ratio_class=rel.ratio_class,
    )


def oriented_persons(pair: PersonPair):
    """Pair orientation used everywhere downstream: left-most head first.

    Ties on head x fall back to identity id so the orientation is total.
    """
    a, b = pair.person_a, pair.person_b
    if (a.head.x, a.identity_id) <= (b.head.x, b.identity_id):
        return a, b
    return b, a


def loc_scale_vector(
    pair: PersonPair,
    region: str = "head",
    close_threshold: float = CLOSE_DISTANCE_THRESHOLD,
    ratio_threshold: float = LARGE_RATIO_THRESHOLD,
) -> np.ndarray:
    """Location-and-scale feature block for one region type (14 dims).

    Layout: left person (x, y, w, h), right person (x, y, w, h),
    distance (raw, far, close), size ratio (raw, large, small), with the
    relative channels computed from the same region's boxes. Person order
    is canonicalized with ``oriented_persons`` so the block is invariant
    to slot order in the input pair.
    """
    if region not in ("head", "body"):
        raise InputError(f"region must be 'head' or 'body', got {region!r}")
    first, second = oriented_persons(pair)
    if region == "head":
        box_1, box_2 = first.head, second.head
    else:
        box_1, _ = body_from_head(first.head, pair.image_w, pair.image_h)
        box_2, _ = body_from_head(second.head, pair.image_w, pair.image_h)
    rel = relative_geometry(box_1, box_2, close_threshold, ratio_threshold)
    w, h = pair.image_w, pair.image_h
    return np.array(
        [
            *_normalized(box_1, w, h),
            *_normalized(box_2, w, h),
            rel.distance_raw,
            1.0 if rel.distance_class == "far" else 0.0,
            1.0 if rel.distance_class == "close" else 0.0,
            rel.ratio_raw,
            1.0 if rel.ratio_class == "large" else 0.0,
            1.0 if rel.ratio_class == "small" else 0.0,
        ],
        dtype=np.float64,
    )
