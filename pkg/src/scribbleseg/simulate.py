"""Ellipsoid-based annotation sampling and the corrective annotator policy.

Synthetic annotations are axis-aligned ellipsoids of random center and random
semi-axes. Foreground centers are drawn uniformly from the ground-truth mask;
background centers from the margin between the ground truth and its expanded
bounding box, mimicking annotators who click just outside the object border.
Each semi-axis is ``max(min_axis, r * alpha * dim)`` with r ~ U(0,1) drawn
independently per axis.

All randomness flows through a counter-based Philox generator so identical
seeds reproduce identical scribbles across runs and platforms. Draw order per
ellipsoid: center index, then the three semi-axis variates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .validation import Dims, as_mask, check_dims, check_same_shape
from .volume import BoundingBox, bbox_of_mask, empty_mask, expand_bbox, largest_component


class EmptyMarginError(ValueError):
    """The expanded bounding box holds no non-foreground candidate voxels."""


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class SimulationConfig:
    """Sampler constants.

    alpha scales semi-axes as a fraction of each volume dimension, beta
    scales the ground-truth bounding box for background candidates, min_axis
    floors semi-axes in voxels. Count ranges are inclusive.
    """

    alpha: float = 0.05
    beta: float = 2.0
    min_axis: float = 2.0
    fg_count_range: tuple[int, int] = (1, 3)
    bg_count_range: tuple[int, int] = (0, 1)
    rng_seed: int = 0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        if self.min_axis < 1:
            raise ValueError("min_axis must be >= 1")
        for lo, hi in (self.fg_count_range, self.bg_count_range):
            if lo < 0 or hi < lo:
                raise ValueError("count ranges must be nonempty and nonnegative")


@dataclass(frozen=True)
class Ellipsoid:
    """Axis-aligned ellipsoid: integer voxel center and per-axis semi-axes."""

    center: tuple[int, int, int]
    semi_axes: tuple[float, float, float]

    def __post_init__(self):
        if any(a <= 0 for a in self.semi_axes):
            raise ValueError("semi-axes must be positive")


@dataclass(frozen=True)
class ScribbleSet:
    """Disjoint foreground/background annotation masks on one grid."""

    foreground: np.ndarray
    background: np.ndarray

    def __post_init__(self):
        fg = as_mask(self.foreground, name="foreground")
        bg = as_mask(self.background, fg.shape, "background")
        if np.any(fg & bg):
            raise ValueError("foreground and background scribbles overlap")
        object.__setattr__(self, "foreground", fg)
        object.__setattr__(self, "background", bg)

    @classmethod
    def empty(cls, dims: Dims) -> "ScribbleSet":
        return cls(empty_mask(dims), empty_mask(dims))

    @property
    def dims(self) -> Dims:
        return self.foreground.shape  # type: ignore[return-value]

    def is_empty(self) -> bool:
        return not (self.foreground.any() or self.background.any())

    def merged_with(self, delta: "ScribbleSet") -> "ScribbleSet":
        """Cumulative update: a re-scribbled voxel switches to the new class."""
        check_same_shape(self.foreground, delta.foreground, "scribble sets")
        fg = (self.foreground & ~delta.background) | delta.foreground
        bg = (self.background & ~delta.foreground) | delta.background
        return ScribbleSet(fg, bg)


def calc_ellipsoid(ellipsoid: Ellipsoid, dims: Dims) -> np.ndarray:
    """Rasterize an ellipsoid to a mask, clipped to the volume bounds.

    A voxel v belongs iff sum_k ((v_k - center_k) / axis_k)^2 <= 1; the center
    voxel always satisfies this.
    """
    dims = check_dims(dims)
    center = ellipsoid.center
    if any(not (0 <= c < d) for c, d in zip(center, dims)):
        raise ValueError(f"ellipsoid center {center} outside volume dims {dims}")
    mask = empty_mask(dims)
    los = [max(0, int(np.ceil(c - a))) for c, a in zip(center, ellipsoid.semi_axes)]
    his = [min(d, int(np.floor(c + a)) + 1) for c, a, d in zip(center, ellipsoid.semi_axes, dims)]
    grids = np.meshgrid(
        *(np.arange(lo, hi, dtype=np.float64) for lo, hi in zip(los, his)), indexing="ij"
    )
    q = sum(((g - c) / a) ** 2 for g, c, a in zip(grids, center, ellipsoid.semi_axes))
    mask[los[0] : his[0], los[1] : his[1], los[2] : his[2]] = q <= 1.0
    return mask


def clip_margin(expanded: BoundingBox, gt: np.ndarray) -> np.ndarray:
    """Voxel coordinates inside ``expanded`` that are not ground-truth foreground."""
    gt = as_mask(gt, name="gt")
    region = expanded.region_mask(gt.shape)
    candidates = np.argwhere(region & ~gt)
    if candidates.shape[0] == 0:
        raise EmptyMarginError("ground truth fills the expanded bounding box")
    return candidates


def _sample_axes(dims: Dims, cfg: SimulationConfig, rng: np.random.Generator):
    r = rng.random(3)
    return tuple(max(cfg.min_axis, float(r[k]) * cfg.alpha * dims[k]) for k in range(3))


def draw_annotation(
    gt: np.ndarray,
    image_dims: Dims,
    cfg: SimulationConfig,
    kind: str,
    rng: np.random.Generator,
) -> Ellipsoid:
    """Draw one random annotation ellipsoid of the given class.

    Foreground centers come uniformly from the ground truth; background
    centers uniformly from the non-foreground voxels of its beta-expanded
    bounding box.
    """
    dims = check_dims(image_dims)
    gt = as_mask(gt, dims, "gt")
    if kind == "foreground":
        candidates = np.argwhere(gt)
        if candidates.shape[0] == 0:
            raise ValueError("ground truth mask is empty")
    elif kind == "background":
        box = expand_bbox(bbox_of_mask(gt), cfg.beta, dims)
        candidates = clip_margin(box, gt)
    else:
        raise ValueError(f"kind must be 'foreground' or 'background', got {kind!r}")
    center = tuple(int(v) for v in candidates[int(rng.integers(candidates.shape[0]))])
    return Ellipsoid(center, _sample_axes(dims, cfg, rng))


def sample_user_input(
    gt: np.ndarray,
    image_dims: Dims,
    cfg: SimulationConfig,
    kind: str,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw one random annotation ellipsoid of the given class as a mask."""
    dims = check_dims(image_dims)
    return calc_ellipsoid(draw_annotation(gt, dims, cfg, kind, rng), dims)


def sample_annotation_counts(
    cfg: SimulationConfig, rng: np.random.Generator
) -> tuple[int, int]:
    """Draw (n_foreground, n_background) uniformly from the configured ranges."""
    n_fg = int(rng.integers(cfg.fg_count_range[0], cfg.fg_count_range[1] + 1))
    n_bg = int(rng.integers(cfg.bg_count_range[0], cfg.bg_count_range[1] + 1))
    return n_fg, n_bg


def simulate_training_annotations(
    gt: np.ndarray,
    dims: Dims,
    cfg: SimulationConfig,
    rng: np.random.Generator,
) -> ScribbleSet:
    """Sample a training-style scribble set for one volume.

    Foreground ellipsoids are only center-constrained (they may spill past the
    ground truth); background voxels never overlap ground-truth foreground,
    and foreground wins any fg/bg overlap. An empty background margin
    downgrades the background count to zero with a warning.
    """
    dims = check_dims(dims)
    gt = as_mask(gt, dims, "gt")
    n_fg, n_bg = sample_annotation_counts(cfg, rng)

    fg = empty_mask(dims)
    for _ in range(n_fg):
        fg |= sample_user_input(gt, dims, cfg, "foreground", rng)
    bg = empty_mask(dims)
    for _ in range(n_bg):
        try:
            bg |= sample_user_input(gt, dims, cfg, "background", rng)
        except EmptyMarginError:
            warnings.warn("background margin empty; dropping background annotations")
            break
    bg &= ~gt
    bg &= ~fg
    return ScribbleSet(fg, bg)


# tuned on phantom sweeps: radius of a corrective dab relative to how deep
# inside the error component its center sits
CORRECTIVE_DEPTH_FACTOR = 2.0


def _deepest_point(component: np.ndarray) -> tuple[tuple[int, int, int], float]:
    """Deepest voxel of a component and its distance to the complement."""
    depth = ndimage.distance_transform_edt(component)
    center = np.unravel_index(int(np.argmax(depth)), component.shape)
    return tuple(int(v) for v in center), float(depth[center])


def corrective_annotator_step(
    gt: np.ndarray,
    prediction: np.ndarray,
    cfg: SimulationConfig,
    rng: np.random.Generator,
) -> ScribbleSet:
    """One simulated correction: scribble the largest error components.

    Places a foreground ellipsoid centered in the largest connected false-
    negative component (clipped to the ground truth) and a background
    ellipsoid centered in the largest false-positive component (clipped to
    its complement). Either class is omitted when it has no errors; the
    returned set contains only the new scribbles.

    Unlike the training sampler, the corrective dab is sized to the error it
    targets (a ball scaled from the component's interior depth) rather than
    drawn at random: a user correcting an obvious error covers it. ``rng`` is
    accepted for policy variants that add jitter; the default policy is fully
    deterministic.
    """
    del rng  # deterministic policy; kept in the signature for drop-in variants
    gt = as_mask(gt, name="gt")
    prediction = as_mask(prediction, gt.shape, "prediction")
    dims: Dims = gt.shape  # type: ignore[assignment]

    def dab(component: np.ndarray | None, keep: np.ndarray) -> np.ndarray:
        if component is None:
            return empty_mask(dims)
        center, depth = _deepest_point(component)
        radius = max(cfg.min_axis, CORRECTIVE_DEPTH_FACTOR * depth)
        return calc_ellipsoid(Ellipsoid(center, (radius, radius, radius)), dims) & keep

    fg = dab(largest_component(gt & ~prediction), gt)
    bg = dab(largest_component(prediction & ~gt), ~gt)
    return ScribbleSet(fg, bg)
