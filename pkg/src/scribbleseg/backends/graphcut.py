"""Scribble-seeded min-cut segmentation on the 6-connected voxel grid."""

from __future__ import annotations

import numpy as np

from ..geodesic import determine_roi
from ..simulate import ScribbleSet
from ..volume import ModalityPair, empty_mask
from .base import SegmentationBackend, register_backend
from .encoding import InteractionChannels, enforce_constraints
from ._maxflow import solve_min_cut


class EmptyScribbleClassError(ValueError):
    """Graph cut needs at least one scribble of each class."""


class FlowOverflowError(RuntimeError):
    """The computed flow saturated the infinite terminal links."""


@register_backend
class GraphCut(SegmentationBackend):
    """Boykov-Jolly style energy minimization within a scribble box.

    Terminal capacities are negative log likelihoods under per-class Gaussian
    intensity models fit from the scribbled anatomical voxels (infinite links
    pin the scribbles themselves); neighbor links weigh intensity contrast by
    ``w_pair * exp(-(dI)^2 / (2 sigma^2)) / dist``. The returned mask is the
    source side of the min cut; voxels outside the box are background.
    """

    name = "graphcut"
    supports_refine = True

    def __init__(self, w_pair: float = 1.0, sigma: float = 0.1,
                 expansion: float = 2.0, var_floor: float = 1e-6):
        self.w_pair = w_pair
        self.sigma = sigma
        self.expansion = expansion
        self.var_floor = var_floor

    def propose(self, pair: ModalityPair) -> np.ndarray:
        """No proposal model: the baseline starts from an empty mask."""
        return empty_mask(pair.dims)

    def _class_model(self, intensities: np.ndarray) -> tuple[float, float]:
        mu = float(intensities.mean())
        var = max(float(intensities.var()), float(self.var_floor))
        return mu, var

    def _neg_log_likelihood(self, values: np.ndarray, mu: float, var: float) -> np.ndarray:
        return 0.5 * np.log(2.0 * np.pi * var) + (values - mu) ** 2 / (2.0 * var)

    def segment(self, pair: ModalityPair, scribbles: ScribbleSet) -> np.ndarray:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        fg, bg = scribbles.foreground, scribbles.background
        if not fg.any() or not bg.any():
            raise EmptyScribbleClassError("graph cut requires both scribble classes")
        roi = determine_roi(fg | bg, None, self.expansion, pair.dims)
        sl = roi.slices()
        intensity = pair.anatomical.data.astype(np.float64)

        block = intensity[sl]
        fg_block = fg[sl]
        bg_block = bg[sl]
        n = block.size

        mu_fg, var_fg = self._class_model(intensity[fg])
        mu_bg, var_bg = self._class_model(intensity[bg])
        u_fg = self._neg_log_likelihood(block, mu_fg, var_fg).ravel()
        u_bg = self._neg_log_likelihood(block, mu_bg, var_bg).ravel()
        # per-voxel shift keeps capacities nonnegative without changing the argmin
        shift = np.minimum(u_fg, u_bg)
        cap_source = u_bg - shift
        cap_sink = u_fg - shift
        fg_flat = fg_block.ravel()
        bg_flat = bg_block.ravel()
        cap_source[fg_flat] = 0.0
        cap_sink[fg_flat] = 0.0
        cap_source[bg_flat] = 0.0
        cap_sink[bg_flat] = 0.0

        ids = np.arange(n, dtype=np.int64).reshape(block.shape)
        pair_u, pair_v, pair_cap = [], [], []
        for axis in range(3):
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[axis] = slice(None, -1)
            hi[axis] = slice(1, None)
            delta = block[tuple(hi)] - block[tuple(lo)]
            weight = (
                self.w_pair
                * np.exp(-(delta**2) / (2.0 * self.sigma**2))
                / pair.spacing[axis]
            )
            pair_u.append(ids[tuple(lo)].ravel())
            pair_v.append(ids[tuple(hi)].ravel())
            pair_cap.append(weight.ravel())
        pair_u = np.concatenate(pair_u)
        pair_v = np.concatenate(pair_v)
        pair_cap = np.concatenate(pair_cap)

        inf_cap = float(cap_source.sum() + cap_sink.sum() + 2.0 * pair_cap.sum()) + 1.0
        cap_source[fg_flat] = inf_cap
        cap_sink[bg_flat] = inf_cap

        source = n
        sink = n + 1
        voxels = np.arange(n, dtype=np.int64)
        frm = np.concatenate([
            np.repeat(source, n), voxels,      # source links + reverses
            voxels, np.repeat(sink, n),        # sink links + reverses
            pair_u, pair_v,                    # neighbor links, both directions
        ])
        to = np.concatenate([
            voxels, np.repeat(source, n),
            np.repeat(sink, n), voxels,
            pair_v, pair_u,
        ])
        cap = np.concatenate([
            cap_source, np.zeros(n),
            cap_sink, np.zeros(n),
            pair_cap, pair_cap,
        ])
        # interleave forward/reverse so partners sit at 2i and 2i+1
        order = np.empty(frm.size, dtype=np.int64)
        half = frm.size // 2
        fwd = np.concatenate([np.arange(n), 2 * n + np.arange(n), 4 * n + np.arange(pair_u.size)])
        rev = np.concatenate([n + np.arange(n), 3 * n + np.arange(n), 4 * n + pair_u.size + np.arange(pair_u.size)])
        order[0::2] = fwd
        order[1::2] = rev
        assert half == fwd.size

        flow, side = solve_min_cut(n + 2, frm[order], to[order], cap[order], source, sink)
        if flow >= inf_cap:
            raise FlowOverflowError("min cut saturated a constraint link")
        out = empty_mask(pair.dims)
        out[sl] = side[:n].reshape(block.shape)
        return out

    predict = segment

    def refine(self, pair: ModalityPair, channels: InteractionChannels) -> np.ndarray:
        """Cut within the scribble box, keeping the previous mask elsewhere.

        Until both classes have scribbles there is nothing to cut and the
        previous mask passes through (constraints still applied).
        """
        fg_seeds, bg_seeds = channels.seed_masks()
        scribbles = ScribbleSet(fg_seeds, bg_seeds)
        prev = channels.prev_mask
        if not fg_seeds.any() or not bg_seeds.any():
            return enforce_constraints(prev.copy(), scribbles)
        cut = self.segment(pair, scribbles)
        roi = determine_roi(fg_seeds | bg_seeds, None, self.expansion, pair.dims)
        out = prev.copy()
        sl = roi.slices()
        out[sl] = cut[sl]
        return enforce_constraints(out, scribbles)
