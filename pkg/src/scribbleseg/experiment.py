"""Desk-scale experiment harness: simulated-annotator loops and GDT benchmarks."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .backends import encode_interactions, get_backend
from .defaults import REFINE_GEODESIC, REFINE_ROI_EXPANSION
from .geodesic import GeodesicConfig, gdt_exact, gdt_full, gdt_roi
from .io import save_mask_nifti, save_volume
from .simulate import ScribbleSet, SimulationConfig, corrective_annotator_step, make_rng
from .validation import check_dims
from .volume import BoundingBox, ModalityPair, Volume, dice

STOP_DICE = 0.95  # the automated stand-in for "the user is satisfied"


@dataclass
class IterationRecord:
    index: int            # 0 is the proposal
    kind: str             # "propose" | "refine"
    dice: float
    step_ms: float        # backend propose/refine wall clock
    encode_ms: float = 0.0
    gdt_visits: int = 0
    fg_scribbles: int = 0
    bg_scribbles: int = 0


@dataclass
class ExperimentReport:
    iterations: list[IterationRecord]
    stop_reason: str
    seed: int
    total_ms: float
    config: dict = field(default_factory=dict)

    @property
    def dice_trajectory(self) -> list[float]:
        return [it.dice for it in self.iterations]

    @property
    def final_dice(self) -> float:
        return self.iterations[-1].dice

    def to_dict(self) -> dict:
        return {
            "iterations": [asdict(it) for it in self.iterations],
            "dice_trajectory": self.dice_trajectory,
            "final_dice": self.final_dice,
            "stop_reason": self.stop_reason,
            "seed": self.seed,
            "total_ms": self.total_ms,
            "config": self.config,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), "utf-8")


def run_interactive_experiment(
    pair: ModalityPair,
    gt: np.ndarray,
    backend: str = "geodesic_refiner",
    backend_params: dict | None = None,
    budget: int = 5,
    sim_cfg: SimulationConfig = SimulationConfig(),
    geo_cfg: GeodesicConfig = REFINE_GEODESIC,
    roi_expansion: float = REFINE_ROI_EXPANSION,
    stop_dice: float = STOP_DICE,
    seed: int = 0,
    out_dir: str | Path | None = None,
) -> ExperimentReport:
    """Propose, then loop corrective scribbles -> refine until done.

    Stops on the Dice threshold, an empty correction (prediction equals the
    ground truth), or budget exhaustion. With ``out_dir`` set, every
    iteration's mask is persisted as raw_json for offline recomputation.
    """
    instance = get_backend(backend, backend_params)
    rng = make_rng(seed)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        save_mask_nifti(gt, pair.spacing, out / "gt.nii")

    t_start = time.perf_counter()
    t0 = time.perf_counter()
    mask = instance.propose(pair)
    step_ms = (time.perf_counter() - t0) * 1000.0
    iterations = [IterationRecord(0, "propose", dice(mask, gt), step_ms)]
    scribbles = ScribbleSet.empty(pair.dims)
    if out is not None:
        save_mask_nifti(mask, pair.spacing, out / "iteration_000.nii")

    stop_reason = "budget"
    for i in range(1, budget + 1):
        if iterations[-1].dice >= stop_dice:
            stop_reason = "dice_threshold"
            break
        delta = corrective_annotator_step(gt, mask, sim_cfg, rng)
        if delta.is_empty():
            stop_reason = "converged"
            break
        scribbles = scribbles.merged_with(delta)

        t0 = time.perf_counter()
        channels = encode_interactions(pair, scribbles, geo_cfg,
                                       roi_expansion=roi_expansion, prev_mask=mask)
        encode_ms = (time.perf_counter() - t0) * 1000.0
        t0 = time.perf_counter()
        mask = instance.refine(pair, channels)
        step_ms = (time.perf_counter() - t0) * 1000.0
        visits = channels.fg_gdt.sweep_visits + channels.bg_gdt.sweep_visits
        iterations.append(IterationRecord(
            i, "refine", dice(mask, gt), step_ms, encode_ms, visits,
            int(scribbles.foreground.sum()), int(scribbles.background.sum()),
        ))
        if out is not None:
            save_mask_nifti(mask, pair.spacing, out / f"iteration_{i:03d}.nii")

    report = ExperimentReport(
        iterations=iterations,
        stop_reason=stop_reason,
        seed=seed,
        total_ms=(time.perf_counter() - t_start) * 1000.0,
        config={
            "backend": backend,
            "backend_params": backend_params or {},
            "budget": budget,
            "stop_dice": stop_dice,
            "roi_expansion": roi_expansion,
            "geodesic": {"lam": geo_cfg.lam, "passes": geo_cfg.passes,
                         "neighborhood": geo_cfg.neighborhood},
            "simulation": asdict(sim_cfg),
        },
    )
    if out is not None:
        report.save(out / "report.json")
    return report


def centered_roi(dims, fraction: float) -> BoundingBox:
    """Centered box whose side is ``fraction`` of each dimension."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("roi fraction must be in (0, 1]")
    mins, maxs = [], []
    for d in dims:
        side = max(1, round(d * fraction))
        lo = (d - side) // 2
        mins.append(lo)
        maxs.append(lo + side)
    return BoundingBox(tuple(mins), tuple(maxs))


def bench_gdt(
    dims,
    roi_fraction: float,
    cfg: GeodesicConfig = GeodesicConfig(),
    repetitions: int = 3,
    seed: int = 0,
    oracle_limit: int = 24,
) -> dict:
    """Time the full-volume transform against its RoI-restricted version.

    Returns one row: median wall-clock times, speedup, in-RoI mean absolute
    difference, and (for volumes up to ``oracle_limit``³) the mean relative
    error of the full transform against the exact oracle.
    """
    dims = check_dims(dims)
    rng = make_rng(seed)
    volume = Volume(rng.random(dims).astype(np.float32))
    roi = centered_roi(dims, roi_fraction)
    center = tuple((lo + hi) // 2 for lo, hi in zip(roi.mins, roi.maxs))
    seeds = np.zeros(dims, dtype=bool)
    seeds[center] = True

    gdt_full(volume, seeds, GeodesicConfig(lam=cfg.lam, passes=1, neighborhood=cfg.neighborhood))  # JIT warmup

    t_full, t_roi = [], []
    full_map = roi_map = None
    for _ in range(repetitions):
        t0 = time.perf_counter()
        full_map = gdt_full(volume, seeds, cfg)
        t_full.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        roi_map = gdt_roi(volume, seeds, cfg, roi)
        t_roi.append(time.perf_counter() - t0)

    sl = roi.slices()
    diff = float(np.abs(full_map.data[sl] - roi_map.data[sl]).mean())
    row = {
        "dims": "x".join(str(d) for d in dims),
        "roi_voxels": roi.num_voxels,
        "total_voxels": int(np.prod(dims)),
        "t_full_ms": float(np.median(t_full) * 1000.0),
        "t_roi_ms": float(np.median(t_roi) * 1000.0),
        "speedup": float(np.median(t_full) / np.median(t_roi)),
        "mean_abs_diff_in_roi": diff,
        "mean_rel_err_vs_oracle": float("nan"),
    }
    if max(dims) <= oracle_limit:
        exact = gdt_exact(volume, seeds, cfg).data
        nz = exact > 0
        row["mean_rel_err_vs_oracle"] = float(
            ((full_map.data[nz] - exact[nz]) / exact[nz]).mean()
        )
    return row


def save_phantom_files(pair: ModalityPair, gt: np.ndarray, out_dir: str | Path,
                       fmt: str = "nifti1") -> dict:
    """Write phantom volumes + ground truth; returns the written refs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = ".nii" if fmt == "nifti1" else ".json"
    refs = {
        "anatomical": f"anatomical{ext}",
        "functional": f"functional{ext}",
        "gt": "gt.nii",
    }
    save_volume(pair.anatomical, out / refs["anatomical"], fmt)
    save_volume(pair.functional, out / refs["functional"], fmt)
    save_mask_nifti(gt, pair.spacing, out / refs["gt"])
    return refs
