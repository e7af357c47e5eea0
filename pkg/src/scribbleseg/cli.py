"""Command-line harness: phantom generation, GDT benchmarks, simulated
annotation experiments, session replay, and the HTTP service."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .defaults import REFINE_GEODESIC, REFINE_ROI_EXPANSION
from .experiment import (
    STOP_DICE,
    bench_gdt,
    run_interactive_experiment,
    save_phantom_files,
)
from .geodesic import GeodesicConfig
from .io import load_mask_nifti, load_volume
from .phantom import PhantomSpec, generate_phantom, standard_phantom_spec, with_seed
from .session import replay_log
from .simulate import Ellipsoid, SimulationConfig
from .volume import ModalityPair, dice, resample_to_grid

BENCH_COLUMNS = [
    "dims", "roi_voxels", "total_voxels", "t_full_ms", "t_roi_ms",
    "speedup", "mean_abs_diff_in_roi", "mean_rel_err_vs_oracle",
]


def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def _phantom_spec(args) -> PhantomSpec:
    if args.preset == "standard":
        return with_seed(standard_phantom_spec(), args.seed)
    dims = tuple(args.dims)
    center = tuple(args.lesion_center or (d // 2 for d in dims))
    axes = tuple(args.lesion_axes or (d / 6 for d in dims))
    return PhantomSpec(
        dims=dims,
        lesion=Ellipsoid(center, axes),
        ct_contrast=args.ct_contrast,
        pet_peak=args.pet_peak,
        noise_sigma_ct=args.noise_ct,
        noise_sigma_pet=args.noise_pet,
        pet_blur_sigma=args.pet_blur,
        rng_seed=args.seed,
    )


def cmd_phantom(args) -> int:
    spec = _phantom_spec(args)
    pair, gt = generate_phantom(spec)
    out = Path(args.out)
    refs = save_phantom_files(pair, gt, out, args.format)
    manifest = {"spec": {**asdict(spec), "lesion": {"center": list(spec.lesion.center),
                                                    "semi_axes": list(spec.lesion.semi_axes)}},
                "files": refs, "gt_voxels": int(gt.sum())}
    (out / "phantom.json").write_text(json.dumps(manifest, indent=2), "utf-8")
    print(f"wrote phantom to {out} ({int(gt.sum())} ground-truth voxels)")
    return 0


def cmd_bench_gdt(args) -> int:
    cfg = GeodesicConfig(lam=args.lam, passes=args.passes, neighborhood=args.neighborhood)
    rows = []
    for fraction in args.roi_fraction:
        row = bench_gdt(tuple(args.dims), fraction, cfg, repetitions=args.reps,
                        seed=args.seed, oracle_limit=args.oracle_limit)
        row["roi_fraction"] = fraction
        rows.append(row)
        print(f"dims={row['dims']} roi={fraction:g}: full={row['t_full_ms']:.1f}ms "
              f"roi={row['t_roi_ms']:.1f}ms speedup={row['speedup']:.1f}x "
              f"diff={row['mean_abs_diff_in_roi']:.3g}")
    out = Path(args.out)
    _write_csv(out / "bench_gdt.csv", rows, BENCH_COLUMNS + ["roi_fraction"])
    if args.check:
        worst = min(r["speedup"] for r in rows if r["roi_fraction"] < 1.0)
        if worst < args.min_speedup:
            print(f"CHECK FAILED: speedup {worst:.1f}x < {args.min_speedup}x", file=sys.stderr)
            return 1
    return 0


def _load_pair_and_gt(args) -> tuple[ModalityPair, np.ndarray]:
    if args.anatomical and args.functional and args.gt:
        anatomical = load_volume(args.anatomical)
        functional = load_volume(args.functional)
        if functional.dims != anatomical.dims or functional.spacing != anatomical.spacing:
            functional = resample_to_grid(functional, anatomical.dims, anatomical.spacing)
        gt = load_mask_nifti(args.gt)
        return ModalityPair(anatomical, functional), gt
    return generate_phantom(with_seed(standard_phantom_spec(), args.seed))


def cmd_simulate(args) -> int:
    pair, gt = _load_pair_and_gt(args)
    report = run_interactive_experiment(
        pair, gt,
        backend=args.backend,
        budget=args.budget,
        sim_cfg=SimulationConfig(rng_seed=args.seed),
        geo_cfg=GeodesicConfig(lam=args.lam, passes=args.passes,
                               neighborhood=REFINE_GEODESIC.neighborhood),
        roi_expansion=args.roi_expansion,
        stop_dice=args.stop_dice,
        seed=args.seed,
        out_dir=args.out,
    )
    rows = [asdict(it) for it in report.iterations]
    _write_csv(Path(args.out) / "iterations.csv", rows, list(rows[0].keys()))
    print(f"dice trajectory: {[round(d, 4) for d in report.dice_trajectory]} "
          f"(stop: {report.stop_reason})")
    if args.check and report.final_dice < args.min_dice:
        print(f"CHECK FAILED: final dice {report.final_dice:.3f} < {args.min_dice}",
              file=sys.stderr)
        return 1
    return 0


def cmd_replay(args) -> int:
    mask, session_id = replay_log(args.log, args.data_root)
    print(f"replayed {args.log} -> session {session_id}, {int(mask.sum())} voxels")
    if args.expect_mask:
        expected = load_mask_nifti(args.expect_mask)
        same = bool(np.array_equal(mask, expected))
        print(f"matches {args.expect_mask}: {same} (dice {dice(mask, expected):.4f})")
        return 0 if same else 1
    return 0


def cmd_serve(args) -> int:
    from .service import main as serve_main

    forwarded = []
    if args.config:
        forwarded += ["--config", args.config]
    if args.port is not None:
        forwarded += ["--port", str(args.port)]
    if args.data_root:
        forwarded += ["--data-root", args.data_root]
    serve_main(forwarded)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scribbleseg",
        description="scribble-driven interactive segmentation harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate a synthetic dual-modality volume pair")
    p.add_argument("--out", required=True)
    p.add_argument("--preset", choices=["standard", "custom"], default="standard")
    p.add_argument("--dims", type=int, nargs=3, default=[48, 48, 48])
    p.add_argument("--lesion-center", type=int, nargs=3, default=None)
    p.add_argument("--lesion-axes", type=float, nargs=3, default=None)
    p.add_argument("--ct-contrast", type=float, default=1.0)
    p.add_argument("--pet-peak", type=float, default=10.0)
    p.add_argument("--noise-ct", type=float, default=0.05)
    p.add_argument("--noise-pet", type=float, default=0.4)
    p.add_argument("--pet-blur", type=float, default=6.0)
    p.add_argument("--format", choices=["nifti1", "raw_json"], default="nifti1")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("bench-gdt", help="time full-volume vs RoI-restricted transforms")
    p.add_argument("--out", required=True)
    p.add_argument("--dims", type=int, nargs=3, default=[256, 256, 256])
    p.add_argument("--roi-fraction", type=float, nargs="+", default=[0.25])
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--passes", type=int, default=4)
    p.add_argument("--neighborhood", type=int, choices=[6, 26], default=26)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--oracle-limit", type=int, default=24,
                   help="run the exact oracle only up to this edge length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check", action="store_true")
    p.add_argument("--min-speedup", type=float, default=20.0)
    p.set_defaults(func=cmd_bench_gdt)

    p = sub.add_parser("simulate", help="run the simulated-annotator refinement loop")
    p.add_argument("--out", required=True)
    p.add_argument("--anatomical", default=None)
    p.add_argument("--functional", default=None)
    p.add_argument("--gt", default=None)
    p.add_argument("--backend", default="geodesic_refiner")
    p.add_argument("--budget", type=int, default=5)
    p.add_argument("--lam", type=float, default=REFINE_GEODESIC.lam)
    p.add_argument("--passes", type=int, default=REFINE_GEODESIC.passes)
    p.add_argument("--roi-expansion", type=float, default=REFINE_ROI_EXPANSION)
    p.add_argument("--stop-dice", type=float, default=STOP_DICE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check", action="store_true")
    p.add_argument("--min-dice", type=float, default=0.85)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="re-run a recorded session event log")
    p.add_argument("--log", required=True)
    p.add_argument("--data-root", required=True)
    p.add_argument("--expect-mask", default=None,
                   help="NIfTI mask the replay must reproduce bit-exactly")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the annotation session service")
    p.add_argument("--config", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--data-root", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
