"""Annotation session engine: state, the propose/scribble/refine/submit loop,
append-only event logs, and deterministic replay.

Each session wraps one volume pair, a cumulative scribble set, the current
mask, and a backend. Every successful mutating call appends one JSON line to
the session's event log; replaying a log against the same volume files
reproduces the final mask bit-exactly, because all backends are
deterministic functions of their inputs.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rle
from .backends import enforce_constraints, encode_interactions, get_backend
from .backends.base import SegmentationBackend
from .defaults import REFINE_GEODESIC, REFINE_ROI_EXPANSION
from .geodesic import GeodesicConfig
from .io import load_volume, save_mask_nifti
from .simulate import ScribbleSet
from .volume import ModalityPair, dice, empty_mask, resample_to_grid

SCHEMA_VERSION = 1


class UnknownSessionError(KeyError):
    pass


class SessionSealedError(RuntimeError):
    pass


class SessionBusyError(RuntimeError):
    pass


class RefineNotReadyError(ValueError):
    """Refine called before any proposal, refinement, or scribble."""


@dataclass
class HistoryEvent:
    kind: str
    timestamp: float
    dice: float | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "timestamp": self.timestamp, "dice": self.dice}


@dataclass
class Session:
    id: str
    pair: ModalityPair
    backend: SegmentationBackend
    scribbles: ScribbleSet
    current_mask: np.ndarray
    gt: np.ndarray | None = None
    history: list[HistoryEvent] = field(default_factory=list)
    sealed: bool = False
    refs: dict = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def dice_vs_gt(self) -> float | None:
        return dice(self.current_mask, self.gt) if self.gt is not None else None

    def record(self, kind: str) -> HistoryEvent:
        now = time.time()
        if self.history and now <= self.history[-1].timestamp:
            now = self.history[-1].timestamp + 1e-6
        event = HistoryEvent(kind, now, self.dice_vs_gt())
        self.history.append(event)
        return event


def _load_mask_ref(path: Path, dims) -> np.ndarray:
    vol = load_volume(path)
    if vol.dims != tuple(dims):
        raise ValueError(f"mask {path} dims {vol.dims} do not match volume dims {tuple(dims)}")
    return vol.data > 0.5


class SessionStore:
    """In-memory session registry with per-session serialization and logs."""

    def __init__(
        self,
        data_root: str | Path,
        geodesic: GeodesicConfig = REFINE_GEODESIC,
        roi_expansion: float = REFINE_ROI_EXPANSION,
        busy_mode: str = "wait",
    ):
        if busy_mode not in ("wait", "reject"):
            raise ValueError("busy_mode must be 'wait' or 'reject'")
        self.data_root = Path(data_root)
        self.geodesic = geodesic
        self.roi_expansion = float(roi_expansion)
        self.busy_mode = busy_mode
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # -- path helpers -------------------------------------------------------

    def resolve(self, ref: str) -> Path:
        path = Path(ref)
        return path if path.is_absolute() else self.data_root / path

    def session_dir(self, session_id: str) -> Path:
        return self.data_root / "sessions" / session_id

    def _log_path(self, session_id: str) -> Path:
        return self.session_dir(session_id) / "events.jsonl"

    def _append_event(self, session_id: str, payload: dict) -> None:
        path = self._log_path(session_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(payload) + "\n")

    # -- session access -----------------------------------------------------

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(f"unknown session {session_id!r}") from None

    def _acquire(self, session: Session):
        if session.lock.acquire(blocking=self.busy_mode == "wait"):
            return
        raise SessionBusyError(f"session {session.id} has a mutation in flight")

    # -- operations ---------------------------------------------------------

    def create_session(
        self,
        anatomical_ref: str,
        functional_ref: str,
        backend_name: str,
        gt_ref: str | None = None,
        backend_params: dict | None = None,
        session_id: str | None = None,
    ) -> str:
        backend = get_backend(backend_name, backend_params)
        anatomical = load_volume(self.resolve(anatomical_ref))
        functional = load_volume(self.resolve(functional_ref))
        if functional.dims != anatomical.dims or functional.spacing != anatomical.spacing:
            functional = resample_to_grid(functional, anatomical.dims, anatomical.spacing)
        pair = ModalityPair(anatomical, functional,
                            {"anatomical": anatomical_ref, "functional": functional_ref})
        gt = _load_mask_ref(self.resolve(gt_ref), anatomical.dims) if gt_ref else None

        session_id = session_id or uuid.uuid4().hex[:12]
        session = Session(
            id=session_id,
            pair=pair,
            backend=backend,
            scribbles=ScribbleSet.empty(pair.dims),
            current_mask=empty_mask(pair.dims),
            gt=gt,
            refs={"anatomical": anatomical_ref, "functional": functional_ref, "gt": gt_ref},
        )
        with self._registry_lock:
            self._sessions[session_id] = session
        self._append_event(session_id, {
            "event": "create",
            "schema_version": SCHEMA_VERSION,
            "anatomical_ref": anatomical_ref,
            "functional_ref": functional_ref,
            "gt_ref": gt_ref,
            "backend": backend_name,
            "backend_params": backend_params or {},
            "geodesic": {"lam": self.geodesic.lam, "passes": self.geodesic.passes,
                         "neighborhood": self.geodesic.neighborhood},
            "roi_expansion": self.roi_expansion,
        })
        return session_id

    def _mask_summary(self, session: Session) -> dict:
        return {
            "voxel_count": int(np.count_nonzero(session.current_mask)),
            "mask": rle.mask_to_wire(session.current_mask),
            "dice": session.dice_vs_gt(),
        }

    def run_propose(self, session_id: str) -> dict:
        session = self.get(session_id)
        self._acquire(session)
        try:
            if session.sealed:
                raise SessionSealedError(f"session {session_id} is sealed")
            mask = session.backend.propose(session.pair)
            session.current_mask = enforce_constraints(mask, session.scribbles)
            session.record("propose")
            self._append_event(session_id, {"event": "propose"})
            return self._mask_summary(session)
        finally:
            session.lock.release()

    def add_scribbles(self, session_id: str, delta: ScribbleSet) -> dict:
        session = self.get(session_id)
        self._acquire(session)
        try:
            if session.sealed:
                raise SessionSealedError(f"session {session_id} is sealed")
            if delta.dims != session.pair.dims:
                raise ValueError(
                    f"scribble dims {delta.dims} do not match volume dims {session.pair.dims}"
                )
            session.scribbles = session.scribbles.merged_with(delta)
            session.current_mask = enforce_constraints(session.current_mask, session.scribbles)
            session.record("scribble")
            self._append_event(session_id, {
                "event": "scribbles",
                "foreground": rle.rle_encode(delta.foreground),
                "background": rle.rle_encode(delta.background),
            })
            return {
                "accepted_foreground": int(np.count_nonzero(delta.foreground)),
                "accepted_background": int(np.count_nonzero(delta.background)),
                "total_foreground": int(np.count_nonzero(session.scribbles.foreground)),
                "total_background": int(np.count_nonzero(session.scribbles.background)),
            }
        finally:
            session.lock.release()

    def run_refine(self, session_id: str) -> dict:
        session = self.get(session_id)
        self._acquire(session)
        try:
            if session.sealed:
                raise SessionSealedError(f"session {session_id} is sealed")
            has_model_event = any(e.kind in ("propose", "refine") for e in session.history)
            if not has_model_event and session.scribbles.is_empty():
                raise RefineNotReadyError("refine needs a prior proposal or scribbles")
            channels = encode_interactions(
                session.pair, session.scribbles, self.geodesic,
                roi_expansion=self.roi_expansion, prev_mask=session.current_mask,
            )
            mask = session.backend.refine(session.pair, channels)
            session.current_mask = enforce_constraints(mask, session.scribbles)
            session.record("refine")
            self._append_event(session_id, {"event": "refine"})
            return self._mask_summary(session)
        finally:
            session.lock.release()

    def submit(self, session_id: str) -> dict:
        session = self.get(session_id)
        self._acquire(session)
        try:
            if session.sealed:
                raise SessionSealedError(f"session {session_id} was already submitted")
            session.record("submit")
            session.sealed = True
            out_dir = self.session_dir(session_id)
            save_mask_nifti(session.current_mask, session.pair.spacing,
                            out_dir / "final_mask.nii")
            wire = rle.mask_to_wire(session.current_mask)
            (out_dir / "final_mask.rle.json").write_text(json.dumps(wire), "utf-8")
            self._append_event(session_id, {"event": "submit"})
            events = [e.to_dict() for e in session.history]
            record = {
                "id": session_id,
                "backend": session.backend.name,
                "events": events,
                "total_seconds": events[-1]["timestamp"] - events[0]["timestamp"]
                if len(events) > 1 else 0.0,
                "final_voxel_count": int(np.count_nonzero(session.current_mask)),
                "final_dice": session.dice_vs_gt(),
            }
            (out_dir / "record.json").write_text(json.dumps(record, indent=2), "utf-8")
            return record
        finally:
            session.lock.release()

    # -- reads ---------------------------------------------------------------

    def info(self, session_id: str) -> dict:
        session = self.get(session_id)
        return {
            "id": session.id,
            "dims": list(session.pair.dims),
            "spacing": list(session.pair.spacing),
            "backend": session.backend.name,
            "backend_params": session.backend.descriptor().parameters,
            "sealed": session.sealed,
            "study_mode": session.gt is not None,
            "events": [e.to_dict() for e in session.history],
        }

    def mask_wire(self, session_id: str) -> dict:
        return rle.mask_to_wire(self.get(session_id).current_mask)

    def slice_image(
        self,
        session_id: str,
        axis: int,
        index: int,
        modality: str = "anatomical",
        window_center: float | None = None,
        window_width: float | None = None,
    ) -> np.ndarray:
        """8-bit windowed slice, rows along the later axis (y or z)."""
        session = self.get(session_id)
        if modality not in ("anatomical", "functional"):
            raise ValueError("modality must be 'anatomical' or 'functional'")
        if axis not in (0, 1, 2):
            raise ValueError("axis must be 0, 1 or 2")
        volume = getattr(session.pair, modality)
        if not (0 <= index < volume.dims[axis]):
            raise ValueError(f"slice index {index} out of range for axis {axis}")
        plane = np.take(volume.data, index, axis=axis).T.astype(np.float64)
        if window_center is None or window_width is None:
            lo = float(volume.data.min())
            hi = float(volume.data.max())
        else:
            lo = window_center - window_width / 2.0
            hi = window_center + window_width / 2.0
        if hi <= lo:
            hi = lo + 1.0
        scaled = np.clip((plane - lo) / (hi - lo), 0.0, 1.0)
        return (scaled * 255.0).round().astype(np.uint8)


def replay_log(log_path: str | Path, data_root: str | Path,
               store: SessionStore | None = None) -> tuple[np.ndarray, str]:
    """Re-run a recorded event log; returns (final mask, new session id)."""
    lines = [json.loads(line) for line in Path(log_path).read_text("utf-8").splitlines() if line]
    if not lines or lines[0].get("event") != "create":
        raise ValueError("event log must start with a create event")
    head = lines[0]
    if store is None:
        store = SessionStore(
            data_root,
            geodesic=GeodesicConfig(**head.get("geodesic", {})),
            roi_expansion=head.get("roi_expansion", 2.0),
        )
    session_id = store.create_session(
        head["anatomical_ref"],
        head["functional_ref"],
        head["backend"],
        gt_ref=head.get("gt_ref"),
        backend_params=head.get("backend_params") or None,
    )
    dims = store.get(session_id).pair.dims
    for event in lines[1:]:
        kind = event["event"]
        if kind == "propose":
            store.run_propose(session_id)
        elif kind == "scribbles":
            delta = ScribbleSet(
                rle.rle_decode(event["foreground"], dims),
                rle.rle_decode(event["background"], dims),
            )
            store.add_scribbles(session_id, delta)
        elif kind == "refine":
            store.run_refine(session_id)
        elif kind == "submit":
            store.submit(session_id)
        else:
            raise ValueError(f"unknown event kind {kind!r}")
    return store.get(session_id).current_mask.copy(), session_id
