"""HTTP/JSON annotation service over the session engine.

Configuration comes from one JSON file (path in SCRIBBLESEG_CONFIG, or passed
explicitly) with environment overrides SCRIBBLESEG_PORT and
SCRIBBLESEG_DATA_ROOT. Every JSON response carries a schema_version field.
"""

from __future__ import annotations

import io as _io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import rle
from .backends import UnknownBackendError, available_backends, get_backend
from .backends.base import BackendCapabilityError
from .defaults import REFINE_GEODESIC, REFINE_ROI_EXPANSION
from .geodesic import GeodesicConfig
from .io import SizeMismatchError, UnreadableFileError, UnsupportedDatatypeError
from .session import (
    SCHEMA_VERSION,
    RefineNotReadyError,
    SessionBusyError,
    SessionSealedError,
    SessionStore,
    UnknownSessionError,
)
from .simulate import ScribbleSet


@dataclass
class ServiceConfig:
    data_root: str = "./data"
    port: int = 8008
    busy_mode: str = "wait"
    roi_expansion: float = REFINE_ROI_EXPANSION
    geodesic: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ServiceConfig":
        path = path or os.environ.get("SCRIBBLESEG_CONFIG")
        values: dict = {}
        if path and Path(path).is_file():
            values = json.loads(Path(path).read_text("utf-8"))
        cfg = cls(**values)
        if "SCRIBBLESEG_PORT" in os.environ:
            cfg.port = int(os.environ["SCRIBBLESEG_PORT"])
        if "SCRIBBLESEG_DATA_ROOT" in os.environ:
            cfg.data_root = os.environ["SCRIBBLESEG_DATA_ROOT"]
        return cfg


class CreateSessionRequest(BaseModel):
    anatomical_ref: str
    functional_ref: str
    backend: str = "geodesic_refiner"
    gt_ref: str | None = None
    backend_params: dict[str, float] | None = None


class ScribbleDelta(BaseModel):
    foreground: list[list[int]] = []
    background: list[list[int]] = []


def _versioned(payload: dict) -> dict:
    payload["schema_version"] = SCHEMA_VERSION
    return payload


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.load()
    geodesic = GeodesicConfig(**config.geodesic) if config.geodesic else REFINE_GEODESIC
    store = SessionStore(
        data_root=config.data_root,
        geodesic=geodesic,
        roi_expansion=config.roi_expansion,
        busy_mode=config.busy_mode,
    )
    app = FastAPI(title="scribbleseg session service")
    app.state.store = store
    app.state.config = config
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def run(callable_, *args, **kwargs):
        """Map engine errors onto HTTP statuses."""
        try:
            return callable_(*args, **kwargs)
        except UnknownSessionError as exc:
            raise HTTPException(404, str(exc)) from exc
        except (SessionSealedError, SessionBusyError) as exc:
            raise HTTPException(409, str(exc)) from exc
        except (UnknownBackendError, BackendCapabilityError, RefineNotReadyError) as exc:
            raise HTTPException(400, str(exc)) from exc
        except (UnreadableFileError, UnsupportedDatatypeError, SizeMismatchError) as exc:
            raise HTTPException(400, f"volume load failed: {exc}") from exc
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc

    @app.get("/")
    def health():
        return _versioned({"status": "ok"})

    @app.get("/backends")
    def backends():
        descriptors = [get_backend(name).descriptor() for name in available_backends()]
        return _versioned({
            "backends": [
                {"name": d.name, "supports_refine": d.supports_refine, "parameters": d.parameters}
                for d in descriptors
            ]
        })

    @app.post("/sessions")
    def create_session(body: CreateSessionRequest):
        session_id = run(
            store.create_session,
            body.anatomical_ref,
            body.functional_ref,
            body.backend,
            gt_ref=body.gt_ref,
            backend_params=body.backend_params,
        )
        return _versioned(store.info(session_id))

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        return _versioned(run(store.info, session_id))

    @app.post("/sessions/{session_id}/propose")
    def propose(session_id: str):
        return _versioned(run(store.run_propose, session_id))

    @app.post("/sessions/{session_id}/scribbles")
    def scribbles(session_id: str, body: ScribbleDelta):
        def apply():
            dims = store.get(session_id).pair.dims
            delta = ScribbleSet(
                rle.rle_decode(body.foreground, dims),
                rle.rle_decode(body.background, dims),
            )
            return store.add_scribbles(session_id, delta)

        return _versioned(run(apply))

    @app.post("/sessions/{session_id}/refine")
    def refine(session_id: str):
        return _versioned(run(store.run_refine, session_id))

    @app.post("/sessions/{session_id}/submit")
    def submit(session_id: str):
        return _versioned(run(store.submit, session_id))

    @app.get("/sessions/{session_id}/mask")
    def mask(session_id: str):
        return _versioned({"mask": run(store.mask_wire, session_id)})

    @app.get("/sessions/{session_id}/slice")
    def slice_image(
        session_id: str,
        axis: int = Query(ge=0, le=2),
        index: int = Query(ge=0),
        modality: str = "anatomical",
        window_center: float | None = None,
        window_width: float | None = None,
    ):
        from PIL import Image

        plane = run(
            store.slice_image, session_id, axis, index, modality,
            window_center, window_width,
        )
        buffer = _io.BytesIO()
        Image.fromarray(plane, mode="L").save(buffer, format="PNG")
        # binary responses carry the schema version as a header instead
        return Response(
            content=buffer.getvalue(),
            media_type="image/png",
            headers={"x-schema-version": str(SCHEMA_VERSION)},
        )

    return app


def main(argv: list[str] | None = None) -> None:
    """Entry point used by `scribbleseg serve`."""
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="run the annotation session service")
    parser.add_argument("--config", default=None, help="path to a JSON config file")
    parser.add_argument("--port", type=int, default=None)
    parser.add_argument("--data-root", default=None)
    args = parser.parse_args(argv)
    config = ServiceConfig.load(args.config)
    if args.port is not None:
        config.port = args.port
    if args.data_root is not None:
        config.data_root = args.data_root
    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)


app = create_app(ServiceConfig.load())
