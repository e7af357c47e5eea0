"""Backend registry and the common estimator surface.

Backends follow the scikit-learn parameter convention: constructor arguments
are stored verbatim as attributes and exposed through ``get_params`` /
``set_params``, which is also how the service and CLI pass flat name→number
parameter maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from sklearn.base import BaseEstimator

from ..simulate import ScribbleSet
from ..volume import ModalityPair
from .encoding import InteractionChannels


class UnknownBackendError(KeyError):
    """No backend registered under the requested name."""


class BackendCapabilityError(ValueError):
    """The backend does not implement the requested operation."""


@dataclass(frozen=True)
class BackendDescriptor:
    name: str
    supports_refine: bool
    parameters: dict


class SegmentationBackend(BaseEstimator):
    """Base class for propose/refine segmentation backends."""

    name: ClassVar[str] = ""
    supports_refine: ClassVar[bool] = False

    def descriptor(self) -> BackendDescriptor:
        params = {
            k: float(v)
            for k, v in self.get_params().items()
            if isinstance(v, (int, float, np.floating, np.integer))
        }
        return BackendDescriptor(self.name, self.supports_refine, params)

    def propose(self, pair: ModalityPair) -> np.ndarray:
        raise BackendCapabilityError(f"backend {self.name!r} cannot propose")

    def refine(self, pair: ModalityPair, channels: InteractionChannels) -> np.ndarray:
        raise BackendCapabilityError(f"backend {self.name!r} cannot refine")


_REGISTRY: dict[str, type[SegmentationBackend]] = {}


def register_backend(cls: type[SegmentationBackend]) -> type[SegmentationBackend]:
    if not cls.name:
        raise ValueError("backend class must define a name")
    if cls.name in _REGISTRY:
        raise ValueError(f"backend {cls.name!r} already registered")
    _REGISTRY[cls.name] = cls
    return cls


def available_backends() -> list[str]:
    return sorted(_REGISTRY)


def get_backend(name: str, params: dict | None = None) -> SegmentationBackend:
    """Instantiate a registered backend, applying a flat parameter map."""
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise UnknownBackendError(
            f"unknown backend {name!r}; registered: {', '.join(available_backends())}"
        ) from None
    backend = cls()
    if params:
        backend.set_params(**params)
    return backend


def propose(pair: ModalityPair, backend: str = "uptake_threshold",
            params: dict | None = None) -> np.ndarray:
    """Initial automatic segmentation before any interaction."""
    return get_backend(backend, params).propose(pair)


def refine(pair: ModalityPair, channels: InteractionChannels,
           backend: str = "geodesic_refiner", params: dict | None = None) -> np.ndarray:
    """Recompute the segmentation from encoded interactions and the previous mask."""
    instance = get_backend(backend, params)
    if not instance.supports_refine:
        raise BackendCapabilityError(f"backend {backend!r} does not support refine")
    return instance.refine(pair, channels)


def graphcut_segment(pair: ModalityPair, scribbles: ScribbleSet,
                     params: dict | None = None) -> np.ndarray:
    """Scribble-seeded min-cut segmentation (the non-learned baseline)."""
    backend = get_backend("graphcut", params)
    return backend.segment(pair, scribbles)  # type: ignore[attr-defined]
