"""Frozen pipeline defaults, tuned once on the stock phantoms.

These apply to the refinement pipeline (interaction encoding for the session
service and the experiment harness). The bare transform default
``GeodesicConfig()`` keeps lam = 1.0 for general use on intensity-normalized
volumes; the refinement pipeline runs much edge-heavier so scribble evidence
stops at intensity boundaries instead of bleeding across them.
"""

from __future__ import annotations

from .geodesic import GeodesicConfig

REFINE_GEODESIC = GeodesicConfig(lam=16.0, passes=4, neighborhood=26)
REFINE_ROI_EXPANSION = 1.5
