"""Palm-conditioned cluster statistics of extremes in Poisson-Voronoi and Poisson-Delaunay tessellations."""

from .constants import (
    CharacteristicKind,
    WindowGeometry,
    ball_volume,
    delaunay_extremal_index,
    delaunay_intensity_constant,
    threshold,
    window_geometry,
)
from .estimator import (
    ClusterStats,
    ExceedanceRecord,
    ExtremalIndexEstimator,
    count_cluster,
    derived_pi,
    estimate,
)
from .experiment import ExperimentConfig, PalmClusterSimulator, run
from .geometry import UNBOUNDED, Rect, Triangulation, triangulate
from .palm import PalmSample, palm_sample
from .samplers import Rng

__version__ = "0.1.0"

__all__ = [
    "CharacteristicKind",
    "ClusterStats",
    "ExceedanceRecord",
    "ExperimentConfig",
    "ExtremalIndexEstimator",
    "PalmClusterSimulator",
    "PalmSample",
    "Rect",
    "Rng",
    "Triangulation",
    "UNBOUNDED",
    "WindowGeometry",
    "ball_volume",
    "count_cluster",
    "delaunay_extremal_index",
    "delaunay_intensity_constant",
    "derived_pi",
    "estimate",
    "palm_sample",
    "run",
    "threshold",
    "triangulate",
    "window_geometry",
]
