"""gfm_adapter: bridge from feed-forward geometry reconstruction models to
the scene interchange format consumed by the scoring toolkit."""

from .backends import (FlatPlaneBackend, ModelUnavailableError,
                       load_geometry_backend, load_perceptual_backend,
                       nearest_rotation)
from .export import (AdapterConfig, export_perceptual_table, export_scene,
                     load_frames, sample_uniform)

__version__ = "0.1.0"
