# The tracer depends on the model package, which itself imports the PBD
# oracle from here; it is exported from the top-level package instead.
from .pbd import BeamGeometry, PhotonBeamDiffusion, eval_sp_ms, geometric_terms, pbd_integrand
from .scene import SlabScene, ToneMap, load_scene
from .images import read_pfm, write_pfm

__all__ = [
    "BeamGeometry",
    "PhotonBeamDiffusion",
    "eval_sp_ms",
    "geometric_terms",
    "pbd_integrand",
    "SlabScene",
    "ToneMap",
    "load_scene",
    "read_pfm",
    "write_pfm",
]
