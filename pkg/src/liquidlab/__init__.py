"""liquidlab: physics-based liquid dataset generation and mesh evaluation.

FLIP/PIC liquid simulation inside rotating rigid containers, particle surface
reconstruction, orthographic mask rendering, dataset export, and the metric
suite used to score predicted liquid meshes against references.
"""

__version__ = "0.1.0"

from .accel import NUMBA_ENABLED

__all__ = ["NUMBA_ENABLED", "__version__"]
