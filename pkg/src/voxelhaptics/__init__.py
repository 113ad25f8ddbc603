"""Visuohaptic voxel-volume engine.

Force rendering modulated by voxel luminosity, proxy-based volume collision,
subtractive sculpting, tomographic slice-stack I/O, marching-cubes STL export,
and a deterministic replay session behind a CLI and a WebSocket gateway.
"""

from .haptics import (
    ForceSample,
    HapticConfig,
    ProbeState,
    ProxyState,
    compute_raw_force,
    haptic_tick,
    modulate_force,
    sample_luminosity,
    smooth_force,
    update_proxy,
)
from .mesh import MeshModel, export_stl, polygonize, read_stl
from .sculpt import CarveReport, DirtyRegion, carve, sculpt_step
from .session import (
    ForceTrace,
    SessionConfig,
    TrajectoryFrame,
    load_trajectory,
    run_session,
    save_trajectory,
    write_trace,
)
from .volume import (
    StackError,
    Volume,
    Voxel,
    VoxelIndex,
    export_stack,
    import_stack,
    sample_alpha,
    voxel_to_world,
    world_to_voxel,
)

__version__ = "0.1.0"

__all__ = [
    "CarveReport",
    "DirtyRegion",
    "ForceSample",
    "ForceTrace",
    "HapticConfig",
    "MeshModel",
    "ProbeState",
    "ProxyState",
    "SessionConfig",
    "StackError",
    "TrajectoryFrame",
    "Volume",
    "Voxel",
    "VoxelIndex",
    "carve",
    "compute_raw_force",
    "export_stack",
    "export_stl",
    "haptic_tick",
    "import_stack",
    "load_trajectory",
    "modulate_force",
    "polygonize",
    "read_stl",
    "run_session",
    "sample_alpha",
    "sample_luminosity",
    "save_trajectory",
    "sculpt_step",
    "smooth_force",
    "update_proxy",
    "voxel_to_world",
    "world_to_voxel",
    "write_trace",
]
