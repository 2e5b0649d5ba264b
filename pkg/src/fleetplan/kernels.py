"""Distance-kernel backend selection.

Imports the compiled extension when available, otherwise the pure-Python
twin. Set FLEETPLAN_PURE=1 to force the pure backend (used by the kernel
benchmark and the twin-equality tests).
"""

import os

if os.environ.get("FLEETPLAN_PURE") == "1":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND

point_segment_distance = _impl.point_segment_distance
segment_segment_distance = _impl.segment_segment_distance
moving_points_min_separation = _impl.moving_points_min_separation
min_separation_linear_vs_polyline = _impl.min_separation_linear_vs_polyline
polyline_eval = _impl.polyline_eval
