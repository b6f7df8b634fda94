"""Box-counting dimension of surfaces built from overlapping spheres.

Two surface representations are available: a voxelised point cloud
(:mod:`spherefd.voxel`) and the exact sphere-union surface
(:mod:`spherefd.exact`). :func:`run_box_cnt` runs the whole workflow on an
XYZ file.
"""

from .dimension import BoxCountSeries, FitResult, dimension_from_counts, fit_slope, ols_log_log
from .errors import (ConfigError, DegenerateGeometryError, InputError, NumericError,
                     SpherefdError, UnknownElementError, XyzParseError)
from .exact import exact_box_count, exact_box_counts, length_schedule, near_far_coord
from .neighbors import NeighborList, build_neighbor_list
from .pipeline import RunConfig, RunReport, bench, emit_plot_data, run_box_cnt, run_structure
from .radii import ATOMIC_RADII, METALLIC_RADII, RadType, get_radius
from .structure import Atom, Structure, bounding_box, load_xyz, write_xyz
from .surface import SurfaceFlags, find_surface_atoms, is_inner_side
from .synth import ShapeKind, ShapeSpec, generate_structure, menger_sponge_grid
from .voxel import (BinaryGrid, PointCloud, count_boxes_grid, fibonacci_sphere,
                    gen_surface_points, voxelise)

__version__ = "0.1.0"
