"""Metric cost maps and multi-objective path planning for urban multicopters
flying at a fixed altitude."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .cost import PathCostBreakdown, WeightVector, path_cost, path_distance, transition_cost
from .metrics import GpsConfig, LidarConfig, MetricMapSet, build_map_set, load_map_set, save_map_set
from .planners import ALGORITHMS, BitStarParams, PlanProblem, PlanResult, PlanStatus, plan
from .world import BoundingBox, SynthConfig, WorldScene, load_scene, read_scene, synth_scene, write_scene

__version__ = "0.1.0"
