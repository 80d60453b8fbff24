"""Run-time object-detector selection for real-time video analytics."""

from .estimator import RomaEstimator, compute_rap, frame_block_size, select_detector
from .evaluation import ApReport, ap_11point, match_frame, realtime_ap
from .geometry import RegionBoundaries, count_surviving, histogram, iou, size_region
from .policies import LadPolicy, RomaPolicy, StaticPolicy, TodPolicy
from .prior import PriorModel, build_prior, detection_ratio, estimate_detected
from .simulator import SimulationRun, WorkloadSchedule, run_simulation
from .synthetic import ScenarioSpec, generate_synthetic_scenario
from .trace import BoundingBox, DetectionTrace, FrameDetections, GroundTruth, VideoMeta

__version__ = "0.1.0"
