"""Semi-global stereo matching with non-parametric rank costs.

Cost families (SAD, Birchfield-Tomasi, rank filter/AD, Rank SAD, their
weighted blend and the unified rank model), four-path SGM aggregation,
refinement, error-ratio evaluation and a streaming model of a
disparity-parallel hardware datapath.
"""

from .config import SgmConfig, default_penalties
from .cost import (ALL_KINDS, CostFamily, CostKind, CostVolume, KernelSpec, build_cost_volume,
                   comparison_vector, cost_bt, cost_rank_ad, cost_rank_sad, cost_sad, cost_unified,
                   rank_transform)
from .imagery import GrayImage, GroundTruthMap, load_gray, load_ground_truth, save_gray
from .pipeline import MatchResult, match
from .refine import DisparityMap
from .sgm import AggregatedVolume, Penalties, aggregate, winner_take_all

__version__ = "0.1.0"
