"""Change-point detection in the network structure of tensor time series.

A tensor whose last mode is time is reduced to a multivariate series by a CP
or HOSVD decomposition, and changes in the second-order structure of that
series are located with a scaled-CUSUM Isolate-Detect search.
"""

from . import calibrate, ccid, decompose, evaluate, pipeline, rank_select, simulate, tensor
from .ccid import CcidConfig, DetectionResult, detect
from .decompose import AlsConfig, CPModel, HOSVDModel, cp_als, hosvd
from .evaluate import hausdorff, tabulate
from .pipeline import DecompConfig, extract_series, run_bench
from .rank_select import NormoConfig, normo_select
from .simulate import generate, scenario_spec

__version__ = "0.1.0"

__all__ = [
    "calibrate", "ccid", "decompose", "evaluate", "pipeline", "rank_select", "simulate", "tensor",
    "CcidConfig", "DetectionResult", "detect", "AlsConfig", "CPModel", "HOSVDModel", "cp_als",
    "hosvd", "hausdorff", "tabulate", "DecompConfig", "extract_series", "run_bench",
    "NormoConfig", "normo_select", "generate", "scenario_spec",
]
