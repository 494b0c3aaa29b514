"""Coflow scheduling on multi-core optical circuit switches."""
from .allocation import Allocation, greedy_allocate, load_only_allocate
from .bounds import PrefixState, global_single_coflow_lb, port_stats, single_core_lb
from .bvn import BvnDecomposition, birkhoff_decompose, decompose, stuff_matrix
from .circuit_sim import (CircuitEvent, ScheduleResult, check_feasibility, simulate_all_stop_bvn,
                          simulate_coflow_exclusive, simulate_not_all_stop)
from .harness import SCHEMES, ExperimentPlan, compare, run_scheme, run_sweep
from .lp_relax import LpSolution, LpStatus, build_lp, certified_lower_bound, solve_instance, solve_lp
from .metrics import ExperimentRecord, approx_ratio, normalized_weighted_cct, percentile_cct, total_weighted_cct
from .model import Coflow, Instance, NetworkConfig, SwitchMode, make_instance, validate_instance
from .oracle import OracleResult, brute_force_best
from .ordering import CoflowOrder, lp_guided_order, wspt_order
from .trace_io import (RawCoflowRecord, ingest_fb_trace, parse_canonical, sample_instance,
                       synth_generate, write_canonical)

__version__ = "0.1.0"
