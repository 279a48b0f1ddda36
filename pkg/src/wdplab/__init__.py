"""Multi-unit combinatorial auction winner determination toolkit.

Instance generation, exact solving (brute force and branch-and-bound
over an in-repo simplex), a bipartite graph network heuristic trained on
single-label samples, graph-based decoders, classical baselines, and a
benchmark harness.
"""

from .bench import BenchConfig, PipelineConfig, ReportRow, pipeline_train, run_benchmark
from .exact import ExactResult, branch_and_bound, brute_force
from .gnn import (
    GnnModel,
    TrainConfig,
    forward,
    init_model,
    load_model,
    loss_and_gradients,
    save_model,
    train,
)
from .graph import BidItemGraph, build_graph, normalize_features, residual_graph
from .heuristics import CasanovaParams, casanova, greedy_density, rlp, ss
from .instgen import (
    GenerationExhaustedError,
    SynthConfig,
    VmConfig,
    dominates,
    gen_synthetic,
    gen_vm,
    prune_dominated,
)
from .lp import LpSolution, simplex, solve_lp_relaxation
from .model import (
    Allocation,
    AuctionInstance,
    Bid,
    Item,
    MetricsRow,
    evaluate_allocation,
    load_instance,
    make_instance,
    metrics,
    save_instance,
    validate_instance,
)
from .postprocess import SolveTrace, basic_solve, traversal_solve
from .samples import (
    LabeledInstance,
    TrainingSample,
    expand_instance_set,
    node_removal,
    one_hot_label_generation,
    single_label_sample_generation,
)

__version__ = "0.1.0"
