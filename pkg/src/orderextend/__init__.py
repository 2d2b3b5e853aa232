"""Active low-rank matrix completion (Order&Extend)."""

from .completion import (CompletionReport, order_and_extend, select_seed,
                         sequential_complete)
from .experiment import (ExperimentConfig, ExperimentRow, condition_number_variant,
                         random_extend_baseline, run_experiment)
from .graph import (Node, Ordering, adjust_order, build_mask_graph,
                    implied_indegree, order_deficiency, smallest_last_order)
from .kernels import BACKEND
from .matrix import (ObservedMatrix, critical_mask_size, frobenius_norm,
                     generate_low_rank, rel_error, sample_random_mask,
                     truncate_to_rank)
from .oracle import GroundTruthOracle, QueryOracle, surrogate_sampler
from .stability import (extended_local_condition, local_condition,
                        sherman_morrison_update, solve_least_squares, stabilize)

__version__ = "0.1.0"
