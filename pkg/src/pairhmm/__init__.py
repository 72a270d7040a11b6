"""Pair-HMM forward-algorithm engine with lane-tiled wavefront kernels."""

from .errors import (BudgetError, ConfigTooSmallError, DataError,
                     DegenerateTransitionError, InvalidMeasurementError,
                     InvalidQualityError, NumericError, NumericOverflowError,
                     PairHmmError, ParseError)
from .model import (ALPHABET, Batch, EngineConfig, Haplotype, ReadRecord,
                    Score, WorkItem, decode_bases, default_configs,
                    encode_bases, enumerate_work_items)
from .partition import (PartitionPlan, build_plan, estimate_item_bytes,
                        select_config)
from .pipeline import RunReport, run, throughput
from .prob import (EmissionTable, TransitionProfile, build_emission_table,
                   build_transitions, phred_to_prob)
from .reference import (DpMatrices, forward_matrices, forward_reference,
                        forward_reference_linear_space)
from .wavefront import (forward_wavefront, forward_wavefront_batch,
                        forward_wavefront_counted)

__version__ = "0.1.0"
