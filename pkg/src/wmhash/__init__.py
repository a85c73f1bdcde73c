"""Weighted minwise hashing by red-green rejection sampling, with baselines."""

from .baselines import (
    IoffeHash,
    UnweightedSet,
    ioffe_hash,
    ioffe_sketch,
    minwise_unweighted,
    reduce_to_unweighted,
    reduction_sketch,
)
from .config import SchemeConfig
from .errors import (
    DomainError,
    FormatError,
    IncompatibleSketchError,
    IterationCapError,
    LayoutMismatchError,
    ParseError,
    ResourceError,
    UsageError,
    WMHError,
)
from .estimate import (
    EstimateReport,
    error_curve,
    estimate_from_sketches,
    exact_jaccard,
    hash_stats,
)
from .redgreen import (
    RedGreenLayout,
    Sketch,
    build_layout,
    effective_sparsity,
    hash_one,
    hash_values,
    is_green_binsearch,
    is_green_o1,
    load_layout,
    optimize_alpha,
    sketch,
)
from .rng import ChainedRng, gamma21, next_uniform, reseed_from
from .vectors import (
    Dataset,
    SparseVector,
    dataset_maxima,
    l1_norm,
    load_dataset,
    parse_sparse_line,
)

__version__ = "0.1.0"
