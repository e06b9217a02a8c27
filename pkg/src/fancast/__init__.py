"""Fan-network voting cascades: ingestion, metrics, prediction, simulation."""

__version__ = "0.1.0"

from .cascade import (  # noqa: F401
    DEFAULT_CONVENTION,
    EXCLUDE_SUBMITTER,
    INCLUDE_SUBMITTER,
    PrefixConvention,
    cascade_histograms,
    cascade_profile,
    in_network_votes,
    influence,
    interestingness_profile,
    spearman_permutation,
)
from .corpus import (  # noqa: F401
    Corpus,
    StoryRecord,
    corpus_stats,
    load_corpus,
    save_corpus,
    validate,
)
from .graph import FanGraph, load_graph, save_graph  # noqa: F401
from .predictor import (  # noqa: F401
    DecisionTree,
    EvalReport,
    TrainParams,
    baseline_compare,
    cross_validate,
    evaluate,
    extract_features,
    train_tree,
)
from .simulate import (  # noqa: F401
    SimulationConfig,
    generate_graph,
    load_config,
    simulate_corpus,
)
