"""Entity-type graph matching: featurize candidate pairs, classify, align.

The toolkit combines string, language, and property-based similarity
scores into per-pair feature vectors, trains small from-scratch binary
classifiers on labeled graph pairs, and extracts alignments that can be
scored against reference alignments.
"""

from .classifiers import (
    CartDecisionTree,
    HingeSGDClassifier,
    LogisticRegressionGD,
    MODEL_TYPES,
    RandomForest,
    make_classifier,
)
from .config import RunConfig, apply_overrides, load_config
from .errors import (
    ConfigError,
    EtmatchError,
    EvalInputError,
    ModelMismatchError,
    ParseError,
    TrainingDataError,
    ValidationError,
)
from .evaluation import (
    AblationTask,
    EvalReport,
    STANDARD_VARIANTS,
    emit_report,
    f_beta,
    load_predicted,
    load_reference,
    macro_average,
    micro_average,
    run_ablation,
    score,
)
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    MatchContext,
    PairFeaturizer,
    balance,
    generate_candidates,
    label_candidates,
    make_context,
    validate_mask,
)
from .graph import (
    EtypeGraph,
    GraphStats,
    compute_stats,
    graph_from_dict,
    graph_to_dict,
    load_graph,
    save_graph,
)
from .lexical import (
    EmbeddingTable,
    Taxonomy,
    embedding_sim,
    load_embeddings,
    load_taxonomy,
    wu_palmer_sim,
)
from .matcher import (
    Alignment,
    MatcherModel,
    MatchTask,
    extract_alignment,
    load_model,
    predict_one,
    save_model,
    score_candidates,
    train_matcher,
    write_match_file,
)
from .specificity import (
    NormalizationStats,
    horizontal_similarity,
    layer_specificity,
    match_properties,
    normalize_scores,
    shareability_specificity,
    vertical_similarity,
)
from .strings import lcs_sim, levenshtein_distance, levenshtein_sim, ngram_sim, normalize_label

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "AblationTask",
    "CartDecisionTree",
    "ConfigError",
    "EmbeddingTable",
    "EtmatchError",
    "EtypeGraph",
    "EvalInputError",
    "EvalReport",
    "FEATURE_NAMES",
    "FeatureVector",
    "GraphStats",
    "HingeSGDClassifier",
    "LogisticRegressionGD",
    "MODEL_TYPES",
    "MatchContext",
    "MatchTask",
    "MatcherModel",
    "ModelMismatchError",
    "NormalizationStats",
    "PairFeaturizer",
    "ParseError",
    "RandomForest",
    "RunConfig",
    "STANDARD_VARIANTS",
    "Taxonomy",
    "TrainingDataError",
    "ValidationError",
    "apply_overrides",
    "balance",
    "compute_stats",
    "embedding_sim",
    "emit_report",
    "extract_alignment",
    "f_beta",
    "generate_candidates",
    "graph_from_dict",
    "graph_to_dict",
    "horizontal_similarity",
    "label_candidates",
    "layer_specificity",
    "lcs_sim",
    "levenshtein_distance",
    "levenshtein_sim",
    "load_config",
    "load_embeddings",
    "load_graph",
    "load_model",
    "load_predicted",
    "load_reference",
    "load_taxonomy",
    "macro_average",
    "make_classifier",
    "make_context",
    "match_properties",
    "micro_average",
    "ngram_sim",
    "normalize_label",
    "normalize_scores",
    "predict_one",
    "run_ablation",
    "save_graph",
    "save_model",
    "score",
    "score_candidates",
    "shareability_specificity",
    "train_matcher",
    "validate_mask",
    "vertical_similarity",
    "write_match_file",
]
