"""enq: encyclopedic-intent query classification from click-through logs.

The pipeline turns raw ``query TAB host TAB clicks`` logs into a balanced
auto-labeled dataset, projects queries onto knowledge-base snapshots as
sparse binary features, and trains/evaluates linear and forest classifiers
with cross-validation, ablation, and a cached-SERP baseline.
"""

from ._similarity import dice, score_bucket
from .evaluation import (AblationRow, ConfusionMatrix, EvalReport, MetricSet,
                         SerpRecord, ablate, baseline_classify, cross_validate,
                         kfold, metrics)
from .features import (FEATURE_GROUPS, FeatureVector, ProjectionScore,
                       QueryFeaturizer, extract, extract_many, group_of)
from .kb import (CategoryGraph, EntityIndex, Gazetteer, KBSnapshot, Lexicon,
                 OntologyMap, SnapshotError, TitleList, entity_search,
                 expand_categories, load_snapshot)
from .labeler import (LABEL_ENCYCLOPEDIC, LABEL_OTHER, ClickProfile,
                      InsufficientNegativesError, LabeledQuery, LabelingConfig,
                      UndefinedRatioError, aggregate, build_dataset, label,
                      ratio)
from .model import (FeatureDictionary, LinearHingeClassifier,
                    PresenceForestClassifier, load_model, save_model)
from .querylog import (NormalizationConfig, NormalizedQuery, RawLogRecord,
                       is_navigational, is_wiki_query, load_stopwords,
                       normalize, parse_log)
from .synthgen import SynthConfig, generate
from .validation import DegenerateTrainingError

__version__ = "0.1.0"

__all__ = [
    "AblationRow", "CategoryGraph", "ClickProfile", "ConfusionMatrix",
    "DegenerateTrainingError", "EntityIndex", "EvalReport", "FEATURE_GROUPS",
    "FeatureDictionary", "FeatureVector", "Gazetteer",
    "InsufficientNegativesError", "KBSnapshot", "LABEL_ENCYCLOPEDIC",
    "LABEL_OTHER", "LabeledQuery", "LabelingConfig", "Lexicon",
    "LinearHingeClassifier", "MetricSet", "NormalizationConfig",
    "NormalizedQuery", "OntologyMap", "PresenceForestClassifier",
    "ProjectionScore",
    "QueryFeaturizer", "RawLogRecord", "SerpRecord", "SnapshotError",
    "SynthConfig", "TitleList", "UndefinedRatioError", "ablate", "aggregate",
    "baseline_classify", "build_dataset", "cross_validate", "dice",
    "entity_search", "expand_categories", "extract", "extract_many",
    "generate", "group_of", "is_navigational", "is_wiki_query", "kfold",
    "label", "load_model", "load_snapshot", "load_stopwords", "metrics",
    "normalize", "parse_log", "ratio", "save_model", "score_bucket",
]
