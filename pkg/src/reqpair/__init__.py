"""Requirement-pair conflict/duplicate classification toolkit.

Pipeline: ingest requirement corpora and labeled pairs, embed each
requirement (interchange file or built-in hashed n-gram encoder), build
pair features concat(u, v, u - v), classify with a feed-forward softmax
head, re-check positive predictions with rule-based filters, and score
everything with stratified cross-validation and paired F-tests.
"""
from .annotations import AnnotationRecord, SrlFrame, load_annotations, save_annotations
from .classifier import (
    MLPModel,
    TrainConfig,
    TrainReport,
    forward,
    gradient_check,
    init_model,
    load_model,
    predict,
    save_model,
    train,
)
from .corpus import (
    CDN_CLASSES,
    CN_CLASSES,
    CONFLICT,
    DUPLICATE,
    NEUTRAL,
    FoldPlan,
    PairDataset,
    Requirement,
    RequirementPair,
    derive_cn,
    generate_pairs,
    ingest_pairs,
    ingest_requirements,
    make_dataset,
    stratified_kfold,
    synth_annotations,
    synth_corpus,
)
from .errors import ReqpairError
from .experiments import (
    CVResult,
    PipelineConfig,
    ftest_5x2cv,
    report_emit,
    run_cross_domain,
    run_cv,
)
from .features import (
    EmbeddingStore,
    FeatureVector,
    builtin_embed,
    load_embeddings,
    pair_feature,
    save_embeddings,
)
from .filters import (
    FilterDecision,
    actor_action_filter,
    apply_filter,
    pos_filter,
    srl_filter,
)
from .metrics import ConfusionMatrix, MetricsReport, confusion, metrics
from .postag import builtin_pos_tag
from .stats import FTestResult, combined_f_statistic, combined_f_test, f_cdf, f_sf

__version__ = "0.1.0"
