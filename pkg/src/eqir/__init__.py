"""eqir: retrieval experimentation toolkit with linguistic-complexity
profiling, product-of-experts debiased bi-encoder training, and
equity-aware ranking evaluation."""

__version__ = "0.1.0"

from .complexity import (
    INDEX_ORDER,
    ComplexityProfile,
    TokenCounts,
    aggregate_scores,
    assign_buckets,
    column_normalize,
    lexical_indices,
    syntactic_indices,
)
from .corpus import (
    Document,
    Qrels,
    Query,
    RunRanking,
    TrainingBatch,
    load_corpus,
    load_qrels,
    load_queries,
    make_batches,
    read_run,
    write_run,
)
from .encoder import (
    EncoderParams,
    Vocabulary,
    build_vocab,
    encode,
    load_checkpoint,
    save_checkpoint,
    score_batch,
)
from .evaluation import (
    AggregateStats,
    BucketCurve,
    PerQueryScores,
    SignificanceResult,
    aggregate,
    bucket_curve,
    combine_datasets,
    emit_report,
    ndcg_at_k,
    paired_significance,
    score_run,
)
from .retrieval import Bm25Index, RetrievalConfig, bm25_search, build_bm25, dense_search
from .synthetic import SyntheticDataset, SyntheticSpec, generate_synthetic_biased
from .text_analysis import (
    SyntacticUnits,
    TaggedText,
    amplify_noun_phrases,
    load_pretagged,
    pos_tag,
    segment_units,
    tokenize,
)
from .training import (
    CombinedDistribution,
    DebiasConfig,
    TrainConfig,
    contrastive_grad,
    contrastive_loss,
    make_biased_learner,
    optimizer_step,
    poe_combine,
    train_debiased,
    train_plain,
)
