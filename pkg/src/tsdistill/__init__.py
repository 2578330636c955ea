"""Synthetic mean-reverting series pipeline and annotation evaluation harness."""

__version__ = "0.1.0"

from .annotate import (
    Annotation,
    AnnotationSource,
    AnnotatorConfig,
    AnnotationClient,
    annotate,
    build_prompt,
    mock_annotate,
    parse_annotation_json,
    render_fact_sentences,
)
from .config import PipelineConfig, load_config
from .dataset import DatasetBuilder, DatasetManifest, Sample, export_sft, load_samples
from .digits import RescaledSeries, parse_digits, rescale_to_integers, serialize_digits
from .errors import (
    AnnotationFormatError,
    DataError,
    ParseError,
    PipelineError,
    TransportError,
    ValidationError,
)
from .evaluation import (
    CandidateOutput,
    EvalReport,
    cosine_score,
    emit_report,
    evaluate,
    feature_field_score,
    load_candidates,
    nli_field_score,
)
from .factcheck import FactCheckReport, agreement_report, apply_fact_check, fact_check_sample
from .features import (
    FeatureLabels,
    Location,
    Noise,
    OracleConfig,
    Trend,
    classify_noise,
    classify_trend,
    compute_labels,
    default_window,
    fact_sentence,
    fact_sentences,
    locate_extrema,
    noise_ratio,
    smooth,
)
from .ou import OuParams, ParamRanges, TimeSeries, generate_series, sample_params, theoretical_moments
from .plotting import render_plot
from .scorers import (
    FIELDS,
    ExtremaClaim,
    NLILabel,
    NLIVerdict,
    RemoteScorer,
    RuleBasedScorer,
    extract_category,
    nli_compare,
)
