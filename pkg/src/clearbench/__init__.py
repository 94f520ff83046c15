"""Entity-aware clinical question-answering retrieval and evaluation."""

from clearbench.analysis import (
    ReportTables,
    SweepResult,
    adjusted_score,
    build_report_tables,
    render_report,
    sweep,
)
from clearbench.baselines import Chunk, build_wide_context, chunk_note, retrieve_rag
from clearbench.clear import (
    EntityWindow,
    WindowConfig,
    build_windows,
    merge_windows,
    retrieve_clear,
    score_window,
)
from clearbench.corpus import (
    ClinicalNote,
    Corpus,
    CorpusError,
    CorpusWarning,
    Question,
    SizeClass,
    classify_size,
    count_tokens,
    load_corpus,
    save_corpus,
)
from clearbench.entities import (
    ClinicalEntity,
    EntityCategory,
    Lexicon,
    MatchKind,
    default_lexicon,
    extract_entities,
    extract_values,
    score_confidence,
)
from clearbench.generator import build_default_corpus, generate_note
from clearbench.metrics import (
    EvalResult,
    WinTable,
    bucket_analysis,
    cosine,
    meteor,
    token_savings,
    win_table,
)
from clearbench.providers import (
    AnswerRequest,
    AnswerResponse,
    HashingEmbedder,
    MockAnswerProvider,
    RemoteChatProvider,
)
from clearbench.retrieval import (
    ContextPackage,
    Segment,
    Strategy,
    TokenBudget,
    assemble_prompt,
)
from clearbench.runconfig import RunConfig
from clearbench.runner import (
    Engine,
    RunRecord,
    load_fixture,
    replay_fixture,
    run_matrix,
)
from clearbench.sections import (
    Section,
    SectionWeightTable,
    parse_sections,
    section_at,
    weight_of,
)

__version__ = "0.1.0"

__all__ = [
    "AnswerRequest",
    "AnswerResponse",
    "Chunk",
    "ClinicalEntity",
    "ClinicalNote",
    "ContextPackage",
    "Corpus",
    "CorpusError",
    "CorpusWarning",
    "Engine",
    "EntityCategory",
    "EntityWindow",
    "EvalResult",
    "HashingEmbedder",
    "Lexicon",
    "MatchKind",
    "MockAnswerProvider",
    "Question",
    "RemoteChatProvider",
    "ReportTables",
    "RunConfig",
    "RunRecord",
    "Section",
    "SectionWeightTable",
    "Segment",
    "SizeClass",
    "Strategy",
    "SweepResult",
    "TokenBudget",
    "WinTable",
    "WindowConfig",
    "adjusted_score",
    "assemble_prompt",
    "bucket_analysis",
    "build_default_corpus",
    "build_report_tables",
    "build_wide_context",
    "build_windows",
    "chunk_note",
    "classify_size",
    "cosine",
    "count_tokens",
    "default_lexicon",
    "extract_entities",
    "extract_values",
    "generate_note",
    "load_corpus",
    "load_fixture",
    "merge_windows",
    "meteor",
    "parse_sections",
    "render_report",
    "replay_fixture",
    "retrieve_clear",
    "retrieve_rag",
    "run_matrix",
    "save_corpus",
    "score_confidence",
    "score_window",
    "section_at",
    "sweep",
    "token_savings",
    "weight_of",
    "win_table",
]
