"""Shared retrieval-strategy contract: context packages, budgets, prompts.

Every strategy maps (note, question) to a ContextPackage; the runner then
assembles one prompt per package with templates shared across strategies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from clearbench.corpus import Question, count_tokens

SEGMENT_SEPARATOR = "\n---\n"
DEFAULT_BUDGET_TOKENS = 8_500

CONTEXT_PLACEHOLDER = "{context}"
QUESTION_PLACEHOLDER = "{question}"


class Strategy(str, Enum):
    WIDE = "wide"
    RAG = "rag"
    CLEAR = "clear"

    @property
    def display(self) -> str:
        return {"wide": "Wide", "rag": "RAG", "clear": "CLEAR"}[self.value]


class PromptError(ValueError):
    pass


@dataclass(frozen=True)
class Segment:
    text: str
    start_word: int
    end_word: int
    score: float


@dataclass
class ContextPackage:
    strategy: Strategy
    segments: list[Segment]
    context_tokens: int
    provenance: dict = field(default_factory=dict)

    def validate(self) -> None:
        recount = sum(count_tokens(s.text) for s in self.segments)
        if recount != self.context_tokens:
            raise ValueError(
                f"context_tokens {self.context_tokens} != recount {recount}"
            )
        prev_end = None
        for seg in self.segments:
            if seg.start_word < 0 or seg.end_word <= seg.start_word:
                raise ValueError(f"bad segment span [{seg.start_word}, {seg.end_word})")
            if prev_end is not None and seg.start_word < prev_end:
                raise ValueError("segments overlap or are out of order")
            prev_end = seg.end_word

    @property
    def context_text(self) -> str:
        return SEGMENT_SEPARATOR.join(s.text for s in self.segments)


@dataclass(frozen=True)
class TokenBudget:
    max_context_tokens: int = DEFAULT_BUDGET_TOKENS

    def __post_init__(self):
        if self.max_context_tokens <= 0:
            raise ValueError("max_context_tokens must be positive")


def make_package(
    strategy: Strategy, segments: list[Segment], provenance: dict | None = None
) -> ContextPackage:
    pkg = ContextPackage(
        strategy=strategy,
        segments=segments,
        context_tokens=sum(count_tokens(s.text) for s in segments),
        provenance=provenance or {},
    )
    pkg.validate()
    return pkg


def validate_templates(system_template: str, user_template: str) -> None:
    combined = system_template + user_template
    for placeholder in (CONTEXT_PLACEHOLDER, QUESTION_PLACEHOLDER):
        if placeholder not in combined:
            raise PromptError(f"templates are missing the {placeholder} placeholder")


def render_messages(
    pkg: ContextPackage,
    question: Question,
    system_template: str,
    user_template: str,
) -> tuple[str, str]:
    """Substitute placeholders, returning (system message, user message)."""
    validate_templates(system_template, user_template)
    context = pkg.context_text

    def render(template: str) -> str:
        return template.replace(CONTEXT_PLACEHOLDER, context).replace(
            QUESTION_PLACEHOLDER, question.text
        )

    return render(system_template), render(user_template)


def assemble_prompt(
    pkg: ContextPackage,
    question: Question,
    system_template: str,
    user_template: str,
) -> str:
    """Full prompt string: rendered system and user messages joined by a blank
    line. Deterministic; segment texts join with a '---' separator line."""
    system_msg, user_msg = render_messages(pkg, question, system_template, user_template)
    if system_msg:
        return system_msg + "\n\n" + user_msg
    return user_msg
