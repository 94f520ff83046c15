"""Default prompt templates and the named prompt-strategy presets."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_SYSTEM_TEMPLATE = (
    "You are a careful clinical assistant. Answer questions about the "
    "patient using only the provided chart context."
)

DEFAULT_USER_TEMPLATE = (
    "Context:\n{context}\n\n"
    "Question: {question}\n\n"
    "Answer in one paragraph using only the context above."
)


@dataclass(frozen=True)
class PromptPreset:
    id: str
    name: str
    description: str
    system_template: str
    user_template: str


PRESETS: list[PromptPreset] = [
    PromptPreset(
        id="base_question",
        name="Base Question",
        description="Ask the question directly with no added guidance.",
        system_template=DEFAULT_SYSTEM_TEMPLATE,
        user_template=DEFAULT_USER_TEMPLATE,
    ),
    PromptPreset(
        id="timeline_symptom_trigger",
        name="Timeline + Symptom Trigger",
        description=(
            "Trace symptoms chronologically and flag the first moment each "
            "trigger was documented."
        ),
        system_template=DEFAULT_SYSTEM_TEMPLATE,
        user_template=(
            "Context:\n{context}\n\n"
            "Question: {question}\n\n"
            "Build a timeline of the relevant symptoms and findings, note "
            "when each symptom or trigger first appears in the record, and "
            "answer in one paragraph grounded in that chronology."
        ),
    ),
    PromptPreset(
        id="keyword_guided_reasoning",
        name="Keyword-Guided Clinical Reasoning",
        description=(
            "Scan for key clinical terms first, then reason over the "
            "passages where they occur."
        ),
        system_template=DEFAULT_SYSTEM_TEMPLATE,
        user_template=(
            "Context:\n{context}\n\n"
            "Question: {question}\n\n"
            "Identify the key clinical keywords in the question, locate the "
            "passages where those keywords or close variants occur, and "
            "answer in one paragraph citing that evidence."
        ),
    ),
    PromptPreset(
        id="risk_factor_lab_search",
        name="Risk Factor + Laboratory Search",
        description=(
            "Search structured risk factors and laboratory values before "
            "answering."
        ),
        system_template=DEFAULT_SYSTEM_TEMPLATE,
        user_template=(
            "Context:\n{context}\n\n"
            "Question: {question}\n\n"
            "List the documented risk factors and laboratory values or "
            "measurements relevant to the question, then answer in one "
            "paragraph weighing that evidence."
        ),
    ),
]


def preset_by_id(preset_id: str) -> PromptPreset:
    for preset in PRESETS:
        if preset.id == preset_id:
            return preset
    raise KeyError(preset_id)
