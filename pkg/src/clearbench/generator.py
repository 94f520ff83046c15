"""Deterministic synthetic clinical note and corpus generation.

Notes are seeded template expansions: fixed clinical scaffolding (sections,
medication lists, exam and laboratory findings), entity-dense "beat"
sentences spaced apart by entity-free narrative filler, and gold-relevant
fact blocks planted at a controlled position (beginning, middle or end of
the document). The same fact wording backs the corpus gold answers, so
answer quality genuinely depends on whether retrieval surfaces those spans.
"""

from __future__ import annotations

import random

from clearbench.corpus import ClinicalNote, Corpus, Question, count_tokens

MIN_TARGET_TOKENS = 1_000
TOKEN_TOLERANCE = 0.02

# Entity-free stretch (in words) kept between entity-bearing blocks. Must
# exceed twice the retrieval window radius plus the merge gap so merged
# entity windows stay separate instead of fusing into one giant span.
FULL_GAP_WORDS = 330

FACT_POSITIONS = ("beginning", "middle", "end")

QUESTION_ANEMIA = Question(
    id="anemia_history",
    text=(
        "Could the patient's anemia have been detected earlier based on "
        "their medical history? Answer in one paragraph."
    ),
    gold_answer=(
        "Yes, the medical history suggests the anemia could have been "
        "detected earlier. Hemoglobin was 13.1 g/dL two years before "
        "admission and 11.2 g/dL eighteen months before, a downward trend "
        "that was never flagged. Earlier clinic visits documented "
        "progressive fatigue, pallor, and exertional lightheadedness that "
        "were attributed to a busy schedule rather than anemia. A positive "
        "stool guaiac result and a ferritin of 9 ng/mL were recorded six "
        "months before admission, but no colonoscopy was arranged to "
        "evaluate the likely source of blood loss. Taken together, the "
        "falling hemoglobin, the compatible symptoms, and the unexplained "
        "bleeding signal made the anemia identifiable well before this "
        "admission."
    ),
)

QUESTION_HEART_FAILURE = Question(
    id="heart_failure_symptoms",
    text=(
        "Could the patient's heart failure have been detected earlier based "
        "on symptoms? Answer in one paragraph."
    ),
    gold_answer=(
        "Yes, the symptoms point to heart failure that could have been "
        "detected earlier. Dyspnea on exertion and two-pillow orthopnea had "
        "been present for roughly four months before presentation, and "
        "ankle swelling with a six-pound weight gain was documented at "
        "routine visits without further cardiac evaluation. A BNP of 642 "
        "pg/mL went without follow-up, and an echocardiogram a year earlier "
        "already showed borderline left ventricular function with an "
        "ejection fraction of 45 percent. Recognizing the pattern of "
        "exertional breathlessness, orthopnea, edema, and a rising "
        "natriuretic peptide would have allowed an earlier diagnosis of "
        "heart failure."
    ),
)

# Fact blocks share their wording with the gold answers above. Block order
# alternates topics so no single retrieval chunk can cover a whole topic.
FACT_BLOCKS: list[dict] = [
    {
        "id": "anemia_trend",
        "question_id": "anemia_history",
        "sentences": [
            "Looking back through the medical history, the anemia could "
            "arguably have been detected earlier: hemoglobin was 13.1 g/dL "
            "two years before admission and 11.2 g/dL eighteen months "
            "before, a downward trend that was never flagged.",
            "Earlier clinic visits documented progressive fatigue, pallor, "
            "and exertional lightheadedness that were attributed to a busy "
            "schedule rather than anemia.",
        ],
    },
    {
        "id": "heart_failure_symptoms_course",
        "question_id": "heart_failure_symptoms",
        "sentences": [
            "In retrospect the heart failure could have been detected "
            "earlier from symptoms alone: dyspnea on exertion and "
            "two-pillow orthopnea had been present for roughly four months "
            "before presentation.",
            "Ankle swelling, a six-pound weight gain, and worsening "
            "exercise intolerance were documented at routine visits, and an "
            "earlier elevated BNP was never repeated.",
        ],
    },
    {
        "id": "anemia_bleeding_workup",
        "question_id": "anemia_history",
        "sentences": [
            "A positive stool guaiac result and a ferritin of 9 ng/mL were "
            "recorded six months before admission, yet no colonoscopy was "
            "arranged to evaluate the likely source of blood loss, another "
            "point where the anemia history could have prompted earlier "
            "detection.",
        ],
    },
    {
        "id": "heart_failure_objective_signals",
        "question_id": "heart_failure_symptoms",
        "sentences": [
            "A BNP of 642 pg/mL went without follow-up, and an "
            "echocardiogram a year earlier already showed borderline left "
            "ventricular function with an ejection fraction of 45 percent, "
            "so the heart failure symptoms had measurable early correlates.",
        ],
    },
]

# Decoy material drawn from the lexicon but disjoint from the two gold
# storylines. Beats built from these anchor retrieval windows elsewhere in
# the document.
_DECOY_MED_DISEASE = [
    ("amlodipine", "hypertension"),
    ("losartan", "hypertension"),
    ("atorvastatin", "hyperlipidemia"),
    ("metformin", "type 2 diabetes"),
    ("empagliflozin", "type 2 diabetes"),
    ("omeprazole", "gastroesophageal reflux disease"),
    ("allopurinol", "gout"),
    ("sertraline", "depression"),
    ("gabapentin", "peripheral neuropathy"),
    ("levothyroxine", "hypothyroidism"),
    ("tamsulosin", "benign prostatic hyperplasia"),
    ("montelukast", "asthma"),
]

_DECOY_SYMPTOMS = [
    "headache",
    "back pain",
    "constipation",
    "insomnia",
    "dry mouth",
    "sore throat",
    "nasal congestion",
    "knee pain",
]

_DECOY_PROCEDURES = [
    "vaccination",
    "physical therapy",
    "mammography",
    "bone density scan",
    "pulmonary function testing",
    "sleep study",
]

_DECOY_ANATOMY = [
    "abdomen",
    "skin",
    "shoulder",
    "wrist",
    "thyroid",
    "spine",
]

# Narrative filler vocabulary. None of these words appear in the lexicon, so
# filler stretches contain no entities and windows never anchor inside them.
_FILLER_SUBJECTS = [
    "The care team",
    "The bedside nurse",
    "The covering resident",
    "The attending physician",
    "Case management",
    "The social worker",
    "The overnight team",
    "The day team",
    "The charge nurse",
    "The unit coordinator",
    "The primary team",
    "The discharge planner",
]

_FILLER_ACTIONS = [
    "reviewed the day's events with the patient",
    "updated the family on anticipated next steps",
    "coordinated follow-up arrangements with the outpatient office",
    "documented steady progress toward the stated goals",
    "confirmed that no new concerns had emerged overnight",
    "discussed expectations for the remainder of the stay",
    "summarized the morning's discussion for the record",
    "verified that earlier instructions were understood",
    "reconciled the paperwork ahead of the next care conference",
    "walked through the tentative timetable for going home",
    "revisited the goals of care during afternoon rounds",
    "noted that the patient rested comfortably between assessments",
    "recorded stable intake and output totals for the shift",
    "observed the patient ambulating in the hallway with supervision",
]

_FILLER_TAILS = [
    "and the overall plan was left unchanged",
    "and no additional orders were placed",
    "with all questions answered in detail",
    "before signing out to the evening shift",
    "and the patient voiced understanding",
    "without any change in the anticipated timeline",
    "and the family expressed agreement",
    "which was communicated to the covering team",
    "and the note was cosigned in the usual fashion",
    "with follow-up planned at the next touchpoint",
]

_FILLER_OPENERS = [
    "Later that day,",
    "During the morning,",
    "Through the afternoon,",
    "Overnight,",
    "At the midday check,",
    "Following rounds,",
    "Earlier in the shift,",
    "Toward the evening,",
    "On reassessment,",
    "In the interim,",
]


class _NoteBuilder:
    """Accumulates paragraphs while tracking tokens, words and gap state."""

    def __init__(self, rng: random.Random, gap_words: int):
        self.rng = rng
        self.gap_words = gap_words
        self.lines: list[str] = []
        self.tokens = 0
        self.words = 0
        self.words_since_entity = gap_words  # allow an immediate first beat
        self.fact_records: list[dict] = []
        self._paragraph: list[str] = []
        self._sentences_in_paragraph = 0
        self._paragraph_break_at = rng.randint(4, 7)

    # -- low-level emission -------------------------------------------------

    def flush_paragraph(self) -> None:
        # token/word counters were already advanced sentence by sentence
        if self._paragraph:
            self.lines.append(" ".join(self._paragraph))
            self._paragraph = []
            self._sentences_in_paragraph = 0
            self._paragraph_break_at = self.rng.randint(4, 7)

    def add_heading(self, name: str) -> None:
        self.flush_paragraph()
        if self.lines:
            self.lines.append("")
        line = name + ":"
        self.lines.append(line)
        self.tokens += count_tokens(line)
        self.words += len(line.split())

    def add_sentence(self, sentence: str, entity_bearing: bool) -> int:
        """Append one sentence to the open paragraph; returns its tokens."""
        before = self.tokens
        self._paragraph.append(sentence)
        n_words = len(sentence.split())
        self.tokens += count_tokens(sentence)
        self.words += n_words
        self._sentences_in_paragraph += 1
        if entity_bearing:
            self.words_since_entity = 0
        else:
            self.words_since_entity += n_words
        if self._sentences_in_paragraph >= self._paragraph_break_at:
            self.flush_paragraph()
        return self.tokens - before

    # -- content pieces -----------------------------------------------------

    def filler_sentence(self) -> int:
        rng = self.rng
        style = rng.randrange(3)
        if style == 0:
            s = (
                f"{rng.choice(_FILLER_SUBJECTS)} "
                f"{rng.choice(_FILLER_ACTIONS)} "
                f"{rng.choice(_FILLER_TAILS)}."
            )
        elif style == 1:
            s = (
                f"{rng.choice(_FILLER_OPENERS)} "
                f"{rng.choice(_FILLER_SUBJECTS).lower()} "
                f"{rng.choice(_FILLER_ACTIONS)} "
                f"{rng.choice(_FILLER_TAILS)}."
            )
        else:
            s = (
                f"On hospital day {rng.randint(1, 9)}, "
                f"{rng.choice(_FILLER_SUBJECTS).lower()} "
                f"{rng.choice(_FILLER_ACTIONS)} "
                f"{rng.choice(_FILLER_TAILS)}."
            )
        return self.add_sentence(s, entity_bearing=False)

    def beat_sentences(self) -> int:
        """One decoy beat: a single-category entity mention.

        Decoy beats deliberately stay within one entity category; spans with
        cross-category co-occurrence are the clinically rich ones, and the
        planted fact blocks are the main such spans outside the fixed
        scaffold.
        """
        rng = self.rng
        kind = rng.randrange(5)
        total = 0
        if kind == 0:
            med, _ = rng.choice(_DECOY_MED_DISEASE)
            total += self.add_sentence(
                f"Home {med} was continued at the prior dose, with no "
                f"changes made after review.",
                entity_bearing=True,
            )
        elif kind == 1:
            sys_bp = rng.randint(112, 148)
            dia_bp = rng.randint(62, 88)
            hr = rng.randint(58, 96)
            total += self.add_sentence(
                f"Vital signs at the routine check were reassuring, with "
                f"blood pressure {sys_bp}/{dia_bp} and heart rate {hr}.",
                entity_bearing=True,
            )
        elif kind == 2:
            symptom = rng.choice(_DECOY_SYMPTOMS)
            total += self.add_sentence(
                f"Intermittent {symptom} reported earlier in the week had "
                f"resolved without specific intervention.",
                entity_bearing=True,
            )
        elif kind == 3:
            procedure = rng.choice(_DECOY_PROCEDURES)
            total += self.add_sentence(
                f"A routine {procedure} was discussed for health "
                f"maintenance after discharge.",
                entity_bearing=True,
            )
        else:
            anatomy = rng.choice(_DECOY_ANATOMY)
            total += self.add_sentence(
                f"Examination of the {anatomy} remained unremarkable "
                f"compared with prior documentation.",
                entity_bearing=True,
            )
        if rng.random() < 0.4:
            total += self.filler_sentence()
        return total

    def emit_fact_block(self, block: dict, section: str) -> None:
        self.flush_paragraph()
        record = {
            "block_id": block["id"],
            "question_id": block["question_id"],
            "section": section,
            "start_word": self.words,
            "start_token": self.tokens,
        }
        for sentence in block["sentences"]:
            self.add_sentence(sentence, entity_bearing=True)
        self.flush_paragraph()
        self.fact_records.append(record)

    # -- slot emission --------------------------------------------------

    def emit_slot(
        self,
        quota_tokens: int,
        section: str,
        fact_blocks: list[dict] | None = None,
        fact_trigger: float = 0.5,
    ) -> None:
        """Fill a narrative slot: filler with beats on the gap cadence, plus
        any planted fact blocks once the trigger point is crossed."""
        pending = list(fact_blocks or [])
        # one beat plus a filler sentence; occasional merges with the next
        # section's entity cluster are fine, chain merges are not
        beat_reserve = 120
        emitted = 0
        trigger = fact_trigger * quota_tokens
        while emitted < quota_tokens or pending:
            if self.words_since_entity >= self.gap_words:
                if pending and emitted >= trigger:
                    before = self.tokens
                    self.emit_fact_block(pending.pop(0), section)
                    emitted += self.tokens - before
                    continue
                if emitted + beat_reserve <= quota_tokens:
                    emitted += self.beat_sentences()
                    continue
            emitted += self.filler_sentence()
        self.flush_paragraph()

    def text(self) -> str:
        self.flush_paragraph()
        return "\n".join(self.lines) + "\n"


def _fixed_sections(rng: random.Random) -> dict[str, list[tuple[str, bool]]]:
    """Scaffolding sentences per section as (sentence, entity_bearing)."""
    initials = rng.choice(["J.R.", "M.T.", "A.L.", "R.S.", "D.K.", "C.M."])
    age = rng.randint(58, 81)
    meds = rng.sample(_DECOY_MED_DISEASE, 4)
    pmh = rng.sample([d for _, d in _DECOY_MED_DISEASE], 4)
    relative = rng.choice(["father", "mother", "brother", "sister"])
    return {
        "_preamble": [
            (
                f"Patient {initials} is a {age}-year-old adult admitted from "
                f"the outpatient clinic for the evaluation described below.",
                False,
            ),
            (
                "This note consolidates the admission documentation and the "
                "subsequent inpatient course for continuity of care.",
                False,
            ),
        ],
        "CHIEF COMPLAINT": [
            (
                "Progressive breathlessness with marked fatigue and reduced "
                "activity tolerance over recent weeks.",
                True,
            )
        ],
        "HISTORY OF PRESENT ILLNESS": [
            (
                "The patient describes a gradual decline in stamina with "
                "daily activities becoming noticeably harder, culminating "
                "in the visit that led to this admission.",
                False,
            )
        ],
        "REVIEW OF SYSTEMS": [
            (
                "A complete review of systems was obtained and was notable "
                "only for the findings already described elsewhere in this "
                "note.",
                False,
            )
        ],
        "PAST MEDICAL HISTORY": [
            (
                f"Known chronic conditions include {pmh[0]}, {pmh[1]}, "
                f"{pmh[2]}, and {pmh[3]}, each previously managed in the "
                f"outpatient setting.",
                True,
            )
        ],
        "MEDICATIONS": [
            (
                f"Home medications on arrival included {meds[0][0]} for "
                f"{meds[0][1]}, {meds[1][0]} for {meds[1][1]}, "
                f"{meds[2][0]} for {meds[2][1]}, and {meds[3][0]} for "
                f"{meds[3][1]}.",
                True,
            )
        ],
        "FAMILY HISTORY": [
            (
                f"Family history is notable for coronary artery disease in "
                f"the patient's {relative}; no inherited blood disorders "
                f"are reported.",
                True,
            )
        ],
        "SOCIAL HISTORY": [
            (
                "The patient lives locally with family, is retired from "
                "office work, and does not use tobacco.",
                False,
            )
        ],
        "HOSPITAL COURSE": [
            (
                "The inpatient course is summarized chronologically below, "
                "with interval events recorded by the covering teams.",
                False,
            )
        ],
        "PHYSICAL EXAM": [
            (
                "On arrival, blood pressure was 104/62 with heart rate 102, "
                "and the exam showed pale conjunctivae with trace edema of "
                "the lower extremities.",
                True,
            )
        ],
        "LABORATORY": [
            (
                "Admission studies showed hemoglobin 8.9 g/dL, ferritin 7 "
                "ng/mL, creatinine 1.1 mg/dL, and BNP 1240 pg/mL.",
                True,
            ),
            (
                "Iron studies confirmed iron deficiency, and the complete "
                "blood count was otherwise without acute abnormality.",
                True,
            ),
        ],
        "IMAGING": [
            (
                "Chest radiograph showed mild pulmonary vascular congestion, "
                "and a formal transthoracic echocardiogram was requested.",
                True,
            )
        ],
        "ASSESSMENT": [
            (
                "Newly recognized iron deficiency anemia, most consistent "
                "with occult gastrointestinal blood loss, in a patient whose "
                "earlier outpatient records already hinted at the diagnosis.",
                True,
            ),
            (
                "Heart failure with reduced ejection fraction, now overtly "
                "symptomatic after months of gradually progressive "
                "exertional symptoms.",
                True,
            ),
        ],
        "PLAN": [
            (
                "Begin furosemide for decompensated heart failure, start "
                "ferrous sulfate, and transfuse if the hemoglobin falls "
                "further.",
                True,
            ),
            (
                "Arrange outpatient colonoscopy to evaluate for occult "
                "gastrointestinal bleeding and repeat the echocardiogram "
                "once volume status improves.",
                True,
            ),
        ],
    }


# Narrative slots and their share of the filler budget. The HOSPITAL COURSE
# midpoint lands near the document's midpoint, which is where "middle"
# placement puts the gold facts.
_SLOT_SHARES = {
    "HISTORY OF PRESENT ILLNESS": 0.15,
    "REVIEW OF SYSTEMS": 0.07,
    "SOCIAL HISTORY": 0.08,
    "HOSPITAL COURSE": 0.35,
    "CONSULTATION NOTES": 0.20,
    "NURSING NOTES": 0.15,
}

_SECTION_ORDER = [
    "CHIEF COMPLAINT",
    "HISTORY OF PRESENT ILLNESS",
    "REVIEW OF SYSTEMS",
    "PAST MEDICAL HISTORY",
    "MEDICATIONS",
    "FAMILY HISTORY",
    "SOCIAL HISTORY",
    "HOSPITAL COURSE",
    "CONSULTATION NOTES",
    "NURSING NOTES",
    "PHYSICAL EXAM",
    "LABORATORY",
    "IMAGING",
    "ASSESSMENT",
    "PLAN",
]

_SLOT_OPENERS = {
    "CONSULTATION NOTES": "Consulting services left interval updates, transcribed below.",
    "NURSING NOTES": "Nursing documentation for the stay is summarized in narrative form.",
}

# (slot, trigger fraction within the slot) per fact placement mode
_FACT_SLOT = {
    "beginning": ("HISTORY OF PRESENT ILLNESS", 0.0),
    "middle": ("HOSPITAL COURSE", 0.5),
    "end": ("NURSING NOTES", 1.0),
}


def _gap_words_for(target_tokens: int) -> int:
    if target_tokens >= 8_000:
        return FULL_GAP_WORDS
    return max(15, int(FULL_GAP_WORDS * target_tokens / 8_000))


def _build_once(
    seed_key: str, filler_budget: int, fact_position: str, gap_words: int
) -> _NoteBuilder:
    rng = random.Random(seed_key)
    builder = _NoteBuilder(rng, gap_words)
    fixed = _fixed_sections(rng)
    fact_slot, fact_trigger = _FACT_SLOT[fact_position]

    for sentence, _ in fixed["_preamble"]:
        builder.add_sentence(sentence, entity_bearing=False)
    builder.flush_paragraph()

    # Sub-sentence quotas would overshoot once per slot; pool them into the
    # main course slot so small notes stay on target.
    quotas = {name: int(share * filler_budget) for name, share in _SLOT_SHARES.items()}
    pooled = sum(q for name, q in quotas.items() if q < 40 and name != "HOSPITAL COURSE")
    for name in quotas:
        if quotas[name] < 40 and name != "HOSPITAL COURSE":
            quotas[name] = 0
    quotas["HOSPITAL COURSE"] += pooled

    for name in _SECTION_ORDER:
        builder.add_heading(name)
        for sentence, entity_bearing in fixed.get(name, []):
            builder.add_sentence(sentence, entity_bearing)
        if name in _SLOT_OPENERS:
            builder.add_sentence(_SLOT_OPENERS[name], entity_bearing=False)
        builder.flush_paragraph()
        if name in _SLOT_SHARES:
            facts = FACT_BLOCKS if name == fact_slot else None
            builder.emit_slot(quotas[name], name, facts, fact_trigger)
    builder.flush_paragraph()
    return builder


def generate_note(
    seed: int,
    target_tokens: int,
    fact_position: str = "middle",
    note_id: str | None = None,
) -> ClinicalNote:
    """Deterministic synthetic note within two percent of the token target.

    The emission loop is calibrated by regenerating with a corrected filler
    budget until the measured size converges; every pass is a pure function
    of the inputs, so identical arguments give byte-identical text.
    """
    if target_tokens < MIN_TARGET_TOKENS:
        raise ValueError(f"target_tokens must be >= {MIN_TARGET_TOKENS}")
    if fact_position not in FACT_POSITIONS:
        raise ValueError(f"fact_position must be one of {FACT_POSITIONS}")

    seed_key = f"clearbench-note:{seed}:{target_tokens}:{fact_position}"
    gap_words = _gap_words_for(target_tokens)

    # measure fixed overhead with a zero filler budget, then converge
    skeleton = _build_once(seed_key, 0, fact_position, gap_words)
    filler_budget = max(0, target_tokens - skeleton.tokens)
    builder = skeleton
    best = skeleton
    for _ in range(6):
        builder = _build_once(seed_key, filler_budget, fact_position, gap_words)
        error = builder.tokens - target_tokens
        if abs(error) < abs(best.tokens - target_tokens):
            best = builder
        if abs(error) <= max(8, int(0.002 * target_tokens)):
            break
        filler_budget = max(0, filler_budget - error)
    builder = best

    text = builder.text()
    total_words = len(text.split())
    facts = [
        {
            **record,
            "word_fraction": round(record["start_word"] / total_words, 4),
        }
        for record in builder.fact_records
    ]
    meta = {
        "generator": "clearbench-synthetic-v1",
        "seed": seed,
        "target_tokens": target_tokens,
        "fact_position": fact_position,
        "planted_headings": ["PREAMBLE"] + list(_SECTION_ORDER),
        "facts": facts,
    }
    note = ClinicalNote.from_text(note_id or f"note-s{seed}-t{target_tokens}", text, meta)
    if abs(note.token_size - target_tokens) > TOKEN_TOLERANCE * target_tokens:
        raise RuntimeError(
            f"generator failed to converge: {note.token_size} vs target {target_tokens}"
        )
    return note


# Token targets for the default corpus: four notes near each published
# stratum (10K, 42K, 65K).
DEFAULT_NOTE_TARGETS = [
    10_025,
    10_142,
    10_233,
    10_098,
    42_011,
    42_181,
    42_072,
    42_230,
    65_186,
    65_233,
    65_141,
    65_310,
]


def build_default_corpus(seed: int, fact_position: str = "middle") -> Corpus:
    """Twelve notes across three size strata plus the two study questions.

    Facts are planted mid-document by default, which is the placement that
    stresses retrieval the most.
    """
    notes = [
        generate_note(
            seed * 1_000 + i,
            target,
            fact_position=fact_position,
            note_id=f"clinical_note{i + 1}",
        )
        for i, target in enumerate(DEFAULT_NOTE_TARGETS)
    ]
    corpus = Corpus(
        notes=notes,
        questions=[QUESTION_ANEMIA, QUESTION_HEART_FAILURE],
        metadata={
            "generator": "clearbench-synthetic-v1",
            "seed": seed,
            "fact_position": fact_position,
        },
    )
    corpus.validate()
    return corpus
