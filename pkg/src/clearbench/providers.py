"""Embedding and answer-generation backends.

The deterministic providers make the entire evaluation reproducible offline;
the remote provider speaks the common chat-completions JSON dialect for live
cross-model runs. Both sides honor the same request/response contract.
"""

from __future__ import annotations

import os
import re
import threading
import time
import uuid
import zlib
from dataclasses import dataclass

import numpy as np

from clearbench.corpus import Question, count_tokens
from clearbench.retrieval import ContextPackage, assemble_prompt, render_messages
from clearbench.text import STOPWORDS, split_sentences

EMBEDDING_DIM = 256
ENV_LLM_URL = "CLEARBENCH_LLM_URL"
ENV_LLM_KEY = "CLEARBENCH_LLM_KEY"

_GRAM_RE = re.compile(r"[a-z0-9]+")


@dataclass
class AnswerRequest:
    model_id: str
    system_template: str
    user_template: str
    context: ContextPackage
    question: Question


@dataclass
class AnswerResponse:
    text: str
    prompt_tokens: int
    completion_tokens: int
    model_id: str
    latency_ms: int = 0

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


class ProviderError(RuntimeError):
    """Base class for provider failures; carries model and request ids."""

    error_class = "provider_error"

    def __init__(self, message: str, model_id: str, request_id: str):
        super().__init__(f"{message} (model={model_id}, request={request_id})")
        self.model_id = model_id
        self.request_id = request_id


class TransportError(ProviderError):
    error_class = "transport_error"


class CredentialError(ProviderError):
    error_class = "credential_error"


class ProtocolError(ProviderError):
    error_class = "protocol_error"


class HashingEmbedder:
    """Feature-hashed bag of word unigrams and bigrams.

    Lowercase alphanumeric tokens with stopwords removed are hashed (with a
    fixed seed) into ``dim`` buckets with raw term-frequency weights, then
    L2-normalized. Empty or stopword-only input embeds to the zero vector.
    With nonnegative weights every cosine between embeddings lies in [0, 1].
    """

    def __init__(self, dim: int = EMBEDDING_DIM, seed: str = "clearbench-v1"):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self._seed = seed.encode()

    def _bucket(self, feature: str) -> int:
        return zlib.crc32(self._seed + feature.encode()) % self.dim

    def embed(self, text: str) -> np.ndarray:
        grams = [g for g in _GRAM_RE.findall(text.lower()) if g not in STOPWORDS]
        vec = np.zeros(self.dim, dtype=np.float64)
        for g in grams:
            vec[self._bucket("u:" + g)] += 1.0
        for a, b in zip(grams, grams[1:]):
            vec[self._bucket(f"b:{a} {b}")] += 1.0
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec


class MockAnswerProvider:
    """Extractive stand-in for a live model.

    Splits the retrieved context into sentences, ranks them by content-word
    overlap with the rendered user message (instructions plus question), and
    concatenates the top sentences in document order up to ``max_words``.
    Answer quality therefore tracks retrieval quality, which is what makes
    offline strategy comparisons meaningful.
    """

    kind = "mock"

    def __init__(self, max_words: int = 120):
        self.max_words = max_words

    def generate_answer(self, req: AnswerRequest) -> AnswerResponse:
        prompt = assemble_prompt(
            req.context, req.question, req.system_template, req.user_template
        )
        prompt_tokens = count_tokens(prompt)

        context_text = req.context.context_text
        if not context_text.strip():
            text = "insufficient context"
            return AnswerResponse(
                text=text,
                prompt_tokens=prompt_tokens,
                completion_tokens=count_tokens(text),
                model_id=req.model_id,
            )

        query = req.user_template.replace("{context}", " ").replace(
            "{question}", req.question.text
        )
        query_words = _content_word_set(query)
        sentences = split_sentences(context_text)
        ranked = sorted(
            range(len(sentences)),
            key=lambda i: (-_overlap(sentences[i], query_words), i),
        )

        chosen: list[int] = []
        total_words = 0
        for i in ranked:
            if _overlap(sentences[i], query_words) == 0:
                break
            n_words = len(sentences[i].split())
            if chosen and total_words + n_words > self.max_words:
                break
            chosen.append(i)
            total_words += n_words
            if total_words >= self.max_words:
                break
        if not chosen:
            chosen = [0]
        text = " ".join(sentences[i] for i in sorted(chosen))
        return AnswerResponse(
            text=text,
            prompt_tokens=prompt_tokens,
            completion_tokens=count_tokens(text),
            model_id=req.model_id,
        )


def _content_word_set(text: str) -> frozenset[str]:
    return frozenset(
        g for g in _GRAM_RE.findall(text.lower()) if g not in STOPWORDS
    )


def _overlap(sentence: str, query_words: frozenset[str]) -> int:
    return len(_content_word_set(sentence) & query_words)


class RemoteChatProvider:
    """Client for chat-completions JSON APIs compatible with the common
    /chat/completions contract.

    Transient failures (network errors, 429, 5xx) are retried up to
    ``max_retries`` times with exponential backoff; authentication failures
    are never retried. A bounded semaphore caps requests in flight.
    """

    kind = "remote"

    def __init__(
        self,
        url: str | None = None,
        api_key: str | None = None,
        max_retries: int = 3,
        backoff_seconds: float = 0.5,
        timeout_seconds: float = 60.0,
        max_in_flight: int = 4,
        transport=None,
        sleep=time.sleep,
    ):
        import httpx

        url = url or os.environ.get(ENV_LLM_URL)
        if not url:
            raise ValueError(f"remote provider requires a URL ({ENV_LLM_URL})")
        if not url.rstrip("/").endswith("/chat/completions"):
            url = url.rstrip("/") + "/chat/completions"
        self.url = url
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_LLM_KEY, "")
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self._sleep = sleep
        self._semaphore = threading.BoundedSemaphore(max_in_flight)
        self._client = httpx.Client(transport=transport, timeout=timeout_seconds)

    def close(self) -> None:
        self._client.close()

    def generate_answer(self, req: AnswerRequest) -> AnswerResponse:
        import httpx

        request_id = uuid.uuid4().hex
        system_msg, user_msg = render_messages(
            req.context, req.question, req.system_template, req.user_template
        )
        body = {
            "model": req.model_id,
            "messages": [
                {"role": "system", "content": system_msg},
                {"role": "user", "content": user_msg},
            ],
            "temperature": 0,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        start = time.monotonic()
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                self._sleep(self.backoff_seconds * (2 ** (attempt - 1)))
            try:
                with self._semaphore:
                    response = self._client.post(self.url, json=body, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code in (401, 403):
                raise CredentialError(
                    f"authentication rejected (HTTP {response.status_code})",
                    req.model_id,
                    request_id,
                )
            if response.status_code == 429 or response.status_code >= 500:
                last_error = RuntimeError(f"HTTP {response.status_code}")
                continue
            if response.status_code != 200:
                raise ProtocolError(
                    f"unexpected HTTP {response.status_code}", req.model_id, request_id
                )
            latency_ms = int((time.monotonic() - start) * 1000)
            return self._parse(response, req, request_id, latency_ms)
        raise TransportError(
            f"request failed after {self.max_retries + 1} attempts: {last_error}",
            req.model_id,
            request_id,
        )

    def _parse(self, response, req: AnswerRequest, request_id: str, latency_ms: int) -> AnswerResponse:
        try:
            payload = response.json()
            text = payload["choices"][0]["message"]["content"]
            if not isinstance(text, str):
                raise TypeError("content is not a string")
            usage = payload.get("usage", {})
            prompt_tokens = int(usage.get("prompt_tokens", 0))
            completion_tokens = int(usage.get("completion_tokens", 0))
        except Exception as exc:
            raise ProtocolError(
                f"malformed response body: {exc}", req.model_id, request_id
            ) from exc
        return AnswerResponse(
            text=text,
            prompt_tokens=prompt_tokens,
            completion_tokens=completion_tokens,
            model_id=req.model_id,
            latency_ms=latency_ms,
        )
