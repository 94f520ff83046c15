from __future__ import annotations

import json

import httpx
import numpy as np
import pytest

from clearbench.corpus import Question, count_tokens
from clearbench.metrics import cosine
from clearbench.providers import (
    AnswerRequest,
    CredentialError,
    HashingEmbedder,
    MockAnswerProvider,
    ProtocolError,
    RemoteChatProvider,
    TransportError,
)
from clearbench.retrieval import Segment, Strategy, make_package

QUESTION = Question(
    id="q1",
    text="Could the patient's anemia have been detected earlier based on their medical history?",
    gold_answer="Yes, the falling hemoglobin showed anemia earlier.",
)
SYSTEM = "Use only the context."
USER = "Context:\n{context}\n\nQuestion: {question}\n\nAnswer briefly."


def package_of(text: str):
    if not text:
        return make_package(Strategy.CLEAR, [])
    n = len(text.split())
    return make_package(
        Strategy.CLEAR, [Segment(text=text, start_word=0, end_word=n, score=1.0)]
    )


class TestHashingEmbedder:
    def test_deterministic(self, embedder):
        a = embedder.embed("anemia detected early in clinic")
        b = embedder.embed("anemia detected early in clinic")
        assert np.array_equal(a, b)

    def test_unit_norm_and_self_cosine(self, embedder):
        v = embedder.embed("iron studies confirmed the diagnosis")
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_zero_vector_for_empty_and_stopword_only(self, embedder):
        assert np.all(embedder.embed("") == 0)
        assert np.all(embedder.embed("the of and is") == 0)

    def test_shared_token_orders_similarity(self, embedder):
        anchor = embedder.embed("anemia detected early")
        close = embedder.embed("anemia found sooner")
        far = embedder.embed("knee arthroscopy scheduled")
        assert cosine(anchor, close) > cosine(anchor, far)

    def test_dimension(self, embedder):
        assert embedder.embed("x").shape == (256,)
        assert HashingEmbedder(dim=32).embed("word").shape == (32,)

    def test_cosine_bounds_nonnegative(self, embedder):
        texts = [
            "fatigue and pallor documented",
            "routine paperwork finished",
            "hemoglobin trend reviewed",
        ]
        for a in texts:
            for b in texts:
                value = cosine(embedder.embed(a), embedder.embed(b))
                assert 0.0 <= value <= 1.0 + 1e-12


class TestMockProvider:
    def test_planted_gold_sentence_surfaces(self):
        gold_sentence = (
            "The anemia could have been detected earlier from the medical history."
        )
        text = (
            "Routine paperwork was completed without changes. "
            + gold_sentence
            + " The family was updated in the afternoon."
        )
        provider = MockAnswerProvider()
        resp = provider.generate_answer(
            AnswerRequest("m", SYSTEM, USER, package_of(text), QUESTION)
        )
        assert gold_sentence in resp.text

    def test_empty_context(self):
        provider = MockAnswerProvider()
        resp = provider.generate_answer(
            AnswerRequest("m", SYSTEM, USER, package_of(""), QUESTION)
        )
        assert resp.text == "insufficient context"
        assert resp.completion_tokens == count_tokens("insufficient context")

    def test_deterministic(self):
        provider = MockAnswerProvider()
        req = AnswerRequest(
            "m", SYSTEM, USER, package_of("anemia was detected. fatigue noted."), QUESTION
        )
        assert provider.generate_answer(req) == provider.generate_answer(req)

    def test_token_accounting(self):
        provider = MockAnswerProvider()
        req = AnswerRequest(
            "m", SYSTEM, USER, package_of("anemia was detected early."), QUESTION
        )
        resp = provider.generate_answer(req)
        from clearbench.retrieval import assemble_prompt

        prompt = assemble_prompt(req.context, req.question, SYSTEM, USER)
        assert resp.prompt_tokens == count_tokens(prompt)
        assert resp.completion_tokens == count_tokens(resp.text)
        assert resp.total_tokens == resp.prompt_tokens + resp.completion_tokens

    def test_word_cap(self):
        sentences = " ".join(
            f"anemia history sentence number {i} with extra words attached." for i in range(40)
        )
        provider = MockAnswerProvider(max_words=30)
        resp = provider.generate_answer(
            AnswerRequest("m", SYSTEM, USER, package_of(sentences), QUESTION)
        )
        assert len(resp.text.split()) <= 40  # first sentence always allowed


def _remote(transport, **kwargs) -> RemoteChatProvider:
    return RemoteChatProvider(
        url="https://llm.example/v1",
        api_key="key",
        transport=transport,
        sleep=lambda _: None,
        **kwargs,
    )


def _ok_response(text="X", prompt_tokens=10, completion_tokens=5):
    return httpx.Response(
        200,
        json={
            "choices": [{"message": {"role": "assistant", "content": text}}],
            "usage": {"prompt_tokens": prompt_tokens, "completion_tokens": completion_tokens},
        },
    )


def _request():
    return AnswerRequest(
        "model-x", SYSTEM, USER, package_of("anemia detected early."), QUESTION
    )


class TestRemoteProvider:
    def test_maps_response_fields(self):
        seen = {}

        def handler(request):
            seen["url"] = str(request.url)
            seen["body"] = json.loads(request.content)
            seen["auth"] = request.headers.get("authorization")
            return _ok_response("X", 10, 5)

        provider = _remote(httpx.MockTransport(handler))
        resp = provider.generate_answer(_request())
        assert (resp.text, resp.prompt_tokens, resp.completion_tokens) == ("X", 10, 5)
        assert resp.model_id == "model-x"
        assert seen["url"].endswith("/v1/chat/completions")
        assert seen["auth"] == "Bearer key"
        assert seen["body"]["model"] == "model-x"
        roles = [m["role"] for m in seen["body"]["messages"]]
        assert roles == ["system", "user"]
        assert "anemia detected early." in seen["body"]["messages"][1]["content"]

    def test_retries_then_succeeds(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] <= 2:
                return httpx.Response(500, text="boom")
            return _ok_response()

        provider = _remote(httpx.MockTransport(handler))
        resp = provider.generate_answer(_request())
        assert resp.text == "X"
        assert calls["n"] == 3

    def test_credential_error_never_retried(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            return httpx.Response(401, text="no")

        provider = _remote(httpx.MockTransport(handler))
        with pytest.raises(CredentialError) as err:
            provider.generate_answer(_request())
        assert calls["n"] == 1
        assert "model-x" in str(err.value)

    def test_transport_error_after_retries(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            raise httpx.ConnectError("refused")

        provider = _remote(httpx.MockTransport(handler), max_retries=3)
        with pytest.raises(TransportError):
            provider.generate_answer(_request())
        assert calls["n"] == 4

    def test_malformed_body_protocol_error(self):
        provider = _remote(
            httpx.MockTransport(lambda request: httpx.Response(200, json={"nope": 1}))
        )
        with pytest.raises(ProtocolError):
            provider.generate_answer(_request())

    def test_url_not_doubled(self):
        seen = {}

        def handler(request):
            seen["url"] = str(request.url)
            return _ok_response()

        provider = RemoteChatProvider(
            url="https://llm.example/v1/chat/completions",
            api_key="",
            transport=httpx.MockTransport(handler),
            sleep=lambda _: None,
        )
        provider.generate_answer(_request())
        assert seen["url"] == "https://llm.example/v1/chat/completions"

    def test_requires_url(self, monkeypatch):
        monkeypatch.delenv("CLEARBENCH_LLM_URL", raising=False)
        with pytest.raises(ValueError):
            RemoteChatProvider()
