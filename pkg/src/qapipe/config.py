"""Run configuration: one structured file covering endpoints and every knob.

Endpoints come in two families: ``http`` (real network clients) and ``mock-*``
(the deterministic offline stand-ins), so a config file alone switches a run
between live models and byte-reproducible mocks. The default config is fully
mocked and works without any file.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from .classify import CLASSIFY_TEMPLATE, ClassifierMethod, RuleLexicon
from .generate import DECODING_PROFILES, DecodingParams, GenerationMethod, PromptStrategy
from .llm import (
    EndpointConfig,
    HttpChatClient,
    HttpEmbedClient,
    HttpRerankClient,
    PromptTemplate,
)
from .mocks import EchoChat, FixedReplyChat, HashEmbedder, LexicalOverlapScorer, ScriptedChat
from .rewrite import DECOMPOSE_TEMPLATE, DENSE_REWRITE_TEMPLATE, SPARSE_REWRITE_TEMPLATE


class ConfigError(ValueError):
    pass


_TEMPLATE_DEFAULTS = {
    "classify": CLASSIFY_TEMPLATE,
    "rewrite_sparse": SPARSE_REWRITE_TEMPLATE,
    "rewrite_dense": DENSE_REWRITE_TEMPLATE,
    "decompose": DECOMPOSE_TEMPLATE,
}

_CHAT_ROLES = ("classifier", "rewriter", "generator", "judge")

_DEFAULT_JUDGE_RULES = [
    ("evaluating the equivalence", "Equivalence: 2"),
    ("evaluating the relevance", "Relevance: 2"),
    ("evaluating the faithfulness", "Faithfulness: 1"),
]


@dataclass
class AppConfig:
    classifier_method: ClassifierMethod = ClassifierMethod.RULE_BASED
    k_per_source: int = 10
    ranking_depth: int = 10
    context_k: int = 3
    prompt_strategy: PromptStrategy = PromptStrategy.B
    decoding: DecodingParams = field(default_factory=DecodingParams)
    generation_method: GenerationMethod = GenerationMethod.STANDARD
    bm25_k1: float = 0.9
    bm25_b: float = 0.4
    max_chunk_tokens: int = 512
    parallelism: int = 4
    budget_seconds: float | None = None
    eval_cutoffs: tuple[int, ...] = (1, 2, 3, 10)
    lexicon: RuleLexicon = field(default_factory=RuleLexicon)
    templates: dict[str, PromptTemplate] = field(
        default_factory=lambda: dict(_TEMPLATE_DEFAULTS)
    )
    endpoints: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.k_per_source < 1:
            raise ConfigError("k_per_source must be >= 1")
        if self.context_k < 1:
            raise ConfigError("context_k must be >= 1")
        if self.ranking_depth < 1:
            raise ConfigError("ranking_depth must be >= 1")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        if self.budget_seconds is not None and self.budget_seconds <= 0:
            raise ConfigError("budget_seconds must be > 0 when set")

    # ----- client construction -------------------------------------------

    def build_chat(self, role: str):
        spec = self.endpoints.get(role, {"kind": "mock-echo"})
        kind = spec.get("kind", "http")
        if kind == "http":
            return HttpChatClient(_endpoint_config(spec, role))
        if kind == "mock-fixed":
            return FixedReplyChat(str(spec.get("reply", "")))
        if kind == "mock-echo":
            return EchoChat()
        if kind == "mock-script":
            rules = [(str(r["contains"]), str(r["reply"])) for r in spec.get("rules", [])]
            return ScriptedChat(rules, default=str(spec.get("default", "")))
        raise ConfigError(f"endpoint {role!r}: unknown kind {kind!r}")

    def build_embedder(self):
        spec = self.endpoints.get("embedder", {"kind": "mock-hash"})
        kind = spec.get("kind", "http")
        if kind == "http":
            dim = spec.get("dim")
            return HttpEmbedClient(_endpoint_config(spec, "embedder"), dim=dim)
        if kind == "mock-hash":
            synonyms = {str(k): str(v) for k, v in (spec.get("synonyms") or {}).items()}
            return HashEmbedder(dim=int(spec.get("dim", 64)), synonyms=synonyms)
        raise ConfigError(f"endpoint 'embedder': unknown kind {kind!r}")

    def build_reranker(self):
        spec = self.endpoints.get("reranker", {"kind": "mock-overlap"})
        kind = spec.get("kind", "http")
        if kind == "http":
            return HttpRerankClient(_endpoint_config(spec, "reranker"))
        if kind == "mock-overlap":
            return LexicalOverlapScorer()
        raise ConfigError(f"endpoint 'reranker': unknown kind {kind!r}")

    # ----- construction helpers ------------------------------------------

    @classmethod
    def default(cls) -> "AppConfig":
        cfg = cls()
        cfg.endpoints = {
            "classifier": {"kind": "mock-fixed", "reply": "SINGLE"},
            "rewriter": {"kind": "mock-echo"},
            "generator": {"kind": "mock-echo"},
            "judge": {
                "kind": "mock-script",
                "rules": [{"contains": c, "reply": r} for c, r in _DEFAULT_JUDGE_RULES],
            },
            "embedder": {"kind": "mock-hash", "dim": 64},
            "reranker": {"kind": "mock-overlap"},
        }
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "AppConfig":
        try:
            raw = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = yaml.safe_load(raw) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config root must be a mapping, got {type(data).__name__}")
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AppConfig":
        cfg = cls.default()
        try:
            if "classifier" in data:
                cfg.classifier_method = ClassifierMethod(data["classifier"])
            retrieval = data.get("retrieval", {})
            cfg.k_per_source = int(retrieval.get("k_per_source", cfg.k_per_source))
            cfg.ranking_depth = int(retrieval.get("ranking_depth", cfg.ranking_depth))
            bm25 = data.get("bm25", {})
            cfg.bm25_k1 = float(bm25.get("k1", cfg.bm25_k1))
            cfg.bm25_b = float(bm25.get("b", cfg.bm25_b))
            chunking = data.get("chunking", {})
            cfg.max_chunk_tokens = int(chunking.get("max_tokens", cfg.max_chunk_tokens))
            gen = data.get("generation", {})
            cfg.context_k = int(gen.get("context_k", cfg.context_k))
            if "prompt_strategy" in gen:
                cfg.prompt_strategy = PromptStrategy(gen["prompt_strategy"])
            if "method" in gen:
                cfg.generation_method = GenerationMethod(gen["method"])
            if "decoding" in gen:
                cfg.decoding = parse_decoding(gen["decoding"])
            if "max_new_tokens" in gen:
                cfg.decoding = replace(cfg.decoding, max_new_tokens=int(gen["max_new_tokens"]))
            pipe = data.get("pipeline", {})
            cfg.parallelism = int(pipe.get("parallelism", cfg.parallelism))
            if pipe.get("budget_seconds") is not None:
                cfg.budget_seconds = float(pipe["budget_seconds"])
            if "eval_cutoffs" in data:
                cfg.eval_cutoffs = tuple(int(k) for k in data["eval_cutoffs"])
            rules = data.get("rules", {})
            cfg.lexicon = RuleLexicon(
                comparison_markers=tuple(
                    rules.get("comparison_markers", cfg.lexicon.comparison_markers)
                ),
                conjunction_patterns=tuple(
                    rules.get("conjunction_patterns", cfg.lexicon.conjunction_patterns)
                ),
                both_markers=tuple(rules.get("both_markers", cfg.lexicon.both_markers)),
            )
            for name, tpl in (data.get("prompts") or {}).items():
                if name not in _TEMPLATE_DEFAULTS:
                    raise ConfigError(f"unknown prompt template {name!r}")
                cfg.templates[name] = PromptTemplate(
                    system=str(tpl.get("system", "")),
                    user=str(tpl.get("user", "{question}")),
                )
            for role, spec in (data.get("endpoints") or {}).items():
                if role not in _CHAT_ROLES + ("embedder", "reranker"):
                    raise ConfigError(f"unknown endpoint role {role!r}")
                if not isinstance(spec, dict):
                    raise ConfigError(f"endpoint {role!r} must be a mapping")
                cfg.endpoints[role] = spec
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid config value: {exc}") from exc
        # re-run the range checks on the parsed values
        cfg.__post_init__()
        return cfg


def parse_decoding(value: Any) -> DecodingParams:
    """A profile name ("greedy", "sampling_low", ...) or an inline mapping."""
    if isinstance(value, str):
        if value not in DECODING_PROFILES:
            raise ConfigError(
                f"unknown decoding profile {value!r}; known: {sorted(DECODING_PROFILES)}"
            )
        return DECODING_PROFILES[value]
    if isinstance(value, dict):
        try:
            return DecodingParams(
                sampling=bool(value.get("sampling", False)),
                temperature=float(value.get("temperature", 0.7)),
                top_p=float(value.get("top_p", 1.0)),
                top_k=int(value.get("top_k", 1)),
                max_new_tokens=int(value.get("max_new_tokens", 200)),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid decoding parameters: {exc}") from exc
    raise ConfigError(f"decoding must be a profile name or mapping, got {type(value).__name__}")


def _endpoint_config(spec: dict, role: str) -> EndpointConfig:
    if "base_url" not in spec:
        raise ConfigError(f"endpoint {role!r}: http endpoints need base_url")
    try:
        return EndpointConfig(
            base_url=str(spec["base_url"]),
            model=str(spec.get("model", "")),
            api_key_env=spec.get("api_key_env"),
            timeout_ms=int(spec.get("timeout_ms", 30_000)),
            max_retries=int(spec.get("max_retries", 2)),
            backoff_initial_ms=int(spec.get("backoff_initial_ms", 200)),
            backoff_multiplier=float(spec.get("backoff_multiplier", 2.0)),
            batch_size=int(spec.get("batch_size", 32)),
        )
    except ValueError as exc:
        raise ConfigError(f"endpoint {role!r}: {exc}") from exc
