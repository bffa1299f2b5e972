"""Uniform reasoner interface shared by the scripted and HTTP backends.

A request names one of the seven cognitive steps and carries a context
bundle with both the live objects the scripted backend computes from and
the string fields the prompt template for that step interpolates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

REQUEST_KINDS = (
    "interpret",
    "pattern_env",
    "pattern_self",
    "belief_env",
    "belief_self",
    "plan",
    "reflect",
)

PROVENANCES = ("llm", "scripted", "fallback")


class BackendError(Exception):
    """A backend could not produce a usable answer."""


class ParseError(BackendError):
    """Free text did not contain the structure a request kind demands."""


@dataclass(frozen=True)
class ReasonerRequest:
    kind: str
    context: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in REQUEST_KINDS:
            raise ValueError(f"unknown request kind {self.kind!r}")

    @classmethod
    def for_pattern(cls, kind, old_table, digest, reflections=()):
        return cls(
            kind=kind,
            context={
                "old_table": old_table,
                "digest": digest,
                "reflections": tuple(reflections),
            },
        )

    @classmethod
    def for_reflection(cls, record, perspective: int = 0):
        return cls(kind="reflect", context={"record": record, "perspective": perspective})

    @classmethod
    def for_interpret(cls, obs):
        return cls(kind="interpret", context={"obs": obs})

    @classmethod
    def for_belief_env(cls, obs, opp_actions, pattern_env, my_actions=(), pattern_self=None):
        return cls(
            kind="belief_env",
            context={
                "obs": obs,
                "opp_actions": tuple(opp_actions),
                "pattern_env": pattern_env,
                "my_actions": tuple(my_actions),
                "pattern_self": pattern_self,
            },
        )

    @classmethod
    def for_belief_self(cls, obs, pattern_self, env_belief):
        return cls(
            kind="belief_self",
            context={"obs": obs, "pattern_self": pattern_self, "env_belief": env_belief},
        )

    @classmethod
    def for_plan(cls, point, belief, pattern_env, self_policy=None, style="neutral", lookahead="max"):
        return cls(
            kind="plan",
            context={
                "point": point,
                "belief": belief,
                "pattern_env": pattern_env,
                "self_policy": self_policy,
                "style": style,
                "lookahead": lookahead,
            },
        )


@dataclass(frozen=True)
class ReasonerResponse:
    text: str
    structured: Any
    provenance: str

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")


@dataclass(frozen=True)
class BackendConfig:
    endpoint: str = ""
    model: str = ""
    temperature: float = 0.7
    max_retries: int = 3
    timeout: float = 30.0
    rate_limit: float | None = None  # requests per second ceiling
    backoff_base: float = 1.0
    json_mode: bool = False
    api_key_env: str = "LLM_API_KEY"
    fallback: bool = True

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


class Reasoner:
    """Interface: complete(request) -> ReasonerResponse."""

    def complete(self, request: ReasonerRequest) -> ReasonerResponse:
        raise NotImplementedError
