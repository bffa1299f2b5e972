"""Chat-completion HTTP backend with retries, rate limiting and fallback.

The transport is injectable (tests stub it); the default posts a standard
chat-completion payload (model, messages, temperature) to the configured
endpoint with a bearer key read from the environment. Transport failures
retry with exponential backoff; exhausted retries or schema-invalid answers
fall back to the scripted reasoner when fallback is enabled.
"""

from __future__ import annotations

import logging
import os
import threading
import time

from ..engine import RANKS, ROUNDS
from ..policy import PatternReport
from .base import BackendConfig, BackendError, ParseError, Reasoner, ReasonerRequest, ReasonerResponse
from .parsing import (
    extract_best_plan,
    extract_distribution,
    extract_pattern_rows,
    extract_plan_numbers,
)
from .prompts import (
    DEFAULT_AGENT_NAME,
    DEFAULT_RECIPIENT_NAME,
    GAME_NAME,
    OBSERVATION_RULES_TEXT,
    RULES_TEXT,
    SYSTEM_MESSAGE,
    render,
)
from .scripted import (
    ScriptedReasoner,
    belief_to_text,
    digest_to_text,
    reflections_to_text,
    table_to_text,
)

logger = logging.getLogger(__name__)


def http_transport(config: BackendConfig):
    """POST one chat-completion request and return the reply text."""
    import requests

    def post(payload: dict) -> str:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(config.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        response = requests.post(
            config.endpoint, json=payload, headers=headers, timeout=config.timeout
        )
        response.raise_for_status()
        return response.json()["choices"][0]["message"]["content"]

    return post


class LLMReasoner(Reasoner):
    def __init__(
        self,
        config: BackendConfig,
        transport=None,
        scripted: ScriptedReasoner | None = None,
        sleep=time.sleep,
        agent_name: str = DEFAULT_AGENT_NAME,
        recipient_name: str = DEFAULT_RECIPIENT_NAME,
    ):
        self.config = config
        self.transport = transport or http_transport(config)
        self.scripted = scripted or ScriptedReasoner()
        self.sleep = sleep
        self.agent_name = agent_name
        self.recipient_name = recipient_name
        self._lock = threading.Lock()
        self._last_request = 0.0

    # -- prompt assembly ---------------------------------------------------

    def build_prompt(self, request: ReasonerRequest) -> str:
        return render(request.kind, self.template_variables(request))

    def template_variables(self, request: ReasonerRequest) -> dict:
        ctx = request.context
        base = {
            "agent_name": self.agent_name,
            "initiator_name": self.agent_name,
            "recipient_name": self.recipient_name,
            "game_name": GAME_NAME,
            "rule": RULES_TEXT,
        }
        kind = request.kind
        if kind == "interpret":
            obs = ctx["obs"]
            base.update(
                user_index=ctx.get("user_index", 0),
                observation=obs.prompt_repr(),
                observation_rule=OBSERVATION_RULES_TEXT,
                valid_action_list=repr(list(obs.legal_actions)),
            )
        elif kind in ("pattern_env", "pattern_self", "reflect"):
            base.update(
                cshort_summarization=ctx.get("current_summary", "the game just started"),
                long_memory=self._long_memory(ctx),
            )
            if kind == "pattern_env":
                base["old_opponent_pattern"] = table_to_text(
                    ctx["old_table"], owner=self.recipient_name
                )
            else:
                old = ctx.get("old_table")
                base["old_self_pattern"] = (
                    table_to_text(old, owner="I") if old is not None else "no strategy formed yet"
                )
                env = ctx.get("pattern_env")
                base["opponent_pattern"] = (
                    table_to_text(env, owner=self.recipient_name)
                    if env is not None
                    else "not analysed yet"
                )
        elif kind == "belief_env":
            base.update(
                pattern=self._pattern_text(ctx.get("pattern_env")),
                observation=ctx["obs"].prompt_repr(),
                recent_observations=self._actions_text(ctx.get("opp_actions", ())),
                long_memory=ctx.get("long_memory", "none yet"),
            )
        elif kind == "belief_self":
            base.update(
                pattern=self._pattern_text(ctx.get("pattern_self"), owner="I"),
                oppo_pattern=self._pattern_text(ctx.get("pattern_env")),
                oppo_belief=belief_to_text(ctx["env_belief"], owner=self.recipient_name),
                observation=ctx["obs"].prompt_repr(),
                recent_observations=ctx.get("recent_observations", "see belief above"),
                long_memory=ctx.get("long_memory", "none yet"),
            )
        elif kind == "plan":
            point = ctx["point"]
            base.update(
                pattern=self._pattern_text(ctx.get("self_policy"), owner="I"),
                observation=point.obs.prompt_repr(),
                recent_observations=ctx.get("recent_observations", "this round so far"),
                belief=belief_to_text(ctx["belief"], owner=self.recipient_name)
                if hasattr(ctx["belief"], "posterior")
                else repr(ctx["belief"]),
                valid_action_list=repr(list(point.obs.legal_actions)),
            )
        return base

    def _pattern_text(self, pattern, owner=None):
        if pattern is None:
            return "not analysed yet"
        return table_to_text(pattern, owner=owner or self.recipient_name)

    def _actions_text(self, actions):
        if not actions:
            return f"{self.recipient_name} has not acted yet this game"
        return "; ".join(f"{self.recipient_name} did {a} ({ctx})" for a, ctx in actions)

    def _long_memory(self, ctx):
        parts = []
        if ctx.get("digest") is not None:
            parts.append(digest_to_text(ctx["digest"]))
        if ctx.get("reflections"):
            parts.append(reflections_to_text(ctx["reflections"]))
        if ctx.get("record") is not None:
            record = ctx["record"]
            steps = "; ".join(f"player {s.player} {s.action}" for s in record.steps)
            parts.append(
                f"game {record.game_index}: {steps}; cards revealed "
                f"{record.revealed_cards}, public {record.public_card}, "
                f"net {record.outcome.net_chips}"
            )
        return "\n".join(parts) or "no games on record yet"

    # -- transport ---------------------------------------------------------

    def _throttle(self):
        if not self.config.rate_limit:
            return
        min_interval = 1.0 / self.config.rate_limit
        with self._lock:
            wait = self._last_request + min_interval - time.monotonic()
            if wait > 0:
                self.sleep(wait)
            self._last_request = time.monotonic()

    def _post(self, prompt: str) -> str:
        payload = {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": SYSTEM_MESSAGE},
                {"role": "user", "content": prompt},
            ],
            "temperature": self.config.temperature,
        }
        if self.config.json_mode:
            payload["response_format"] = {"type": "json_object"}
        last_error = None
        for attempt in range(self.config.max_retries + 1):
            self._throttle()
            try:
                return self.transport(payload)
            except Exception as exc:  # transport-level failure; retry
                last_error = exc
                if attempt < self.config.max_retries:
                    delay = self.config.backoff_base * (2 ** attempt)
                    logger.warning(
                        "transport failed (%s); retry %d/%d in %.1fs",
                        exc, attempt + 1, self.config.max_retries, delay,
                    )
                    self.sleep(delay)
        raise BackendError(f"transport failed after {self.config.max_retries + 1} attempts: {last_error}")

    # -- completion --------------------------------------------------------

    def complete(self, request: ReasonerRequest) -> ReasonerResponse:
        prompt = self.build_prompt(request)
        try:
            text = self._post(prompt)
        except BackendError as exc:
            return self._fall_back(request, exc)
        try:
            structured = self._extract(request, text)
        except ParseError as exc:
            return self._fall_back(request, exc, text=text)
        return ReasonerResponse(text=text, structured=structured, provenance="llm")

    def _fall_back(self, request, cause, text: str | None = None):
        if not self.config.fallback:
            raise BackendError(str(cause)) from cause
        logger.warning("falling back to scripted answer for %s: %s", request.kind, cause)
        scripted = self.scripted.complete(request)
        return ReasonerResponse(
            text=text if text is not None else scripted.text,
            structured=scripted.structured,
            provenance="fallback",
        )

    def _extract(self, request: ReasonerRequest, text: str):
        kind = request.kind
        if kind == "interpret":
            return text
        if kind in ("pattern_env", "pattern_self"):
            rows = extract_pattern_rows(text, ROUNDS)
            old = request.context.get("old_table")
            if isinstance(old, PatternReport):
                old = old.table
            if old is not None:
                # Rounds the answer does not cover keep their previous rows.
                merged = {key: dict(row) for key, row in old.rows.items()}
                merged.update(rows)
                return merged
            return rows
        if kind == "belief_env":
            from ..beliefs import BeliefReport, prior

            dist = extract_distribution(text, RANKS)
            obs = request.context["obs"]
            base = prior(obs.hand, obs.public_card).distribution
            # Structurally impossible ranks stay at zero regardless of text.
            posterior = {
                r: (dist.values[r] if base[r] > 0 else 0.0) for r in RANKS
            }
            total = sum(posterior.values())
            if total <= 0:
                raise ParseError("parsed belief puts all mass on impossible cards")
            posterior = {r: p / total for r, p in posterior.items()}
            return BeliefReport(posterior=posterior, best_combination=text[:120], evidence=())
        if kind == "belief_self":
            from dataclasses import replace as dc_replace

            scripted = self.scripted.complete(request).structured
            note = text.strip().splitlines()[0][:200] if text.strip() else scripted.long_term_note
            return dc_replace(scripted, long_term_note=note)
        if kind == "plan":
            point = request.context["point"]
            numbers = extract_plan_numbers(text, point.obs.legal_actions)
            best = extract_best_plan(text, point.obs.legal_actions)
            return {"plans": numbers, "best": best}
        if kind == "reflect":
            return None
        raise ParseError(f"no extractor for kind {kind!r}")
