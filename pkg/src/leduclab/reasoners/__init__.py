from .base import (
    BackendConfig,
    BackendError,
    ParseError,
    Reasoner,
    ReasonerRequest,
    ReasonerResponse,
)
from .llm import LLMReasoner, http_transport
from .parsing import extract_distribution
from .scripted import ScriptedReasoner

__all__ = [
    "BackendConfig",
    "BackendError",
    "ParseError",
    "Reasoner",
    "ReasonerRequest",
    "ReasonerResponse",
    "LLMReasoner",
    "http_transport",
    "extract_distribution",
    "ScriptedReasoner",
]
