from .parser import (
    CommandSpec,
    UnknownVerbError,
    content_tokens,
    modifier_set,
    parse_command,
    parse_prompt,
    prompt_text,
)
from .protocol import (
    DEFAULT_TAU,
    MotionHistory,
    PromptDecision,
    PromptRecord,
    PromptSession,
    ProtocolError,
    apply_refinement,
    closest_in_history,
    similarity,
    update_prompt,
)
from .llm import KEY_ENV, LlmConfig, SYSTEM_PROMPT, URL_ENV, llm_update_prompt
from .vocabulary import VERBS, verb_affinity

__all__ = [
    "CommandSpec",
    "DEFAULT_TAU",
    "KEY_ENV",
    "LlmConfig",
    "MotionHistory",
    "PromptDecision",
    "PromptRecord",
    "PromptSession",
    "ProtocolError",
    "SYSTEM_PROMPT",
    "URL_ENV",
    "UnknownVerbError",
    "VERBS",
    "apply_refinement",
    "closest_in_history",
    "content_tokens",
    "llm_update_prompt",
    "modifier_set",
    "parse_command",
    "parse_prompt",
    "prompt_text",
    "similarity",
    "update_prompt",
    "verb_affinity",
]
