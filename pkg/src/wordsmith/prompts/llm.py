"""Optional chat-LLM adapter for prompt updates.

The adapter is strictly advisory: replies are validated against the history
invariants and any failure falls back to the deterministic protocol path,
recording the cause and the raw reply.
"""

from __future__ import annotations

import json
import logging
import os

import requests

from .parser import parse_command
from .protocol import PromptDecision, PromptRecord, update_prompt

log = logging.getLogger(__name__)

URL_ENV = "WORDSMITH_LLM_URL"
KEY_ENV = "WORDSMITH_LLM_KEY"
TIMEOUT_S = 30.0

SYSTEM_PROMPT = (
    'Your role is to generate prompts for a motion model. You have to '
    'continuously create/update the original prompt based on user input '
    '"command" and recover a motion "closest_prompt_in_history" from a '
    'history of generated prompts "motion_history" that resemble the '
    'generated prompt. If the motions in the history are completely '
    'unrelated to the generated prompt, return "None". Your prompts '
    'describe the actions of a person. Examples of prompts:\n'
    "1. A person is walking forward\n"
    "2. A person is hopping forward then turning around and hopping back "
    "to the start.\n"
    "The user commands will have the format: <command>\n"
    "You should return :\n"
    "- <prompt>\n"
    "- <closest_prompt_in_history>\n"
    "- <motion_history>\n"
    '"motion_history" is a list of the motion history that includes the '
    'generated "prompt". "closest_prompt_in_history" can be "None" if none '
    "of the motions are similar enough to the prompt. For example, jumping "
    "is very different from walking. But walking slow is similar to walking "
    "fast. Wait for the next user input."
)


class LlmConfig:
    """Endpoint settings; resolved from the environment when not given."""

    def __init__(self, url=None, api_key=None, timeout=TIMEOUT_S, model="prompt-generator"):
        self.url = url if url is not None else os.environ.get(URL_ENV)
        self.api_key = api_key if api_key is not None else os.environ.get(KEY_ENV)
        self.timeout = timeout
        self.model = model

    @property
    def enabled(self):
        return bool(self.url)


def _http_post(url, body, headers, timeout):
    resp = requests.post(url, json=body, headers=headers, timeout=timeout)
    resp.raise_for_status()
    return resp.json()


def build_messages(session, command_text):
    messages = [{"role": "system", "content": SYSTEM_PROMPT}]
    for entry in session.transcript:
        messages.append({"role": "user", "content": f"<{entry['command']}>"})
        messages.append(
            {
                "role": "assistant",
                "content": json.dumps(
                    {
                        "prompt": entry["prompt"],
                        "closest_prompt_in_history": entry["closest_prompt_in_history"],
                        "motion_history": entry["motion_history"],
                    }
                ),
            }
        )
    messages.append({"role": "user", "content": f"<{command_text}>"})
    return messages


def _parse_reply(payload):
    """Extract the (prompt, closest, history) triple from a chat reply."""
    content = payload["choices"][0]["message"]["content"]
    triple = json.loads(content) if isinstance(content, str) else content
    prompt = triple["prompt"]
    closest = triple.get("closest_prompt_in_history")
    if closest in ("None", "none", ""):
        closest = None
    motion_history = triple["motion_history"]
    if not isinstance(prompt, str) or not prompt:
        raise ValueError("reply prompt missing or empty")
    if not isinstance(motion_history, list):
        raise ValueError("reply motion_history is not a list")
    return prompt, closest, motion_history


def _validate(prompt, closest, motion_history, history):
    old = history.prompts()
    if closest is not None and closest not in old:
        return "InvalidClosest"
    if prompt not in motion_history:
        return "HistoryMissingPrompt"
    if any(p not in motion_history for p in old):
        return "HistoryDroppedPrompt"
    return None


def llm_update_prompt(session, command_text, config=None, post_fn=None):
    """Ask the configured endpoint for the next prompt decision.

    Falls back to the deterministic update on any network, parsing, or
    invariant failure; the decision is then flagged with the cause.
    """
    config = config if config is not None else LlmConfig()
    post_fn = post_fn if post_fn is not None else _http_post

    def fallback(cause, raw=None):
        command = parse_command(command_text)
        base = update_prompt(session.history, command, session.current_prompt, session.tau)
        decision = PromptDecision(
            prompt=base.prompt,
            closest=base.closest,
            history=base.history,
            record=base.record,
            similarity_score=base.similarity_score,
            fallback_used=True,
            fallback_cause=cause,
            raw_reply=raw,
            warnings=base.warnings,
        )
        session._adopt(command_text, decision)
        return decision

    if not config.enabled:
        return fallback("AdapterDisabled")

    body = {"model": config.model, "messages": build_messages(session, command_text)}
    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    try:
        payload = post_fn(config.url, body, headers, config.timeout)
    except Exception as exc:  # network errors, timeouts, bad status
        log.warning("llm adapter request failed: %s", exc)
        return fallback(f"NetworkError: {exc}")

    raw = json.dumps(payload)
    try:
        prompt, closest, motion_history = _parse_reply(payload)
    except Exception as exc:
        return fallback(f"MalformedReply: {exc}", raw)

    cause = _validate(prompt, closest, motion_history, session.history)
    if cause is not None:
        return fallback(cause, raw)

    record = PromptRecord(
        prompt=prompt,
        source_command=command_text,
        ordinal=session.history.next_ordinal,
    )
    decision = PromptDecision(
        prompt=prompt,
        closest=closest,
        history=session.history.append(record),
        record=record,
        raw_reply=raw,
    )
    session._adopt(command_text, decision)
    return decision
