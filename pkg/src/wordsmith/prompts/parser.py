"""Deterministic command and prompt parsing against the closed vocabulary."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .vocabulary import (
    DIRECTION_WORDS,
    PARTICIPLES,
    REFINEMENTS,
    SIDE_WORDS,
    SPEED_WORDS,
    STOPWORDS,
    VERB_KEYWORDS,
    VERBS,
)


class UnknownVerbError(ValueError):
    """No vocabulary verb found in the command."""

    def __init__(self, text):
        super().__init__(
            f"no vocabulary verb in {text!r}; known verbs: {', '.join(VERBS)}"
        )
        self.vocabulary = VERBS


@dataclass(frozen=True)
class CommandSpec:
    """Parsed command: either a fresh verb+modifiers or a refinement edit."""

    verb: str | None
    speed: str = "normal"       # slow | normal | fast
    direction: str | None = None  # forward | backward | side
    side: str = "right"         # left | right
    raw: str = ""
    kind: str = "fresh"         # fresh | refinement
    refinement: str | None = None
    warnings: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind == "fresh" and self.verb not in VERBS:
            raise UnknownVerbError(self.raw or str(self.verb))
        if self.speed not in ("slow", "normal", "fast"):
            raise ValueError(f"bad speed {self.speed!r}")
        if self.direction not in (None, "forward", "backward", "side"):
            raise ValueError(f"bad direction {self.direction!r}")
        if self.side not in ("left", "right"):
            raise ValueError(f"bad side {self.side!r}")


def _clean(text):
    return re.sub(r"[^a-z0-9 ]+", " ", text.lower()).strip()


def parse_command(text):
    """Case-insensitive keyword parse of a user command.

    Refinement phrases ("slow down", "use the other leg", ...) produce a
    refinement CommandSpec; otherwise a vocabulary verb is required.
    Unrecognized non-stopword tokens are kept as warnings.
    """
    if not text or not text.strip():
        raise ValueError("empty command")
    cleaned = _clean(text)

    verb = None
    matched = ""
    for phrase, v in VERB_KEYWORDS:
        if re.search(rf"\b{re.escape(phrase)}\b", cleaned):
            verb = v
            matched = phrase
            break
    if verb is None:
        # verb-less refinement phrases edit the current prompt
        for phrase, name in REFINEMENTS:
            if phrase in cleaned:
                return CommandSpec(
                    verb=None, raw=text, kind="refinement", refinement=name
                )
        raise UnknownVerbError(text)

    rest = cleaned.replace(matched, " ", 1)
    tokens = rest.split()
    speed = "normal"
    direction = None
    side = "right"
    warnings = []
    for tok in tokens:
        if tok in SPEED_WORDS:
            speed = SPEED_WORDS[tok]
        elif tok in DIRECTION_WORDS:
            direction = DIRECTION_WORDS[tok]
        elif tok in SIDE_WORDS:
            side = SIDE_WORDS[tok]
        elif tok in STOPWORDS:
            continue
        else:
            warnings.append(tok)
    if verb == "side_step" and direction is None:
        direction = "side"
    return CommandSpec(
        verb=verb,
        speed=speed,
        direction=direction,
        side=side,
        raw=text,
        warnings=tuple(warnings),
    )


def prompt_text(spec):
    """Canonical declarative prompt for a parsed command."""
    verb = spec.verb
    phrase = PARTICIPLES[verb]
    if verb in ("wave", "raise_hand"):
        phrase += f" the {spec.side} hand"
    elif verb == "kick" and spec.side != "right":
        phrase += f" with the {spec.side} leg"
    if spec.direction in ("forward", "backward") and verb in ("walk", "hop"):
        phrase += f" {spec.direction}"
    if spec.speed == "slow":
        phrase += " slowly"
    elif spec.speed == "fast":
        phrase += " fast"
    return f"A person is {phrase}."


def parse_prompt(prompt):
    """Invert prompt_text: recover the CommandSpec from a declarative prompt.

    Returns None when the prompt contains no vocabulary verb.
    """
    cleaned = _clean(prompt)
    cleaned = re.sub(r"^\s*a person is\s+", "", cleaned)
    try:
        return parse_command(cleaned)
    except (UnknownVerbError, ValueError):
        return None


def modifier_set(spec):
    """Canonical modifier set used by the similarity score."""
    mods = {("speed", spec.speed), ("side", spec.side)}
    if spec.direction is not None:
        mods.add(("direction", spec.direction))
    return mods


def content_tokens(text):
    return {t for t in _clean(text).split() if t not in STOPWORDS}
