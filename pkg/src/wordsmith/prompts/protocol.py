"""Prompt/motion-history protocol: maintain generated prompts, pick the
closest prompt in history for warm starting, and apply refinement edits."""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from .parser import (
    CommandSpec,
    content_tokens,
    modifier_set,
    parse_command,
    parse_prompt,
    prompt_text,
)
from .vocabulary import verb_affinity

log = logging.getLogger(__name__)

DEFAULT_TAU = 0.6
VERB_WEIGHT = 0.7
MODIFIER_WEIGHT = 0.3


class ProtocolError(RuntimeError):
    """Protocol misuse, e.g. a refinement with no prompt to refine."""


@dataclass(frozen=True)
class PromptRecord:
    """One generated prompt with its lineage."""

    prompt: str
    source_command: str
    ordinal: int
    checkpoint_id: str | None = None

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be nonempty")


@dataclass(frozen=True)
class MotionHistory:
    """Append-only, ordinal-ordered list of PromptRecords."""

    records: tuple = ()

    def __post_init__(self):
        ordinals = [r.ordinal for r in self.records]
        if any(b <= a for a, b in zip(ordinals, ordinals[1:])):
            raise ValueError("ordinals must be strictly increasing")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def next_ordinal(self):
        return self.records[-1].ordinal + 1 if self.records else 1

    def prompts(self):
        return [r.prompt for r in self.records]

    def append(self, record):
        if self.records and record.ordinal <= self.records[-1].ordinal:
            raise ValueError("ordinal must increase")
        return MotionHistory(self.records + (record,))

    def with_checkpoint(self, prompt, checkpoint_id):
        """New history where the latest record for `prompt` carries the id."""
        recs = list(self.records)
        for i in range(len(recs) - 1, -1, -1):
            if recs[i].prompt == prompt:
                recs[i] = replace(recs[i], checkpoint_id=checkpoint_id)
                break
        return MotionHistory(tuple(recs))

    def to_dicts(self):
        return [dataclasses.asdict(r) for r in self.records]

    @classmethod
    def from_dicts(cls, rows):
        return cls(tuple(PromptRecord(**row) for row in rows))


@dataclass(frozen=True)
class PromptDecision:
    """The protocol's return triple plus bookkeeping.

    closest is a prompt from the input history (or None); history includes
    the newly generated prompt.
    """

    prompt: str
    closest: str | None
    history: MotionHistory
    record: PromptRecord
    similarity_score: float | None = None
    fallback_used: bool = False
    fallback_cause: str | None = None
    raw_reply: str | None = None
    warnings: tuple = field(default_factory=tuple)


def similarity(a, b):
    """Symmetric prompt similarity in [0, 1].

    Parsed prompts score verb affinity (weight 0.7) plus modifier-set
    Jaccard overlap (weight 0.3); equal canonical forms score exactly 1.0.
    Unparseable prompts fall back to a content-token cosine, logged as such.
    """
    if not a or not b:
        raise ValueError("prompts must be nonempty")
    sa, sb = parse_prompt(a), parse_prompt(b)
    if sa is None or sb is None:
        ta, tb = content_tokens(a), content_tokens(b)
        if not ta or not tb:
            return 0.0
        log.warning("similarity fallback to token cosine: %r vs %r", a, b)
        inter = len(ta & tb)
        return inter / ((len(ta) * len(tb)) ** 0.5)
    ma, mb = modifier_set(sa), modifier_set(sb)
    union = ma | mb
    jac = len(ma & mb) / len(union) if union else 1.0
    return VERB_WEIGHT * verb_affinity(sa.verb, sb.verb) + MODIFIER_WEIGHT * jac


def closest_in_history(history, prompt, tau=DEFAULT_TAU):
    """Best-scoring history prompt at or above tau; latest wins ties."""
    best = None
    best_score = -1.0
    for rec in history:
        s = similarity(prompt, rec.prompt)
        if s >= best_score:
            best, best_score = rec, s
    if best is not None and best_score >= tau:
        return best, best_score
    return None, best_score if history else None


def apply_refinement(spec, refinement):
    if refinement == "slow_down":
        return replace(spec, speed="slow")
    if refinement == "speed_up":
        return replace(spec, speed="fast")
    if refinement == "switch_side":
        return replace(spec, side="left" if spec.side == "right" else "right")
    if refinement == "flip_direction":
        flipped = {"forward": "backward", "backward": "forward", None: "backward"}
        return replace(spec, direction=flipped.get(spec.direction, spec.direction))
    raise ProtocolError(f"unknown refinement {refinement!r}")


def update_prompt(history, command, current_prompt=None, tau=DEFAULT_TAU):
    """Create or update the prompt for a parsed command.

    Fresh commands mint a new declarative prompt; refinements edit the
    current one.  The returned decision's history includes the new prompt.
    """
    if command.kind == "refinement":
        if current_prompt is None:
            raise ProtocolError(
                f"refinement {command.refinement!r} needs a current prompt"
            )
        base = parse_prompt(current_prompt)
        if base is None:
            raise ProtocolError(f"current prompt {current_prompt!r} is unparseable")
        spec = apply_refinement(base, command.refinement)
    else:
        spec = command
    new_prompt = prompt_text(spec)
    best, score = closest_in_history(history, new_prompt, tau)
    record = PromptRecord(
        prompt=new_prompt,
        source_command=command.raw,
        ordinal=history.next_ordinal,
    )
    return PromptDecision(
        prompt=new_prompt,
        closest=best.prompt if best is not None else None,
        history=history.append(record),
        record=record,
        similarity_score=score,
        warnings=command.warnings,
    )


class PromptSession:
    """Single-writer protocol state: history, current prompt, transcript."""

    def __init__(self, tau=DEFAULT_TAU, transcript_path=None):
        self.tau = tau
        self.history = MotionHistory()
        self.current_prompt = None
        self.transcript = []
        self.transcript_path = Path(transcript_path) if transcript_path else None

    def submit(self, text):
        command = parse_command(text)
        decision = update_prompt(self.history, command, self.current_prompt, self.tau)
        self._adopt(text, decision)
        return decision

    def _adopt(self, text, decision):
        self.history = decision.history
        self.current_prompt = decision.prompt
        entry = {
            "command": text,
            "prompt": decision.prompt,
            "closest_prompt_in_history": decision.closest,
            "motion_history": decision.history.prompts(),
            "fallback_used": decision.fallback_used,
        }
        self.transcript.append(entry)
        if self.transcript_path is not None:
            with open(self.transcript_path, "a") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def attach_checkpoint(self, prompt, checkpoint_id):
        self.history = self.history.with_checkpoint(prompt, checkpoint_id)
