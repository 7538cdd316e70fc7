"""Closed command vocabulary: verbs, modifier words, refinements, affinities."""

from __future__ import annotations

# verb -> present-participle phrase builder pieces
PARTICIPLES = {
    "walk": "walking",
    "hop": "hopping",
    "side_step": "stepping to the side",
    "stand": "standing still",
    "wave": "waving",
    "raise_hand": "raising",
    "kick": "kicking",
    "celebrate": "celebrating",
}

# keyword phrases that select a verb (longest match wins)
VERB_KEYWORDS = [
    ("step to the side", "side_step"),
    ("stepping to the side", "side_step"),
    ("side step", "side_step"),
    ("sidestep", "side_step"),
    ("raise your hand", "raise_hand"),
    ("raise a hand", "raise_hand"),
    ("raising", "raise_hand"),
    ("raise", "raise_hand"),
    ("stand still", "stand"),
    ("standing still", "stand"),
    ("stand", "stand"),
    ("celebrate", "celebrate"),
    ("celebrating", "celebrate"),
    ("cheer", "celebrate"),
    ("walking", "walk"),
    ("walk", "walk"),
    ("hopping", "hop"),
    ("hop", "hop"),
    ("jumping", "hop"),
    ("jump", "hop"),
    ("waving", "wave"),
    ("wave", "wave"),
    ("kicking", "kick"),
    ("kick", "kick"),
]

SPEED_WORDS = {
    "slow": "slow",
    "slowly": "slow",
    "slower": "slow",
    "fast": "fast",
    "quick": "fast",
    "quicker": "fast",
    "quickly": "fast",
    "faster": "fast",
}

DIRECTION_WORDS = {
    "forward": "forward",
    "forwards": "forward",
    "ahead": "forward",
    "backward": "backward",
    "backwards": "backward",
    "back": "backward",
    "sideways": "side",
}

SIDE_WORDS = {"left": "left", "right": "right"}

# refinement grammar: phrases that edit the current prompt instead of
# starting a fresh one
REFINEMENTS = [
    ("slow down", "slow_down"),
    ("slower", "slow_down"),
    ("speed up", "speed_up"),
    ("faster", "speed_up"),
    ("use the other leg", "switch_side"),
    ("use the other arm", "switch_side"),
    ("use the other hand", "switch_side"),
    ("other leg", "switch_side"),
    ("other arm", "switch_side"),
    ("other hand", "switch_side"),
    ("go the other way", "flip_direction"),
    ("turn around", "flip_direction"),
]

# cross-verb affinity in [0, 1] used by the similarity score; unlisted pairs
# are 0.  Arm gestures are close; gaits are mutually distant.
VERB_AFFINITY = {
    frozenset(("wave", "raise_hand")): 0.8,
    frozenset(("wave", "celebrate")): 0.35,
    frozenset(("raise_hand", "celebrate")): 0.3,
    frozenset(("raise_hand", "stand")): 0.35,
    frozenset(("walk", "side_step")): 0.4,
    frozenset(("walk", "hop")): 0.15,
    frozenset(("hop", "celebrate")): 0.4,
}

VERBS = tuple(sorted(PARTICIPLES))

# words carrying no action content, ignored by parsing and the fallback score
STOPWORDS = {
    "a", "an", "the", "is", "are", "person", "robot", "to", "with", "your",
    "please", "now", "then", "and", "up", "down", "friend", "me", "at", "of",
    "leg", "arm", "hand", "foot", "still", "gradually",
}


def verb_affinity(a, b):
    if a == b:
        return 1.0
    return VERB_AFFINITY.get(frozenset((a, b)), 0.0)
