"""Procedural motion generation: a deterministic command-to-clip synthesizer.

Each verb is a sinusoidal phase machine producing root and joint waveforms.
Cyclic verbs (walk, hop, side_step, celebrate) are pure functions of a gait
phase, so clips are periodic by construction; speed rescales the phase rate,
not the waveform shape.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clip import MotionClip, save_clip
from .presets import UPRIGHT, human9_skeleton, standing_root
from .skeleton import Skeleton

VERBS = ("walk", "hop", "wave", "kick", "raise_hand", "side_step", "celebrate", "stand")
CYCLIC_VERBS = ("walk", "hop", "side_step", "celebrate")

STRIDE_LENGTH = 1.0  # m per gait cycle at unit amplitude
HOP_LENGTH = 0.5
SIDE_STEP_LENGTH = 0.4


class VocabularyError(ValueError):
    """Unknown verb for the procedural generator."""


class ConfigError(ValueError):
    """Invalid corpus configuration."""


@dataclass(frozen=True)
class MotionProgram:
    """Parameters for one generated clip.

    speed is m/s for translating verbs and cycles/s for gestures; amplitude
    scales joint excursions; side picks the acting limb.
    """

    verb: str
    speed: float = 1.0
    amplitude: float = 1.0
    duration: float = 4.0
    side: str = "right"

    def __post_init__(self):
        if self.verb not in VERBS:
            raise VocabularyError(
                f"unknown verb {self.verb!r}; vocabulary: {', '.join(VERBS)}"
            )
        if self.duration <= 0.0:
            raise ValueError("duration must be > 0")
        if self.speed < 0.0:
            raise ValueError("speed must be >= 0")
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")


def _ramp(t, t_rise):
    """Smoothstep from 0 to 1 over [0, t_rise]."""
    s = np.clip(t / max(t_rise, 1e-9), 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def _limb(side, part):
    return f"{side[0]}_{part}"


class _Pose:
    """Mutable (roots, q) buffers with named-joint access during generation."""

    def __init__(self, skeleton, n, height):
        self.skeleton = skeleton
        self.roots = np.zeros((n, 3))
        self.roots[:, 1] = height
        self.roots[:, 2] = UPRIGHT
        self.q = np.zeros((n, skeleton.joint_count))

    def set(self, link_name, values):
        self.q[:, self.skeleton.joint_index(link_name)] = values


def _gen_stand(p, sk, t, pose):
    pass  # rest pose throughout


def _gen_walk(p, sk, t, pose):
    phase = 2.0 * np.pi * (p.speed / STRIDE_LENGTH) * t
    a = p.amplitude
    pose.roots[:, 0] = p.speed * t
    pose.roots[:, 1] += -0.02 * a * (1.0 - np.cos(2.0 * phase)) / 2.0
    hip = 0.45 * a * np.sin(phase)
    pose.set("l_thigh", hip)
    pose.set("r_thigh", -hip)
    pose.set("l_shin", -0.06 - 0.55 * a * (1.0 - np.cos(phase)) / 2.0)
    pose.set("r_shin", -0.06 - 0.55 * a * (1.0 + np.cos(phase)) / 2.0)
    arm = 0.30 * a * np.sin(phase)
    pose.set("l_upper_arm", -arm)
    pose.set("r_upper_arm", arm)
    pose.set("l_forearm", 0.08 + 0.15 * a * (1.0 + np.sin(phase)) / 2.0)
    pose.set("r_forearm", 0.08 + 0.15 * a * (1.0 - np.sin(phase)) / 2.0)


def _gen_hop(p, sk, t, pose):
    phase = 2.0 * np.pi * (p.speed / HOP_LENGTH) * t if p.speed > 0 else 2.0 * np.pi * 1.5 * t
    a = p.amplitude
    crouch = (1.0 - np.cos(phase)) / 2.0
    pose.roots[:, 0] = p.speed * t
    pose.roots[:, 1] += a * (-0.06 * crouch + 0.09 * np.maximum(0.0, np.sin(phase)))
    for side in ("l", "r"):
        pose.set(f"{side}_thigh", 0.35 * a * crouch)
        pose.set(f"{side}_shin", -0.06 - 0.7 * a * crouch)
        pose.set(f"{side}_upper_arm", -0.4 * a * np.sin(phase))


def _gen_side_step(p, sk, t, pose):
    phase = 2.0 * np.pi * (p.speed / SIDE_STEP_LENGTH) * t if p.speed > 0 else 2.0 * np.pi * t
    a = p.amplitude
    direction = 1.0 if p.side == "right" else -1.0
    pose.roots[:, 0] = direction * p.speed * t
    shuffle = 0.22 * a * np.sin(phase)
    pose.set("l_thigh", shuffle)
    pose.set("r_thigh", -shuffle)
    pose.set("l_shin", -0.06 - 0.18 * a * (1.0 - np.cos(phase)) / 2.0)
    pose.set("r_shin", -0.06 - 0.18 * a * (1.0 + np.cos(phase)) / 2.0)


def _gen_wave(p, sk, t, pose):
    freq = p.speed if p.speed > 0 else 1.0
    lift = _ramp(t, 0.6)
    arm = _limb(p.side, "upper_arm")
    fore = _limb(p.side, "forearm")
    sign = 1.0 if p.side == "right" else -1.0
    pose.set(arm, sign * 2.4 * lift)
    pose.set(fore, lift * p.amplitude * (0.7 + 0.45 * np.sin(2.0 * np.pi * freq * t)))


def _gen_raise_hand(p, sk, t, pose):
    lift = _ramp(t, max(0.3 * p.duration, 1e-6))
    sign = 1.0 if p.side == "right" else -1.0
    pose.set(_limb(p.side, "upper_arm"), sign * 2.5 * p.amplitude * lift)
    pose.set(_limb(p.side, "forearm"), 0.08 + 0.15 * lift)


def _gen_kick(p, sk, t, pose):
    # single smooth pulse; low speed widens it into a slow, held kick
    width = np.clip(1.0 / max(p.speed, 0.25), 0.5, 2.5)
    s = np.clip((t / p.duration - 0.5) / width + 0.5, 0.0, 1.0)
    pulse = np.sin(np.pi * s) ** 2
    a = p.amplitude
    kick_thigh = _limb(p.side, "thigh")
    kick_shin = _limb(p.side, "shin")
    support_thigh = _limb("left" if p.side == "right" else "right", "thigh")
    support_shin = _limb("left" if p.side == "right" else "right", "shin")
    pose.set(kick_thigh, 1.1 * a * pulse)
    pose.set(kick_shin, -0.06 - 0.9 * a * pulse * (1.0 - pulse))
    pose.set(support_shin, -0.06 * np.ones_like(pulse))
    pose.set(support_thigh, -0.18 * a * pulse)
    pose.set(_limb(p.side, "upper_arm"), -0.35 * a * pulse)
    pose.roots[:, 1] += -0.02 * a * pulse


def _gen_celebrate(p, sk, t, pose):
    freq = p.speed if p.speed > 0 else 1.2
    phase = 2.0 * np.pi * freq * t
    a = p.amplitude
    bounce = (1.0 - np.cos(phase)) / 2.0
    pose.roots[:, 1] += a * (0.06 * np.maximum(0.0, np.sin(phase)) - 0.04 * bounce)
    for side, sign in (("l", 1.0), ("r", -1.0)):
        pose.set(f"{side}_upper_arm", sign * (2.3 + 0.3 * a * np.sin(phase)))
        pose.set(f"{side}_forearm", 0.08 + 0.4 * a * (1.0 + sign * np.sin(phase)) / 2.0)
        pose.set(f"{side}_thigh", 0.25 * a * bounce)
        pose.set(f"{side}_shin", -0.06 - 0.5 * a * bounce)


_GENERATORS = {
    "stand": _gen_stand,
    "walk": _gen_walk,
    "hop": _gen_hop,
    "side_step": _gen_side_step,
    "wave": _gen_wave,
    "raise_hand": _gen_raise_hand,
    "kick": _gen_kick,
    "celebrate": _gen_celebrate,
}


def generate_motion(program, skeleton=None, dt=0.02):
    """Synthesize a MotionClip for the program on the given skeleton."""
    if not 0.0 < dt <= 0.1:
        raise ValueError("dt must be in (0, 0.1]")
    if program.verb not in _GENERATORS:
        raise VocabularyError(
            f"unknown verb {program.verb!r}; vocabulary: {', '.join(VERBS)}"
        )
    skeleton = skeleton if skeleton is not None else human9_skeleton()
    n = max(2, int(round(program.duration / dt)) + 1)
    t = np.arange(n) * dt
    pose = _Pose(skeleton, n, standing_root(skeleton).y)
    _GENERATORS[program.verb](program, skeleton, t, pose)
    lo, hi = skeleton.joint_limits
    pose.q = np.clip(pose.q, lo, hi)
    return MotionClip(skeleton, dt, pose.roots, pose.q)


# ---------------------------------------------------------------------------
# corpus builder
# ---------------------------------------------------------------------------

SPEED_WORDS = [(0.0, 0.8, "slowly"), (0.8, 1.25, ""), (1.25, np.inf, "fast")]


def command_text(program):
    """Templated natural-language label for a generated clip."""
    words = {
        "walk": "walk forward",
        "hop": "hop forward",
        "side_step": "step to the side",
        "stand": "stand still",
        "wave": f"wave with the {program.side} hand",
        "raise_hand": f"raise your {program.side} hand",
        "kick": f"kick with the {program.side} leg",
        "celebrate": "celebrate",
    }[program.verb]
    for lo, hi, word in SPEED_WORDS:
        if lo <= program.speed < hi and word:
            words += f" {word}"
            break
    return words


@dataclass(frozen=True)
class CorpusConfig:
    """Grid of verbs x parameters x seeds for the synthetic corpus."""

    verbs: dict = field(default_factory=dict)  # verb -> {"speed": [...], "amplitude": [...]}
    seeds: int = 2
    dt: float = 0.02
    duration: float = 4.0
    jitter: float = 0.05
    master_seed: int = 0


@dataclass(frozen=True)
class CorpusItem:
    command: str
    program: MotionProgram
    clip: MotionClip
    seed: int


def build_corpus(config, skeleton=None):
    """Deterministically expand the grid into labeled (command, clip) pairs."""
    if not config.verbs:
        raise ConfigError("corpus grid is empty")
    if config.seeds < 1:
        raise ConfigError("need at least one seed")
    skeleton = skeleton if skeleton is not None else human9_skeleton()
    items = []
    index = 0
    for verb in sorted(config.verbs):
        params = config.verbs[verb]
        if verb not in VERBS:
            raise VocabularyError(f"unknown verb {verb!r} in corpus grid")
        speeds = params.get("speed", [1.0])
        amps = params.get("amplitude", [1.0])
        sides = params.get("side", ["right"])
        for speed in speeds:
            for amp in amps:
                for side in sides:
                    for k in range(config.seeds):
                        rng = np.random.default_rng([config.master_seed, index])
                        jit = 1.0 + config.jitter * rng.uniform(-1.0, 1.0, size=2)
                        program = MotionProgram(
                            verb=verb,
                            speed=float(speed * jit[0]) if speed > 0 else 0.0,
                            amplitude=float(amp * jit[1]),
                            duration=config.duration,
                            side=side,
                        )
                        clip = generate_motion(program, skeleton, config.dt)
                        items.append(
                            CorpusItem(command_text(program), program, clip, seed=k)
                        )
                        index += 1
    return items


def save_corpus(items, out_dir):
    """Write clips plus an index.json; byte-stable for equal configs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = []
    for i, item in enumerate(items):
        fname = f"clip_{i:04d}.json"
        save_clip(item.clip, out_dir / fname)
        index.append({"file": fname, "command": item.command, "seed": item.seed})
    (out_dir / "index.json").write_text(
        json.dumps({"format_version": 1, "items": index}, sort_keys=True)
    )
    return out_dir


def corpus_digest(out_dir):
    """SHA-256 over all corpus files (regeneration determinism check)."""
    out_dir = Path(out_dir)
    h = hashlib.sha256()
    for path in sorted(out_dir.glob("*.json")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()
