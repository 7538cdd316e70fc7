from .skeleton import Joint, Link, Rod, RootPose, Skeleton, wrap_angle
from .fk import FkResult, fk_arrays, fk_positions, rod_lengths, rod_points
from .clip import (
    MotionClip,
    clip_features,
    clip_from_dict,
    clip_to_dict,
    feature_dim,
    load_clip,
    resample,
    save_clip,
    trim,
)
from .generator import (
    CYCLIC_VERBS,
    VERBS,
    ConfigError,
    CorpusConfig,
    CorpusItem,
    MotionProgram,
    VocabularyError,
    build_corpus,
    command_text,
    corpus_digest,
    generate_motion,
    save_corpus,
)
from .presets import (
    UPRIGHT,
    human9_skeleton,
    robot_d_skeleton,
    skeleton_by_name,
    standing_root,
)

__all__ = [
    "CYCLIC_VERBS",
    "ConfigError",
    "CorpusConfig",
    "CorpusItem",
    "FkResult",
    "Joint",
    "Link",
    "MotionClip",
    "MotionProgram",
    "Rod",
    "RootPose",
    "Skeleton",
    "UPRIGHT",
    "VERBS",
    "VocabularyError",
    "build_corpus",
    "clip_features",
    "clip_from_dict",
    "clip_to_dict",
    "command_text",
    "corpus_digest",
    "feature_dim",
    "fk_arrays",
    "fk_positions",
    "generate_motion",
    "human9_skeleton",
    "load_clip",
    "resample",
    "robot_d_skeleton",
    "rod_lengths",
    "rod_points",
    "save_clip",
    "save_corpus",
    "skeleton_by_name",
    "standing_root",
    "trim",
    "wrap_angle",
]
