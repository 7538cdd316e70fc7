import numpy as np
import pytest

from wordsmith.motion import (
    CYCLIC_VERBS,
    ConfigError,
    CorpusConfig,
    Joint,
    Link,
    MotionClip,
    MotionProgram,
    RootPose,
    Skeleton,
    VocabularyError,
    build_corpus,
    clip_features,
    corpus_digest,
    fk_positions,
    generate_motion,
    human9_skeleton,
    load_clip,
    resample,
    robot_d_skeleton,
    save_clip,
    save_corpus,
    standing_root,
    wrap_angle,
)


def two_link_chain():
    links = (
        Link("a", 1.0, -1, joint=Joint(-np.pi, np.pi)),
        Link("b", 1.0, 0, joint=Joint(-np.pi, np.pi)),
    )
    return Skeleton(links=links, end_effectors={"tip": 1}, name="chain2")


# ---------------------------------------------------------------------------
# forward kinematics
# ---------------------------------------------------------------------------


def test_fk_straight_chain():
    sk = two_link_chain()
    fk = fk_positions(sk, RootPose(0, 0, 0), np.array([0.0, 0.0]))
    np.testing.assert_allclose(fk.end_effectors["tip"], [2.0, 0.0], atol=1e-15)


def test_fk_quarter_turn():
    sk = two_link_chain()
    fk = fk_positions(sk, RootPose(0, 0, 0), np.array([np.pi / 2, 0.0]))
    np.testing.assert_allclose(fk.end_effectors["tip"], [0.0, 2.0], atol=1e-15)


def test_fk_elbow_matches_rotation_matrix_oracle():
    # independent oracle: compose 2x2 rotation matrices numerically
    def rot(a):
        return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])

    q = np.array([np.pi / 2, -np.pi / 2])
    p1 = rot(q[0]) @ np.array([1.0, 0.0])
    p2 = p1 + rot(q[0] + q[1]) @ np.array([1.0, 0.0])
    np.testing.assert_allclose(p2, [1.0, 1.0], atol=1e-12)

    sk = two_link_chain()
    fk = fk_positions(sk, RootPose(0, 0, 0), q)
    np.testing.assert_allclose(fk.end_effectors["tip"], p2, atol=1e-12)


def test_fk_rejects_wrong_q_dim():
    sk = two_link_chain()
    with pytest.raises(ValueError):
        fk_positions(sk, RootPose(), np.zeros(3))


def test_fk_chain_consistency_only_subtree_moves():
    sk = human9_skeleton()
    q0 = np.zeros(sk.joint_count)
    base = fk_positions(sk, RootPose(0, 1.0, 0.3), q0)
    for j, link_idx in enumerate(sk.joint_links):
        q = q0.copy()
        q[j] = 0.4
        moved = fk_positions(sk, RootPose(0, 1.0, 0.3), q)
        # collect the subtree of the jointed link
        subtree = {link_idx}
        for i, link in enumerate(sk.links):
            if link.parent in subtree:
                subtree.add(i)
        for i in range(len(sk.links)):
            delta = np.abs(moved.endpoints[i] - base.endpoints[i]).max()
            if i in subtree:
                assert delta > 1e-6, f"joint {j} should move link {i}"
            else:
                assert delta < 1e-12, f"joint {j} must not move link {i}"


def test_fk_frame_invariance_under_translation():
    sk = robot_d_skeleton()
    rng = np.random.default_rng(0)
    q = rng.uniform(-0.5, 0.5, sk.joint_count)
    a = fk_positions(sk, RootPose(0.0, 1.0, 0.7), q)
    t = np.array([2.5, -1.25])
    b = fk_positions(sk, RootPose(t[0], 1.0 + t[1], 0.7), q)
    np.testing.assert_allclose(b.endpoints, a.endpoints + t, atol=1e-12)
    np.testing.assert_allclose(b.origins, a.origins + t, atol=1e-12)


# ---------------------------------------------------------------------------
# wrap / clip basics
# ---------------------------------------------------------------------------


def test_wrap_angle_convention():
    assert wrap_angle(np.pi) == np.pi
    assert wrap_angle(-np.pi) == np.pi
    assert abs(wrap_angle(3 * np.pi / 2) + np.pi / 2) < 1e-15
    x = 0.737
    assert wrap_angle(x) == x  # interior values untouched


def test_clip_invariants():
    sk = two_link_chain()
    with pytest.raises(ValueError):
        MotionClip(sk, 0.0, np.zeros((2, 3)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        MotionClip(sk, 0.02, np.zeros((1, 3)), np.zeros((1, 2)))
    with pytest.raises(ValueError):
        MotionClip(sk, 0.02, np.zeros((3, 3)), np.zeros((3, 1)))


# ---------------------------------------------------------------------------
# generate_motion
# ---------------------------------------------------------------------------


def test_stand_gives_identical_rest_frames():
    clip = generate_motion(MotionProgram("stand", duration=1.0), dt=0.02)
    assert clip.num_frames == 51
    assert np.all(clip.q == clip.q[0])
    assert np.all(clip.roots == clip.roots[0])
    assert np.all(clip.q[0] == 0.0)


def test_walk_root_advance_matches_speed():
    # oracle: integrate the generator's root velocity over one second
    clip = generate_motion(MotionProgram("walk", speed=1.0, duration=2.0), dt=0.02)
    x = clip.roots[:, 0]
    per_second = x[50] - x[0]
    assert abs(per_second - 1.0) <= 0.05


def test_walk_speed_is_pure_phase_scaling():
    slow = generate_motion(MotionProgram("walk", speed=0.5, duration=2.0), dt=0.02)
    fast = generate_motion(MotionProgram("walk", speed=1.0, duration=1.0), dt=0.01)
    # frame k of `fast` at dt=0.01 has the same phase as frame k of `slow` at dt=0.02
    np.testing.assert_allclose(fast.q[:100], slow.q[:100], atol=1e-12)


def test_unknown_verb_rejected():
    with pytest.raises(VocabularyError):
        MotionProgram("backflip")


def test_cyclic_verbs_are_periodic():
    for verb in CYCLIC_VERBS:
        program = MotionProgram(verb, speed=1.0, duration=4.0)
        clip = generate_motion(program, dt=0.02)
        if verb == "walk":
            cycle = 1.0 / 1.0  # STRIDE_LENGTH / speed
        elif verb == "hop":
            cycle = 0.5
        elif verb == "side_step":
            cycle = 0.4
        else:
            cycle = 1.0 / 1.0 if verb != "celebrate" else 1.0 / 1.2
        k = int(round(cycle / 0.02))
        if abs(k * 0.02 - cycle) > 1e-9:
            continue  # cycle not representable on this frame grid
        assert np.abs(clip.q[k:] - clip.q[:-k]).max() < 1e-6, verb


def test_generated_clips_respect_joint_limits():
    sk = human9_skeleton()
    lo, hi = sk.joint_limits
    for verb in ("walk", "hop", "kick", "wave", "celebrate", "side_step", "raise_hand"):
        clip = generate_motion(MotionProgram(verb, duration=2.0), sk, dt=0.02)
        assert np.all(clip.q >= lo - 1e-12) and np.all(clip.q <= hi + 1e-12)


def test_duration_within_one_frame():
    clip = generate_motion(MotionProgram("walk", duration=1.73), dt=0.02)
    assert abs(clip.duration - 1.73) <= 0.02 + 1e-12


# ---------------------------------------------------------------------------
# resample
# ---------------------------------------------------------------------------


def test_resample_identity():
    clip = generate_motion(MotionProgram("walk", duration=1.0), dt=0.02)
    same = resample(clip, 0.02)
    np.testing.assert_array_equal(same.q, clip.q)
    np.testing.assert_array_equal(same.roots, clip.roots)


def test_resample_linear_midpoint():
    sk = two_link_chain()
    clip = MotionClip(sk, 1.0, [[0, 0, 0], [0, 0, 0]], [[0.0, 0.0], [1.0, 0.0]])
    out = resample(clip, 0.5)
    assert out.num_frames == 3
    assert abs(out.q[1, 0] - 0.5) < 1e-15
    np.testing.assert_array_equal(out.q[0], clip.q[0])
    np.testing.assert_array_equal(out.q[-1], clip.q[-1])


def test_resample_angle_takes_shortest_arc():
    # oracle: unit-vector average of headings 3.0 and -3.0 points at pi
    mid = np.arctan2(
        (np.sin(3.0) + np.sin(-3.0)) / 2.0, (np.cos(3.0) + np.cos(-3.0)) / 2.0
    )
    assert abs(mid - np.pi) < 1e-12

    sk = two_link_chain()
    clip = MotionClip(sk, 1.0, [[0, 0, 3.0], [0, 0, -3.0]], np.zeros((2, 2)))
    out = resample(clip, 0.5)
    assert abs(out.roots[1, 2] - np.pi) < 1e-9


def test_resample_endpoints_preserved_nondivisible():
    clip = generate_motion(MotionProgram("walk", duration=1.0), dt=0.02)
    out = resample(clip, 0.03)
    np.testing.assert_array_equal(out.q[0], clip.q[0])
    np.testing.assert_allclose(out.q[-1], clip.q[-1], atol=1e-12)


# ---------------------------------------------------------------------------
# clip_features
# ---------------------------------------------------------------------------


def test_features_constant_clip_zero_velocity():
    clip = generate_motion(MotionProgram("stand", duration=1.0), dt=0.02)
    feats = clip_features(clip)
    J = clip.skeleton.joint_count
    assert feats.shape == (clip.num_frames, 2 * (3 + J))
    assert np.all(feats[:, 3 + J :] == 0.0)


def test_features_difference_quotient():
    sk = two_link_chain()
    q = np.arange(5)[:, None] * np.array([[0.1, 0.0]])
    clip = MotionClip(sk, 0.1, np.zeros((5, 3)), q)
    feats = clip_features(clip)
    vel_q0 = feats[:, 5 + 3]  # layout: [root(3), q(2), droot(3), dq(2)]
    np.testing.assert_allclose(vel_q0, 1.0, atol=1e-12)
    # frame 0 copies frame 1
    np.testing.assert_array_equal(feats[0, 5:], feats[1, 5:])


def test_features_roundtrip_through_io(tmp_path):
    clip = generate_motion(MotionProgram("walk", duration=1.0), dt=0.02)
    path = save_clip(clip, tmp_path / "clip.json")
    back = load_clip(path)
    np.testing.assert_array_equal(clip_features(back), clip_features(clip))
    assert back.dt == clip.dt
    assert back.skeleton.to_dict() == clip.skeleton.to_dict()


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------


def test_corpus_grid_counting():
    cfg = CorpusConfig(verbs={"walk": {"speed": [0.5, 1.0]}}, seeds=2, duration=1.0)
    items = build_corpus(cfg)
    assert len(items) == 4
    assert all(i.command.startswith("walk forward") for i in items)


def test_corpus_clips_validate():
    cfg = CorpusConfig(
        verbs={"walk": {"speed": [1.0]}, "kick": {"side": ["left", "right"]}},
        seeds=1,
        duration=1.0,
    )
    for item in build_corpus(cfg):
        assert item.clip.num_frames >= 2
        lo, hi = item.clip.skeleton.joint_limits
        assert np.all(item.clip.q >= lo - 1e-12) and np.all(item.clip.q <= hi + 1e-12)


def test_corpus_empty_grid_rejected():
    with pytest.raises(ConfigError):
        build_corpus(CorpusConfig(verbs={}))


def test_corpus_regeneration_identical_bytes(tmp_path):
    cfg = CorpusConfig(verbs={"walk": {"speed": [1.0]}, "hop": {}}, seeds=2, duration=1.0)
    save_corpus(build_corpus(cfg), tmp_path / "a")
    save_corpus(build_corpus(cfg), tmp_path / "b")
    assert corpus_digest(tmp_path / "a") == corpus_digest(tmp_path / "b")


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


def test_preset_shapes():
    h = human9_skeleton()
    r = robot_d_skeleton()
    assert len(h.links) == 9 and h.joint_count == 8
    assert len(r.links) == 11 and r.joint_count == 10
    assert set(h.end_effectors) == set(r.end_effectors)
    assert len(r.rods) == 4


def test_robot_rest_pose_feet_on_ground():
    r = robot_d_skeleton()
    root = standing_root(r)
    fk = fk_positions(r, root, np.zeros(r.joint_count))
    for foot in ("left_foot", "right_foot"):
        assert abs(fk.end_effectors[foot][1]) < 1e-9
    # foot segment is flat at rest: ankle end also on the ground
    idx = r.end_effectors["left_foot"]
    assert abs(fk.origins[idx][1]) < 1e-9
