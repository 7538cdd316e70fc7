import numpy as np
import pytest

from wordsmith.nn import (
    AdamState,
    DimensionError,
    GradientError,
    Mlp,
    NonFiniteGradError,
    Tensor,
    adam_step,
    clip_global_norm,
    grad,
    input_gradient,
    l2_norm,
    smooth_l1,
    stop_gradient,
)


def central_diff(f, x, h=1e-5):
    """Independent oracle: central finite differences of scalar f at x."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return g


def rel_err(a, b, clamp=1e-8):
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), clamp)


# ---------------------------------------------------------------------------
# forward
# ---------------------------------------------------------------------------


def test_forward_zero_weights_gives_zero():
    net = Mlp([3, 2])
    for w in net.weights:
        w.data[:] = 0.0
    out = net.forward(np.array([1.0, -2.0, 0.5]))
    assert np.all(out.data == 0.0)


def test_forward_identity_single_layer():
    net = Mlp([1, 1])
    net.weights[0].data[:] = 1.0
    net.biases[0].data[:] = 0.0
    out = net.forward(np.array([3.5]))
    assert out.data[0] == 3.5


def test_forward_matches_straight_line_oracle():
    # independent oracle: explicit matrix chain, no Tensor machinery
    net = Mlp([2, 2, 1], activation="tanh", rng=np.random.default_rng(0))
    x = np.array([1.0, 0.0])
    h = np.tanh(x @ net.weights[0].data + net.biases[0].data)
    expect = h @ net.weights[1].data + net.biases[1].data
    out = net.forward(x)
    np.testing.assert_allclose(out.data, expect, rtol=0, atol=1e-15)


def test_forward_rejects_bad_dim():
    net = Mlp([3, 1])
    with pytest.raises(DimensionError):
        net.forward(np.zeros(4))


def test_forward_batched_equals_rowwise():
    net = Mlp([4, 5, 2], rng=np.random.default_rng(3))
    xs = np.random.default_rng(4).normal(size=(6, 4))
    batch = net.forward(xs).data
    rows = np.stack([net.forward(x).data for x in xs])
    np.testing.assert_allclose(batch, rows, atol=1e-14)


# ---------------------------------------------------------------------------
# grad
# ---------------------------------------------------------------------------


def test_grad_linear_sum_is_ones():
    w = Tensor(np.array([1.0, -2.0, 3.0]), requires_grad=True)
    (g,) = grad(lambda: w.sum(), [w])
    np.testing.assert_array_equal(g, np.ones(3))


def test_grad_quadratic():
    w = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    (g,) = grad(lambda: (w**2).sum(), [w])
    np.testing.assert_allclose(g, [2.0, 4.0])


def test_grad_nonscalar_loss_rejected():
    w = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    with pytest.raises(GradientError):
        grad(lambda: w * 2.0, [w])


def test_grad_two_layer_net_vs_finite_differences():
    rng = np.random.default_rng(7)
    net = Mlp([3, 4, 1], rng=rng)
    x = rng.normal(size=3)

    def loss():
        return (net.forward(x) ** 2).sum()

    gs = grad(loss, net.params())
    for p, g in zip(net.params(), gs):
        orig = p.data.copy()

        def f(v, p=p):
            p.data = v
            out = float((net.forward(x).data ** 2).sum())
            return out

        fd = central_diff(f, orig.copy())
        p.data = orig
        assert rel_err(g, fd).max() < 1e-4


def test_gradient_correctness_many_random_nets():
    # >= 100 random small nets/inputs, autodiff vs central differences
    rng = np.random.default_rng(42)
    worst = 0.0
    for trial in range(100):
        sizes = [int(rng.integers(1, 4)) for _ in range(3)]
        act = "tanh" if trial % 2 == 0 else "relu"
        net = Mlp(sizes, activation=act, rng=np.random.default_rng(trial))
        x = rng.normal(size=sizes[0])

        def loss():
            return (net.forward(x) ** 2).sum()

        gs = grad(loss, net.params())
        for p, g in zip(net.params(), gs):
            orig = p.data.copy()

            def f(v, p=p):
                p.data = v
                return float((net.forward(x).data ** 2).sum())

            fd = central_diff(f, orig.copy())
            p.data = orig
            worst = max(worst, rel_err(g, fd).max())
    assert worst < 1e-4


# ---------------------------------------------------------------------------
# stop_gradient
# ---------------------------------------------------------------------------


def test_stop_gradient_cuts_one_branch_of_product():
    w = Tensor(np.array([2.0]), requires_grad=True)
    (g,) = grad(lambda: (stop_gradient(w) * w).sum(), [w])
    np.testing.assert_array_equal(g, [2.0])


def test_stop_gradient_commit_term_structure():
    z = Tensor(np.array([1.0, -0.5]), requires_grad=True)
    c = Tensor(np.array([0.0, 0.0]), requires_grad=True)
    (gz,) = grad(lambda: ((stop_gradient(z) - c) ** 2).sum(), [z])
    np.testing.assert_array_equal(gz, np.zeros(2))


def test_stop_gradient_forward_identity_and_idempotent():
    x = Tensor(np.array([0.1, -2.7, 3.14159]), requires_grad=True)
    once = stop_gradient(x)
    twice = stop_gradient(once)
    assert np.array_equal(once.data, x.data)
    assert np.array_equal(twice.data, x.data)
    assert not once.requires_grad and not twice.requires_grad


# ---------------------------------------------------------------------------
# input_gradient
# ---------------------------------------------------------------------------


def test_input_gradient_linear_net_returns_weights():
    net = Mlp([3, 1])
    net.weights[0].data[:, 0] = [1.0, 2.0, 3.0]
    net.biases[0].data[:] = 0.5
    g = input_gradient(net, np.array([0.3, -0.1, 2.0]))
    np.testing.assert_allclose(g, [1.0, 2.0, 3.0])


def test_input_gradient_constant_net_is_zero():
    net = Mlp([3, 1])
    net.weights[0].data[:] = 0.0
    net.biases[0].data[:] = 7.0
    g = input_gradient(net, np.array([1.0, 1.0, 1.0]))
    np.testing.assert_array_equal(g, np.zeros(3))


def test_input_gradient_matches_finite_differences():
    net = Mlp([4, 6, 1], rng=np.random.default_rng(11))
    x = np.random.default_rng(12).normal(size=4)
    g = input_gradient(net, x)
    fd = central_diff(lambda v: float(net.forward(v).data[0]), x.copy())
    assert rel_err(g, fd).max() < 1e-4


def test_input_gradient_requires_scalar_output():
    net = Mlp([3, 2])
    with pytest.raises(GradientError):
        input_gradient(net, np.zeros(3))


# ---------------------------------------------------------------------------
# adam
# ---------------------------------------------------------------------------


def adam_scalar_oracle(g_seq, lr, b1=0.9, b2=0.999, eps=1e-8, x0=0.0):
    """Textbook scalar Adam recurrence, unrolled independently."""
    m = v = 0.0
    x = x0
    for t, g in enumerate(g_seq, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        x = x - lr * mhat / (np.sqrt(vhat) + eps)
    return x


def test_adam_zero_grad_keeps_params():
    p = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    st = AdamState([p])
    adam_step([p], [np.zeros(2)], st, lr=0.1)
    np.testing.assert_array_equal(p.data, [1.0, 2.0])
    assert st.step == 1


def test_adam_first_step_matches_scalar_recurrence():
    p = Tensor(np.array([0.0]), requires_grad=True)
    st = AdamState([p])
    adam_step([p], [np.array([1.0])], st, lr=0.001)
    expect = adam_scalar_oracle([1.0], lr=0.001)
    np.testing.assert_allclose(p.data, [expect], atol=1e-15)
    # bias correction makes the first update ~ lr * g / (|g| + eps)
    assert abs(p.data[0] + 0.001) < 1e-6


def test_adam_two_steps_match_scalar_recurrence():
    p = Tensor(np.array([0.0]), requires_grad=True)
    st = AdamState([p])
    adam_step([p], [np.array([1.0])], st, lr=0.001)
    adam_step([p], [np.array([1.0])], st, lr=0.001)
    expect = adam_scalar_oracle([1.0, 1.0], lr=0.001)
    np.testing.assert_allclose(p.data, [expect], atol=1e-15)


def test_adam_rejects_nonfinite_grads():
    p = Tensor(np.array([1.0]), requires_grad=True)
    st = AdamState([p])
    with pytest.raises(NonFiniteGradError):
        adam_step([p], [np.array([np.nan])], st, lr=0.1)
    assert p.data[0] == 1.0
    assert st.step == 0


def test_clip_global_norm():
    gs = [np.array([3.0]), np.array([4.0])]
    clipped, total = clip_global_norm(gs, max_norm=1.0)
    assert abs(total - 5.0) < 1e-12
    joined = np.sqrt(sum(float(np.sum(g * g)) for g in clipped))
    assert abs(joined - 1.0) < 1e-12
    same, _ = clip_global_norm(gs, max_norm=10.0)
    assert same[0][0] == 3.0


# ---------------------------------------------------------------------------
# misc ops and determinism
# ---------------------------------------------------------------------------


def test_smooth_l1_values_and_grad():
    x = Tensor(np.array([0.5, 2.0]), requires_grad=True)
    loss = smooth_l1(x, np.zeros(2), delta=1.0)
    # mean of [0.5*0.25, 2.0-0.5]
    assert abs(loss.data - (0.125 + 1.5) / 2) < 1e-12
    loss.backward()
    np.testing.assert_allclose(x.grad, [0.5 / 2, 1.0 / 2])


def test_l2_norm_grad_safe_at_zero():
    x = Tensor(np.zeros(3), requires_grad=True)
    n = l2_norm(x)
    n.backward()
    assert n.data == 0.0
    assert np.all(np.isfinite(x.grad))


def test_weight_serialization_roundtrip():
    net = Mlp([3, 5, 2], rng=np.random.default_rng(9))
    blob = net.to_bytes()
    assert blob[:4] == b"WNN1"
    back = Mlp.from_bytes(blob)
    assert back.sizes == net.sizes
    for w0, w1 in zip(net.weights, back.weights):
        np.testing.assert_allclose(w0.data, w1.data, atol=1e-6)
    # f32 storage round-trips exactly once quantized
    again = Mlp.from_bytes(back.to_bytes())
    for w0, w1 in zip(back.weights, again.weights):
        np.testing.assert_array_equal(w0.data, w1.data)


def test_seeded_training_is_bit_deterministic():
    def run():
        net = Mlp([2, 4, 1], rng=np.random.default_rng(5))
        st = AdamState(net.params())
        x = np.random.default_rng(6).normal(size=(8, 2))
        y = np.random.default_rng(7).normal(size=(8, 1))
        for _ in range(20):
            gs = grad(lambda: ((net.forward(x) - Tensor(y)) ** 2).mean(), net.params())
            adam_step(net.params(), gs, st, lr=1e-2)
        return [p.data.copy() for p in net.params()]

    a = run()
    b = run()
    for pa, pb in zip(a, b):
        assert np.array_equal(pa, pb)
