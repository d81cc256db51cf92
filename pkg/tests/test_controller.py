import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from fdaflock import FlockParams, PerceivedNeighbor, fda_control, predict_velocity, reactive_control, saturate
from fdaflock.controller import compute_controls

from helpers import pair_state

# independent high-precision evaluations (mpmath, 30 digits)
FOUR_TANH_1 = 3.04637662382305955
FOUR_TANH_QUARTER = 0.979674649614836517
SAT_11_COMPONENT = 0.960316341708909543   # saturate((1,1,0), 4) per component
SAT_12 = (0.907392304811555443, 1.81478460962311089)  # saturate((1,2,0), 4)


def views(state, idx):
    return [PerceivedNeighbor(j, state.positions[j], state.velocities[j], state.controls[j]) for j in idx]


def test_saturate_zero():
    assert np.array_equal(saturate(np.zeros(3), 4.0), np.zeros(3))


def test_saturate_limit():
    y = saturate(np.array([1000.0, 0, 0]), 4.0)
    assert abs(np.linalg.norm(y) - 4.0) < 1e-9
    assert y[1] == y[2] == 0


def test_saturate_at_max():
    y = saturate(np.array([4.0, 0, 0]), 4.0)
    assert np.linalg.norm(y) == pytest.approx(FOUR_TANH_1, abs=1e-14)


def test_saturate_rows():
    x = np.array([[4.0, 0, 0], [0, 0, 0], [0, 1000, 0]])
    y = saturate(x, 4.0)
    assert y[0, 0] == pytest.approx(FOUR_TANH_1, abs=1e-14)
    assert np.array_equal(y[1], np.zeros(3))


bounded = arrays(float, 3, elements=st.floats(-1e8, 1e8, allow_nan=False))


@given(bounded, st.floats(1e-3, 1e3))
def test_saturation_bound_and_direction(x, x_max):
    y = saturate(x, x_max)
    assert np.linalg.norm(y) < x_max
    n = np.linalg.norm(x)
    if n > 0:
        assert np.allclose(y / np.linalg.norm(y), x / n, atol=1e-12)


@given(st.floats(1e-6, 20.0), st.floats(1e-6, 20.0))
def test_saturation_monotone(a, b):
    if a == b:
        return
    lo, hi = sorted((a, b))
    if hi - lo < 1e-9 * hi:
        return
    y_lo = np.linalg.norm(saturate(np.array([lo, 0, 0]), 4.0))
    y_hi = np.linalg.norm(saturate(np.array([hi, 0, 0]), 4.0))
    assert y_lo < y_hi


def test_predict_velocity_examples():
    y = predict_velocity([1, 0, 0], [0, 0, 0], 1.0, 4.0)
    assert y == pytest.approx([FOUR_TANH_QUARTER, 0, 0], abs=1e-14)
    assert np.array_equal(predict_velocity(np.zeros(3), np.zeros(3), 1.0, 4.0), np.zeros(3))
    y = predict_velocity([1, 0, 0], [0, 2, 0], 1.0, 4.0)
    assert y == pytest.approx([SAT_12[0], SAT_12[1], 0], abs=1e-14)


def test_reactive_equilibrium_pair_is_zero():
    s = pair_state((0, 0, 0), (1, 0, 0), (1, 0, 0), (1, 0, 0))
    cmd = reactive_control(0, s, views(s, [1]), FlockParams(n=2))
    assert np.array_equal(cmd.raw, np.zeros(3))
    assert np.array_equal(cmd.applied, np.zeros(3))


def test_no_neighbors_is_zero():
    s = pair_state((0, 0, 0), (100, 0, 0), (1, 0, 0), (0, 1, 0))
    for law in (reactive_control, fda_control):
        cmd = law(0, s, [], FlockParams(n=2))
        assert np.array_equal(cmd.applied, np.zeros(3))


def test_reactive_cohesion_example():
    s = pair_state((0, 0, 0), (2, 0, 0))
    cmd = reactive_control(0, s, views(s, [1]), FlockParams(n=2))
    assert cmd.raw == pytest.approx([1.0, 0, 0], abs=1e-15)
    assert np.linalg.norm(cmd.applied) == pytest.approx(8 * np.tanh(1 / 8), abs=1e-14)


def test_fda_prediction_example():
    # equilibrium spacing delta*k = 1, equal velocities, neighbor accelerating along y
    s = pair_state((0, 0, 0), (1, 0, 0), (1, 0, 0), (1, 0, 0), u2=(0, 1, 0))
    cmd = fda_control(0, s, views(s, [1]), FlockParams(n=2, theta=0.8, t_ph=1.0))
    expected = 0.8 * (np.array([SAT_11_COMPONENT, SAT_11_COMPONENT, 0]) - np.array([1.0, 0, 0]))
    assert cmd.raw == pytest.approx(expected, abs=1e-14)


def test_fda_theta_one_zero_controls():
    s = pair_state((0, 0, 0), (3, 0, 0), (0.5, 0, 0), (2, 1, 0))
    p = FlockParams(n=2, theta=1.0)
    fda = fda_control(0, s, views(s, [1]), p)
    cohesion = (1 - 1.0 * 1 / 3) * np.array([3.0, 0, 0])
    align = saturate(np.array([2.0, 1, 0]), 4.0) - np.array([0.5, 0, 0])
    assert fda.raw == pytest.approx(cohesion + align, abs=1e-14)
    rea = reactive_control(0, s, views(s, [1]), p)
    assert not np.allclose(fda.raw, rea.raw)


def random_state(rng, n=6, m=3):
    from fdaflock import FlockState
    return FlockState(0.0, rng.uniform(0, 8, (n, m)), rng.normal(size=(n, m)), rng.normal(size=(n, m)))


@pytest.mark.parametrize("seed", range(5))
def test_theta_zero_bitwise_equal(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng)
    p = FlockParams(n=6, theta=0.0)
    for i in range(s.n):
        idx = [j for j in range(s.n) if j != i and np.linalg.norm(s.positions[j] - s.positions[i]) <= p.r]
        a = fda_control(i, s, views(s, idx), p)
        b = reactive_control(i, s, views(s, idx), p)
        assert np.array_equal(a.raw, b.raw) and np.array_equal(a.applied, b.applied)


@pytest.mark.parametrize("seed", range(5))
def test_theta_affine_interpolation(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng)
    idx = [1, 2, 3]
    raw = {th: fda_control(0, s, views(s, idx), FlockParams(n=6, theta=th)).raw for th in (0.0, 0.3, 1.0)}
    assert raw[0.3] == pytest.approx(0.7 * raw[0.0] + 0.3 * raw[1.0], abs=1e-12)


def test_t_ph_zero_is_not_reactive():
    # re-saturating v_j changes the alignment even with a zero horizon
    s = pair_state((0, 0, 0), (2, 0, 0), (0, 0, 0), (1.5, 0, 0))
    p = FlockParams(n=2, t_ph=0.0, theta=0.8)
    fda = fda_control(0, s, views(s, [1]), p)
    rea = reactive_control(0, s, views(s, [1]), p)
    assert not np.array_equal(fda.raw, rea.raw)


def test_cohesion_not_blended():
    # equal velocities, zero controls: alignment terms vanish up to saturation of v_j=0
    s = pair_state((0, 0, 0), (3, 0, 0))
    raws = [fda_control(0, s, views(s, [1]), FlockParams(n=2, theta=th)).raw for th in (0.0, 0.5, 1.0)]
    assert np.array_equal(raws[0], raws[1]) and np.array_equal(raws[1], raws[2])


def test_per_agent_matches_batch():
    rng = np.random.default_rng(11)
    s = random_state(rng, n=8)
    p = FlockParams(n=8)
    from fdaflock.interaction import adjacency
    mask = adjacency(s.positions, p.r)
    bc = lambda a: np.broadcast_to(a, (8,) + a.shape)  # noqa: E731
    raw, applied = compute_controls(s.positions, s.velocities, bc(s.positions), bc(s.velocities),
                                    bc(s.controls), mask, p)
    for i in range(8):
        cmd = fda_control(i, s, views(s, np.flatnonzero(mask[i])), p)
        assert np.array_equal(cmd.raw, raw[i])
        assert np.array_equal(cmd.applied, applied[i])
