import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from fdaflock import ConfigError, FlockParams, FlockState, cosine_similarity, norm

finite = st.floats(-1e6, 1e6, allow_nan=False)
vec3 = arrays(float, 3, elements=finite)


@pytest.mark.parametrize("v, expected", [
    ((0, 0, 0), 0.0),
    ((3, 4, 0), 5.0),
    ((1, 1, 1), math.sqrt(3)),
])
def test_norm(v, expected):
    assert norm(v) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("a, b, expected", [
    ((1, 0, 0), (2, 0, 0), 1.0),
    ((1, 0, 0), (-1, 0, 0), -1.0),
    ((1, 0, 0), (0, 0, 0), 0.0),
])
def test_cosine_similarity(a, b, expected):
    assert cosine_similarity(a, b) == expected


def test_cosine_below_speed_floor_is_zero():
    assert cosine_similarity((1e-10, 0, 0), (1, 0, 0)) == 0.0


@given(vec3, vec3)
def test_cosine_symmetric_and_bounded(a, b):
    c = cosine_similarity(a, b)
    assert c == cosine_similarity(b, a)
    assert -1.0 <= c <= 1.0


@given(vec3, vec3, vec3)
def test_norm_triangle_inequality(a, b, c):
    assert norm(a - c) <= norm(a - b) + norm(b - c) + 1e-9 * (1 + norm(a) + norm(b) + norm(c))


@given(arrays(int, 3, elements=st.integers(-2**20, 2**20)), arrays(int, 3, elements=st.integers(-2**20, 2**20)),
       st.integers(-1000, 1000))
def test_integer_vector_arithmetic_exact(a, b, k):
    fa, fb = a.astype(float), b.astype(float)
    assert np.array_equal(fa + fb, (a + b).astype(float))
    assert np.array_equal(fa - fb, (a - b).astype(float))
    assert np.array_equal(k * fa, (k * a).astype(float))


def test_paper_defaults():
    p = FlockParams()
    assert (p.n, p.m, p.dt, p.T, p.r, p.delta, p.theta, p.t_ph, p.tau, p.v_max, p.u_max) == \
        (10, 3, 0.02, 25.0, 7.5, 1.0, 0.8, 1.0, 0.4, 4.0, 8.0)
    assert p.lag_steps == 20
    assert p.n_steps == 1250


@pytest.mark.parametrize("field, value", [
    ("n", 1), ("dt", 0.0), ("r", -1.0), ("delta", -0.1), ("theta", 1.5), ("theta", -0.1),
    ("t_ph", -1.0), ("tau", -0.02), ("v_max", 0.0), ("u_max", -1.0), ("model", "vicsek"),
    ("tau", 0.03),
])
def test_params_validation_names_field(field, value):
    with pytest.raises(ConfigError) as exc:
        FlockParams(**{field: value})
    assert exc.value.field == field


def test_theta_error_mentions_bound():
    with pytest.raises(ConfigError, match=r"\[0, 1\]"):
        FlockParams(theta=1.5)


def test_flock_state_is_read_only():
    s = FlockState(0.0, np.zeros((2, 3)), np.zeros((2, 3)), np.zeros((2, 3)))
    with pytest.raises(ValueError):
        s.positions[0, 0] = 1.0
    assert s.agent(1).position.shape == (3,)
    assert len(s.agents) == 2
