import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csil.dictionary import TrigDictionary, index_project
from csil.errors import ConfigError
from csil.geometry import weighted_l1_norm
from csil.taskgen import StreamConfig, generate, read_stream, write_stream


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 40), st.integers(1, 6), st.floats(0.1, 10),
       st.integers(1, 6), st.floats(0.1, 3), st.integers(0, 2**32))
def test_bounds_hold(T, n, d, M, S, C2, seed):
    cfg = StreamConfig(T=T, n=n, d=d, M=M, S_true=S, C2_true=C2, seed=seed)
    s = generate(cfg)
    assert s.T == T and s.theta_star.shape == (d,) and s.betas.shape == (T, S)
    assert abs(np.abs(s.theta_star).sum() - 1) < 1e-12
    assert np.all(weighted_l1_norm(s.betas) <= C2 + 1e-12)
    for task in s.tasks:
        assert task.X.shape == (n, d) and task.y.shape == (n,)
        assert np.all(np.linalg.norm(task.X, axis=1) <= M * (1 + 1e-12))
        assert np.all(np.abs(task.y) <= cfg.label_bound + 1e-12)


def test_realizable_labels():
    s = generate(StreamConfig(T=4, n=50, d=3, M=2.0, seed=3))
    D = TrigDictionary(4)
    for task, beta in zip(s.tasks, s.betas):
        z = index_project(s.theta_star, task.X, 2.0)
        np.testing.assert_array_equal(D.design(z) @ beta, task.y)


def test_noise_is_bounded():
    s = generate(StreamConfig(T=3, n=200, seed=1, noise="uniform", noise_bound=0.2))
    clean = generate(StreamConfig(T=3, n=200, seed=1))
    for a, b in zip(s.tasks, clean.tasks):
        np.testing.assert_array_equal(a.X, b.X)
        r = a.y - b.y
        assert np.all(np.abs(r) <= 0.2) and np.std(r) > 0.05


def test_tasks_share_theta_and_differ_in_beta():
    s = generate(StreamConfig(T=30, S_true=2, seed=9))
    assert len(np.unique(s.betas, axis=0)) == 30


def test_prefix_property():
    short = generate(StreamConfig(T=3, n=10, seed=5))
    long = generate(StreamConfig(T=8, n=10, seed=5))
    np.testing.assert_array_equal(short.theta_star, long.theta_star)
    for a, b in zip(short.tasks, long.tasks):
        np.testing.assert_array_equal(a.y, b.y)


@pytest.mark.parametrize("kw", [dict(n=0), dict(T=0), dict(d=0), dict(M=0.0),
                                dict(noise="gauss"), dict(noise="uniform"),
                                dict(seed=-1), dict(C2_true=0.0), dict(n=2.5)])
def test_invalid_config(kw):
    with pytest.raises(ConfigError):
        StreamConfig(**kw)


def test_n0_names_field():
    with pytest.raises(ConfigError, match="n"):
        StreamConfig(n=0)


def test_round_trip_is_byte_identical(tmp_path):
    cfg = StreamConfig(T=3, n=7, d=2, seed=2, noise="uniform", noise_bound=0.1)
    for k in range(2):
        write_stream(generate(cfg), tmp_path / f"s{k}.csv", tmp_path / f"s{k}.json")
    assert (tmp_path / "s0.csv").read_bytes() == (tmp_path / "s1.csv").read_bytes()
    assert (tmp_path / "s0.json").read_bytes() == (tmp_path / "s1.json").read_bytes()
    back = read_stream(tmp_path / "s0.csv", tmp_path / "s0.json")
    orig = generate(cfg)
    assert back.config == cfg
    for a, b in zip(back.tasks, orig.tasks):
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)
    bare = read_stream(tmp_path / "s0.csv", M=1.0)
    assert bare.theta_star is None and bare.config.M == 1.0 and bare.T == 3
