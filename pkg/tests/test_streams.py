"""Input streams: uniform draws, shuffled lattices, reflected walks."""

import math

import pytest

from protostream.errors import ConfigError, EmptyStreamError
from protostream.streams import GridSweep, IidUniform, RandomWalk, generate_stream

UNIT = ((0.0, 1.0),)

# asymptotic 1% critical value for the one-sample KS statistic
KS_COEFF = 1.6276


def _ks_statistic(values):
    data = sorted(values)
    n = len(data)
    d = 0.0
    for i, u in enumerate(data, start=1):
        d = max(d, i / n - u, u - (i - 1) / n)
    return d


def test_iid_uniform_stays_in_bounds():
    gen = IidUniform(((2.0, 3.0), (-1.0, 0.0)), seed=4)
    for x, y in generate_stream(gen, 500):
        assert 2.0 <= x < 3.0
        assert -1.0 <= y < 0.0


def test_iid_uniform_passes_ks_at_one_percent():
    gen = IidUniform(UNIT, seed=0)
    n = 10_000
    values = [p[0] for p in generate_stream(gen, n)]
    assert _ks_statistic(values) < KS_COEFF / math.sqrt(n)


def test_iid_uniform_same_seed_reproduces():
    a = generate_stream(IidUniform(UNIT, seed=8), 100)
    b = generate_stream(IidUniform(UNIT, seed=8), 100)
    assert a == b


def test_iid_uniform_streams_diverge():
    a = generate_stream(IidUniform(UNIT, seed=8, stream=1), 50)
    b = generate_stream(IidUniform(UNIT, seed=8, stream=3), 50)
    assert a != b


def test_grid_sweep_resolution_four_is_permutation():
    gen = GridSweep(4, UNIT, seed=42)
    points = generate_stream(gen, 4)
    values = sorted(p[0] for p in points)
    assert values == [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]


def test_grid_sweep_two_dimensional_lattice():
    gen = GridSweep(3, ((0.0, 1.0), (0.0, 2.0)), seed=5)
    points = generate_stream(gen, 9)
    assert len(set(points)) == 9
    xs = {p[0] for p in points}
    ys = {p[1] for p in points}
    assert xs == {0.0, 0.5, 1.0}
    assert ys == {0.0, 1.0, 2.0}


def test_grid_sweep_resolution_one_is_lower_corner():
    gen = GridSweep(1, ((3.0, 4.0),), seed=0)
    assert generate_stream(gen, 1) == [(3.0,)]


def test_grid_sweep_shuffle_depends_on_seed():
    a = generate_stream(GridSweep(16, UNIT, seed=1), 16)
    b = generate_stream(GridSweep(16, UNIT, seed=2), 16)
    assert sorted(a) == sorted(b)
    assert a != b


def test_grid_sweep_rejects_requests_beyond_lattice():
    gen = GridSweep(4, UNIT, seed=0)
    with pytest.raises(ConfigError):
        generate_stream(gen, 5)


def test_random_walk_stays_in_bounds_and_moves_gently():
    scale = 0.07
    gen = RandomWalk(scale, UNIT, seed=6)
    points = generate_stream(gen, 2000)
    assert points[0] == (0.5,)
    for prev, cur in zip(points, points[1:]):
        assert 0.0 <= cur[0] <= 1.0
        assert abs(cur[0] - prev[0]) <= scale + 1e-12


def test_random_walk_same_seed_reproduces():
    a = generate_stream(RandomWalk(0.1, UNIT, seed=9), 200)
    b = generate_stream(RandomWalk(0.1, UNIT, seed=9), 200)
    assert a == b


def test_generate_stream_rejects_nonpositive_length():
    with pytest.raises(EmptyStreamError):
        generate_stream(IidUniform(UNIT, seed=0), 0)


def test_bounds_must_be_ordered():
    with pytest.raises(ConfigError):
        IidUniform(((1.0, 1.0),), seed=0)
    with pytest.raises(ConfigError):
        GridSweep(4, ((2.0, 1.0),), seed=0)
    with pytest.raises(ConfigError):
        RandomWalk(0.1, (), seed=0)
