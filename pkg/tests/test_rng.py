import numpy as np

from hadamardlab import rng


def test_streams_deterministic():
    v1 = rng.unit_vector_2d(1, 5, 17)
    v2 = rng.unit_vector_2d(1, 5, 17)
    assert np.array_equal(v1, v2)
    assert abs(np.linalg.norm(v1) - 1.0) < 1e-12


def test_streams_differ_across_keys():
    base = rng.unit_vector_2d(1, 5, 17)
    assert not np.array_equal(base, rng.unit_vector_2d(2, 5, 17))
    assert not np.array_equal(base, rng.unit_vector_2d(1, 6, 17))
    assert not np.array_equal(base, rng.unit_vector_2d(1, 5, 18))


def test_direction_moments_2d():
    n = 20000
    vecs = np.array([rng.unit_vector_2d(3, w, 0) for w in range(n)])
    mean = vecs.mean(axis=0)
    assert np.linalg.norm(mean) < 4.0 / np.sqrt(n)
    second = (vecs[:, 0] ** 2).mean()
    assert abs(second - 0.5) < 5.0 / np.sqrt(n)


def test_direction_moments_3d():
    n = 10000
    vecs = np.array([rng.unit_vector_nd(3, w, 0, 3) for w in range(n)])
    assert np.linalg.norm(vecs.mean(axis=0)) < 4.0 / np.sqrt(n)
    assert np.allclose(np.linalg.norm(vecs, axis=1), 1.0, atol=1e-12)
    assert abs((vecs[:, 2] ** 2).mean() - 1.0 / 3.0) < 5.0 / np.sqrt(n)


def test_uniform_stream_range_and_determinism():
    u = rng.uniform_stream(9, 4, 1000)
    assert np.all((0.0 <= u) & (u < 1.0))
    assert np.array_equal(u, rng.uniform_stream(9, 4, 1000))
    assert abs(u.mean() - 0.5) < 0.05


def test_word_candidates_cover_square():
    words = rng.mix64(np.arange(1, 5001, dtype=np.uint64))
    a, b = rng.word_to_candidates(words)
    assert a.min() < -0.99 and a.max() > 0.99
    assert b.min() < -0.99 and b.max() > 0.99
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05
