from core.randomness import DEFAULT_BLOCK, RandomStream, derive_seed


def test_same_seed_same_stream():
    a, b = RandomStream(7), RandomStream(7)
    assert [a.random() for _ in range(DEFAULT_BLOCK + 10)] == [b.random() for _ in range(DEFAULT_BLOCK + 10)]


def test_different_seeds_differ():
    a, b = RandomStream(1), RandomStream(2)
    assert [a.random() for _ in range(8)] != [b.random() for _ in range(8)]


def test_randbelow_stays_in_range():
    rng = RandomStream(3)
    values = [rng.randbelow(5) for _ in range(5000)]
    assert set(values) == {0, 1, 2, 3, 4}


def test_bernoulli_extremes():
    rng = RandomStream(4)
    assert all(rng.bernoulli(1.0) for _ in range(100))
    assert not any(rng.bernoulli(0.0) for _ in range(100))


def test_derive_seed_depends_only_on_master_and_index():
    assert derive_seed(10, 3) == derive_seed(10, 3)
    assert derive_seed(10, 3) != derive_seed(10, 4)
    assert derive_seed(10, 3) != derive_seed(11, 3)
    assert 0 <= derive_seed(10, 3) < 2 ** 64


def test_spawn_is_reproducible():
    first = [s.random() for s in RandomStream(9).spawn(3)]
    second = [s.random() for s in RandomStream(9).spawn(3)]
    assert first == second
    assert len(set(first)) == 3


def test_uniform_array_shape():
    values = RandomStream(5).uniform_array(100)
    assert values.shape == (100,)
    assert ((values >= 0) & (values < 1)).all()
