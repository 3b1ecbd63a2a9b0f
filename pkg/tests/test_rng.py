import numpy as np

from entropy_forge.rng import stream


def test_streams_are_reproducible_and_distinct():
    a = stream(7, 3).integers(0, 1 << 30, 8)
    assert np.array_equal(a, stream(7, 3).integers(0, 1 << 30, 8))
    assert not np.array_equal(a, stream(7, 4).integers(0, 1 << 30, 8))
    assert not np.array_equal(a, stream(8, 3).integers(0, 1 << 30, 8))


def test_stream_is_pcg64_over_spawn_keys():
    ss = np.random.SeedSequence(entropy=7, spawn_key=(3,))
    ref = np.random.Generator(np.random.PCG64(ss)).random(4)
    assert np.array_equal(stream(7, 3).random(4), ref)
    # the i-th spawned child of seed s is stream(s, i)
    child = np.random.SeedSequence(7).spawn(3)[2]
    assert np.array_equal(stream(7, 2).random(4), np.random.Generator(np.random.PCG64(child)).random(4))
