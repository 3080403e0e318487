from __future__ import annotations

import numpy as np
import pytest

from optscore.rng import seed_record, stream


def test_streams_are_reproducible_and_distinct():
    a = stream(5, "x", 1).standard_normal(4)
    np.testing.assert_array_equal(a, stream(5, "x", 1).standard_normal(4))
    np.testing.assert_array_equal(a, stream((5, "x"), 1).standard_normal(4))
    assert not np.array_equal(a, stream(5, "x", 2).standard_normal(4))
    assert not np.array_equal(a, stream(6, "x", 1).standard_normal(4))


def test_generator_passthrough_and_errors():
    g = np.random.default_rng(0)
    assert stream(g) is g
    with pytest.raises(ValueError):
        stream(g, 1)
    with pytest.raises(ValueError):
        stream(None)
    with pytest.raises(ValueError):
        stream(1, -3)


def test_seed_record():
    assert seed_record(3, "a") == (3, "a")
    assert seed_record((3, 1), 2) == (3, 1, 2)
    assert seed_record(np.random.default_rng(0)) == ("generator",)
