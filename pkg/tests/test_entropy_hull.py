import math

import numpy as np
import pytest

from credro.entropy import (
    box_entropy_pair,
    hull_entropy_pair,
    lower_entropy_hull,
    shannon_entropy,
    upper_entropy_hull,
)
from credro.oracles import hull_weight_grid
from credro.simplex import MemberSet, ProbVector, extract_intervals

from conftest import random_members


class TestUpperEntropyHull:
    def test_single_member(self):
        ms = MemberSet((ProbVector([0.7, 0.3]),))
        h, w = upper_entropy_hull(ms)
        assert h == pytest.approx(shannon_entropy(ms.members[0]), abs=1e-12)
        assert np.allclose(w.weights, [1.0])

    def test_identical_members(self):
        p = ProbVector([0.1, 0.6, 0.3])
        ms = MemberSet((p, p, p))
        h, w = upper_entropy_hull(ms)
        assert h == pytest.approx(shannon_entropy(p), abs=1e-12)
        assert abs(float(w.weights.sum()) - 1.0) <= 1e-9

    def test_matches_weight_grid_oracle(self, rng):
        for _ in range(25):
            probs = random_members(rng, 3, 3)
            h_cg, _ = upper_entropy_hull(MemberSet.from_array(probs))
            h_grid, _ = hull_weight_grid(probs, step=1e-3)
            assert h_cg == pytest.approx(h_grid, abs=1e-5)

    def test_mixture_of_weights_attains_value(self, rng):
        for _ in range(50):
            m = int(rng.integers(2, 7))
            c = int(rng.integers(2, 6))
            probs = random_members(rng, m, c)
            h, w = upper_entropy_hull(MemberSet.from_array(probs))
            mix = w.weights @ probs
            assert shannon_entropy(ProbVector(mix)) == pytest.approx(h, abs=1e-9)


class TestLowerEntropyHull:
    def test_single_member(self):
        ms = MemberSet((ProbVector([0.7, 0.3]),))
        h, idx = lower_entropy_hull(ms)
        assert idx == 0
        assert h == pytest.approx(shannon_entropy(ms.members[0]), abs=1e-12)

    def test_picks_most_confident_member(self):
        ms = MemberSet((ProbVector([0.5, 0.5]), ProbVector([0.9, 0.1])))
        h, idx = lower_entropy_hull(ms)
        assert idx == 1
        assert h == pytest.approx(0.325083, abs=1e-6)

    def test_ties_break_to_lowest_index(self):
        ms = MemberSet((ProbVector([0.9, 0.1]), ProbVector([0.1, 0.9])))
        _, idx = lower_entropy_hull(ms)
        assert idx == 0

    def test_below_every_member(self, rng):
        for _ in range(100):
            m = int(rng.integers(1, 9))
            c = int(rng.integers(2, 6))
            ms = MemberSet.from_array(random_members(rng, m, c))
            h, _ = lower_entropy_hull(ms)
            assert all(
                h <= shannon_entropy(member) + 1e-12 for member in ms.members
            )


class TestHullBoxRelations:
    def test_hull_contained_in_box(self, rng):
        for _ in range(300):
            m = int(rng.integers(1, 8))
            c = int(rng.integers(2, 6))
            ms = MemberSet.from_array(random_members(rng, m, c))
            hull = hull_entropy_pair(ms)
            box = box_entropy_pair(extract_intervals(ms))
            assert hull.upper <= box.upper + 1e-9
            assert hull.lower >= box.lower - 1e-9

    def test_binary_equality(self, rng):
        for _ in range(300):
            m = int(rng.integers(1, 8))
            ms = MemberSet.from_array(random_members(rng, m, 2))
            hull = hull_entropy_pair(ms)
            box = box_entropy_pair(extract_intervals(ms))
            assert hull.upper == pytest.approx(box.upper, abs=1e-9)
            assert hull.lower == pytest.approx(box.lower, abs=1e-9)
