import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stacksat.errors import ActionIndexError, GameValidationError, InvalidStrategyError
from stacksat.experiments import load_example_game
from stacksat.game import (
    BimatrixGame,
    expected_utilities,
    find_pure_ne,
    follower_br_mixed,
    follower_br_pure,
    follower_br_sat_mixed,
    follower_br_sat_pure,
    satisfaction_probability,
    validate_game,
)


@pytest.fixture(scope="module")
def example():
    return load_example_game()


def random_game(rng, n_l, n_f):
    return BimatrixGame(rng.uniform(size=(n_l, n_f)), rng.uniform(size=(n_l, n_f)))


class TestValidate:
    def test_example_shape(self, example):
        g = validate_game(example.u_leader, example.u_follower)
        assert (g.n_leader, g.n_follower) == (10, 7)

    def test_minimal_game(self):
        g = validate_game([[0.5]], [[0.5]])
        assert (g.n_leader, g.n_follower) == (1, 1)

    def test_dimension_mismatch(self):
        with pytest.raises(GameValidationError, match="dimension-mismatch"):
            validate_game(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_non_finite_reports_position(self):
        uf = np.zeros((2, 2))
        uf[1, 0] = np.nan
        with pytest.raises(GameValidationError, match=r"u_follower\[row 2, column 1\]"):
            validate_game(np.zeros((2, 2)), uf)

    def test_ragged_json_rejected(self):
        with pytest.raises(GameValidationError):
            BimatrixGame.from_dict({"u_leader": [[1, 2], [3]], "u_follower": [[1, 2], [3, 4]]})

    def test_declared_counts_checked(self):
        raw = {"n_leader": 3, "n_follower": 1, "u_leader": [[1.0]], "u_follower": [[1.0]]}
        with pytest.raises(GameValidationError):
            BimatrixGame.from_dict(raw)

    def test_json_round_trip(self, example):
        again = BimatrixGame.from_dict(example.to_dict())
        assert np.array_equal(again.u_leader, example.u_leader)
        assert np.array_equal(again.u_follower, example.u_follower)

    def test_matrices_are_read_only(self, example):
        with pytest.raises(ValueError):
            example.u_leader[0, 0] = 1.0


class TestBestResponse:
    @pytest.mark.parametrize("s_leader, expected", [(9, {4}), (4, {5})])
    def test_example_rows(self, example, s_leader, expected):
        # one-based in the parametrisation, matching the printed tables
        row = example.u_follower[s_leader - 1]
        scan = {t + 1 for t in range(len(row)) if all(row[t] >= v for v in row)}
        assert scan == expected
        assert {t + 1 for t in follower_br_pure(example, s_leader - 1)} == expected

    def test_constant_row_gives_everything(self):
        g = BimatrixGame(np.zeros((2, 3)), [[0.3, 0.3, 0.3], [0.1, 0.2, 0.0]])
        assert follower_br_pure(g, 0) == (0, 1, 2)

    def test_out_of_range(self, example):
        with pytest.raises(ActionIndexError):
            follower_br_pure(example, 10)

    def test_sat_pure_example(self, example):
        assert follower_br_sat_pure(example, 0.9, 4) == (0, 1, 2)

    @pytest.mark.parametrize("th", [-1.0, 2.0])
    def test_sat_pure_degenerate_thresholds(self, example, th):
        for s in range(example.n_leader):
            assert follower_br_sat_pure(example, th, s) == tuple(range(7))

    def test_weak_inequality(self):
        g = BimatrixGame(np.zeros((1, 2)), [[0.5, 0.4]])
        assert follower_br_sat_pure(g, 0.5, 0) == (0,)


class TestSatisfactionProbability:
    def test_uniform_column_one(self, example):
        column = example.u_follower[:, 0]
        expected = sum(1 for v in column if v >= 0.9) / 10
        assert expected == 0.1
        assert satisfaction_probability(example, 0.9, np.full(10, 0.1), 0) == pytest.approx(expected)

    def test_point_mass_on_satisfying_row(self, example):
        pi = np.zeros(10)
        pi[4] = 1.0
        assert satisfaction_probability(example, 0.9, pi, 0) == 1.0

    def test_unreachable_threshold(self, example):
        for t in range(7):
            assert satisfaction_probability(example, 1.5, np.full(10, 0.1), t) == 0.0

    def test_invalid_strategy(self, example):
        with pytest.raises(InvalidStrategyError):
            satisfaction_probability(example, 0.5, np.full(10, 0.2), 0)
        with pytest.raises(InvalidStrategyError):
            satisfaction_probability(example, 0.5, np.ones(3) / 3, 0)

    def test_sat_mixed_uniform_brute_force(self, example):
        probs = [sum(0.1 for s in range(10) if example.u_follower[s, t] >= 0.9) for t in range(7)]
        best = max(probs)
        expected = tuple(t for t, p in enumerate(probs) if math.isclose(p, best))
        assert follower_br_sat_mixed(example, 0.9, np.full(10, 0.1)) == expected

    def test_sat_mixed_unreachable_threshold(self, example):
        assert follower_br_sat_mixed(example, 1.5, np.full(10, 0.1)) == tuple(range(7))

    def test_sat_mixed_point_mass_matches_pure(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            g = random_game(rng, 5, 4)
            for th in np.linspace(0, 1, 11):
                for s in range(5):
                    e = np.zeros(5)
                    e[s] = 1.0
                    assert follower_br_sat_mixed(g, th, e) == follower_br_sat_pure(g, th, s)


unit = st.floats(0.0, 1.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(
    uf=arrays(float, (4, 3), elements=unit),
    w1=arrays(float, 4, elements=st.floats(0.01, 1.0)),
    w2=arrays(float, 4, elements=st.floats(0.01, 1.0)),
    lam=unit,
    th=unit,
)
def test_satisfaction_probability_is_affine(uf, w1, w2, lam, th):
    g = BimatrixGame(np.zeros((4, 3)), uf)
    p1, p2 = w1 / w1.sum(), w2 / w2.sum()
    mix = lam * p1 + (1 - lam) * p2
    mix = mix / mix.sum()
    for t in range(3):
        lhs = satisfaction_probability(g, th, mix, t)
        rhs = lam * satisfaction_probability(g, th, p1, t) + (1 - lam) * satisfaction_probability(g, th, p2, t)
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestExpectedUtilities:
    def test_example_stackelberg_mixture(self, example):
        pi = np.zeros(10)
        pi[1], pi[2] = 0.8158, 0.1842
        lu, fu = expected_utilities(example, pi, 1)
        assert lu == pytest.approx(0.9681, abs=1e-3)
        assert fu == pytest.approx(0.7856, abs=1e-3)

    def test_point_mass(self, example):
        pi = np.zeros(10)
        pi[3] = 1.0
        assert expected_utilities(example, pi, 4) == (example.u_leader[3, 4], example.u_follower[3, 4])

    def test_symmetric_column(self):
        g = BimatrixGame([[0.0], [1.0]], [[0.0], [0.0]])
        assert expected_utilities(g, [0.5, 0.5], 0)[0] == 0.5

    def test_follower_br_mixed_at_stackelberg_point(self, example):
        pi = np.zeros(10)
        pi[1], pi[2] = 0.8, 0.2
        assert 1 in follower_br_mixed(example, pi)


class TestPureNE:
    def test_example(self, example):
        assert [(s + 1, t + 1) for s, t in find_pure_ne(example)] == [(4, 5), (9, 4)]

    def test_single_profile(self):
        assert find_pure_ne(BimatrixGame([[0.5]], [[0.5]])) == [(0, 0)]

    def test_matching_pennies(self):
        ul = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert find_pure_ne(BimatrixGame(ul, 1.0 - ul)) == []

    def test_ne_pairs_are_mutual_best_responses(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            g = random_game(rng, 4, 4)
            for s, t in find_pure_ne(g):
                assert t in follower_br_pure(g, s)
                assert g.u_leader[s, t] == g.u_leader[:, t].max()


def test_max_pairs_contained_in_sat_pairs():
    rng = np.random.default_rng(2)
    for _ in range(50):
        g = random_game(rng, 6, 6)
        for th in np.linspace(-0.1, 1.1, 25):
            for s in range(6):
                assert set(follower_br_pure(g, s)) <= set(follower_br_sat_pure(g, th, s))
