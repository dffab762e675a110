import inspect
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from carequeue.model import RandomStreams, SystemState, validate_params
from carequeue.policies import (
    assign,
    future_cost_score,
    instant_cost_score,
    select_service,
)
from conftest import seed_patient


class TestSelectService:
    def test_shortest_takes_smallest_occupied_stage(self):
        assert select_service([0, 2, 0, 1, 0], "shortest_first") == 2

    def test_longest_takes_largest_occupied_stage(self):
        assert select_service([0, 2, 0, 1, 0], "longest_first") == 4

    def test_empty_queue_idles(self):
        assert select_service([0, 0, 0, 0, 0], "shortest_first") == 0
        assert select_service([0, 0, 0, 0, 0], "longest_first") == 0

    def test_unknown_rule_rejected(self):
        with pytest.raises(ValueError):
            select_service([1], "sickest_first")

    @given(st.lists(st.integers(0, 5), min_size=1, max_size=8),
           st.integers(2, 9))
    @settings(max_examples=60)
    def test_invariant_under_count_scaling(self, row, k):
        for rule in ("shortest_first", "longest_first"):
            assert select_service(row, rule) == select_service([k * n for n in row], rule)


def _state_with(needy_rows, content_rows):
    I, R = len(needy_rows), len(needy_rows[0])
    state = SystemState(I, R)
    for i, row in enumerate(needy_rows):
        for r, n in enumerate(row):
            for k in range(n):
                seed_patient(state, i, r + 1, pid=1000 * i + 10 * r + k)
    for i, row in enumerate(content_rows):
        state.content[i] = list(row)
    return state


class TestScores:
    def test_instant_cost_linear_exponent(self):
        state = _state_with([[1, 1, 0, 0, 0]], [[0, 0, 0, 0]])
        assert instant_cost_score(state, 0, 1.0) == pytest.approx(3.0)

    def test_instant_cost_empty_nurse(self):
        state = _state_with([[0, 0, 0, 0, 0]], [[0, 0, 0, 0]])
        assert instant_cost_score(state, 0, 1.0) == 0.0

    def test_instant_cost_flat_exponent_counts_heads(self):
        state = _state_with([[2, 0, 3, 0, 1]], [[0, 0, 0, 0]])
        assert instant_cost_score(state, 0, 0.0) == 6.0

    def test_future_cost_example(self):
        # one needy two-stage patient plus one content one-stage patient
        state = _state_with([[0, 1, 0, 0, 0]], [[1, 0, 0, 0]])
        assert future_cost_score(state, 0, 1.0) == pytest.approx(4.0)

    def test_future_cost_empty_nurse(self):
        state = _state_with([[0, 0, 0, 0, 0]], [[0, 0, 0, 0]])
        assert future_cost_score(state, 0, 1.0) == 0.0

    def test_future_cost_flat_exponent_counts_remaining_visits(self):
        state = _state_with([[1, 0, 2, 0, 0]], [[0, 1, 0, 0]])
        # remaining visits: 1*1 + 2*3 + 1*2 = 9
        assert future_cost_score(state, 0, 0.0) == pytest.approx(9.0)

    @given(stage=st.integers(1, 5), a=st.floats(0.0, 2.0))
    @settings(max_examples=60)
    def test_adding_one_needy_patient_is_additive(self, stage, a):
        state = _state_with([[1, 0, 2, 1, 0]], [[0, 1, 0, 2]])
        h1_before = instant_cost_score(state, 0, a)
        h2_before = future_cost_score(state, 0, a)
        seed_patient(state, 0, stage, pid=999)
        assert instant_cost_score(state, 0, a) - h1_before == pytest.approx(
            stage ** a, rel=1e-12)
        assert future_cost_score(state, 0, a) - h2_before == pytest.approx(
            math.fsum(r ** a for r in range(1, stage + 1)), rel=1e-12)


class TestAssign:
    def _params(self, I, a=0.0):
        return validate_params(0.2, 0.8, 0.1, [0.5, 0.5], I=I, a=a)

    def test_strict_argmin_wins(self):
        state = _state_with([[1, 1, 0, 0, 0], [1, 1, 1, 0, 0]],
                            [[0] * 4, [0] * 4])
        params = self._params(2, a=1.0)
        assert assign(state, params, "h1", u=0.9) == 0

    def test_single_nurse_shortcut(self):
        state = _state_with([[0, 0, 0, 0, 0]], [[0] * 4])
        assert assign(state, self._params(1), "h1", u=0.7) == 0

    def test_equal_scores_split_evenly(self):
        state = _state_with([[1, 0, 0, 0, 0], [1, 0, 0, 0, 0]],
                            [[0] * 4, [0] * 4])
        params = self._params(2)
        streams = RandomStreams(31415)
        counts = [0, 0]
        n = 10_000
        for t in range(1, n + 1):
            counts[assign(state, params, "h1", streams.u_tie_break(t))] += 1
        assert chisquare(counts).pvalue > 1e-4

    def test_random_rule_is_uniform_over_three_nurses(self):
        state = _state_with([[5, 0, 0, 0, 0], [0, 0, 0, 0, 0], [1, 1, 1, 1, 1]],
                            [[0] * 4] * 3)
        params = self._params(3)
        streams = RandomStreams(27182)
        counts = [0, 0, 0]
        n = 12_000
        for t in range(1, n + 1):
            counts[assign(state, params, "random", streams.u_tie_break(t))] += 1
        for c in counts:
            assert abs(c / n - 1 / 3) < 0.02

    def test_flat_exponent_reduces_h1_to_headcount_and_h2_to_visits(self):
        # nurse 0: 3 heads, 5 remaining visits; nurse 1: 2 heads, 6 visits
        state = _state_with([[2, 0, 1, 0, 0], [0, 1, 0, 1, 0]],
                            [[0] * 4, [0] * 4])
        params = self._params(2, a=0.0)
        assert assign(state, params, "h1", u=0.1) == 1
        assert assign(state, params, "h2", u=0.1) == 0

    def test_unknown_rule_rejected_even_for_single_nurse(self):
        state = _state_with([[1, 0, 0, 0, 0]], [[0] * 4])
        with pytest.raises(ValueError):
            assign(state, self._params(1), "h9", u=0.5)

    def test_rules_never_see_the_arriving_patient(self):
        # the scoring interface carries no arrival-type argument at all
        sig = inspect.signature(assign)
        assert "arrival" not in sig.parameters and "ztype" not in sig.parameters
