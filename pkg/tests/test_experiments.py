from dataclasses import replace

import pytest

from carequeue.costing import run_many
from carequeue.experiments import (
    SweepSpec,
    assignment_sweep,
    locate_crossing,
    priority_sweep,
    priority_threshold,
    tradeoff_curve,
)
from carequeue.model import PolicySpec, validate_params
from conftest import PAPER_THETA


def _params(**kw):
    base = dict(alpha=0.25, beta=0.8, gamma=0.2, theta=PAPER_THETA,
                T=700, warmup=100)
    base.update(kw)
    return validate_params(**base)


class TestSweepSpec:
    def test_unknown_parameter_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec("delta", (0.1,), _params())

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec("alpha", (), _params())

    def test_out_of_range_values_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec("alpha", (0.1, 1.7), _params())
        with pytest.raises(ValueError):
            SweepSpec("beta", (0.0,), _params())

    def test_too_few_replications_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec("alpha", (0.1,), _params(), n_reps=1)

    def test_params_at_substitutes_one_field(self):
        spec = SweepSpec("gamma", (0.3,), _params())
        assert spec.params_at(0.3).gamma == 0.3
        assert spec.params_at(0.3).alpha == spec.base.alpha


class TestLocateCrossing:
    def test_no_sign_change(self):
        assert locate_crossing([0, 1, 2], [-1.0, -2.0, -0.5]) is None

    def test_interpolated_crossing(self):
        hit = locate_crossing([0.0, 1.0], [-1.0, 3.0])
        assert hit is not None
        assert hit[0] == pytest.approx(0.25)
        assert hit[1] == (0.0, 1.0)

    def test_exact_zero_counts(self):
        hit = locate_crossing([0.0, 0.5, 1.0], [0.0, -1.0, -2.0])
        assert hit[0] == 0.0

    def test_descending_crossing_found(self):
        hit = locate_crossing([0.0, 1.0], [2.0, -2.0])
        assert hit[0] == pytest.approx(0.5)


class TestPriorityThreshold:
    def test_curves_and_crossing_structure(self):
        res = priority_threshold(_params(), [0.0, 0.5, 1.0], n_reps=4, base_seed=5)
        assert len(res.points) == 3
        for pt in res.points:
            assert pt.se_short > 0 and pt.se_long > 0
        # flat cost must favor shortest-first, linear cost longest-first
        assert res.points[0].j_short < res.points[0].j_long
        assert res.points[-1].j_short > res.points[-1].j_long
        assert res.a_hat is not None and 0.0 < res.a_hat < 1.0

    def test_deterministic(self):
        a = priority_threshold(_params(), [0.0, 1.0], n_reps=3, base_seed=9)
        b = priority_threshold(_params(), [0.0, 1.0], n_reps=3, base_seed=9)
        assert a == b

    def test_no_arrivals_reports_no_crossing(self):
        res = priority_threshold(_params(alpha=0.0), [0.0, 1.0], n_reps=2, base_seed=1)
        assert res.a_hat is None
        assert all(pt.j_short == 0 == pt.j_long for pt in res.points)


class TestPrioritySweep:
    def test_requires_single_nurse(self):
        with pytest.raises(ValueError):
            priority_sweep(SweepSpec("alpha", (0.2,), _params(I=2)))

    def test_requires_flat_or_linear_exponent(self):
        with pytest.raises(ValueError):
            priority_sweep(SweepSpec("alpha", (0.2,), _params(a=0.5)))

    def test_row_structure_and_flat_cost_sign(self):
        spec = SweepSpec("alpha", (0.15, 0.3), _params(a=0.0), n_reps=4, base_seed=11)
        rows = priority_sweep(spec)
        assert [r.value for r in rows] == [0.15, 0.3]
        for row in rows:
            assert set(row.stats) == {"shortest_first", "longest_first"}
            assert row.improvement_pct["longest_first"] is None
            assert row.improvement_pct["shortest_first"] > 0
            assert not row.flagged

    def test_zero_arrival_row_is_flagged(self):
        spec = SweepSpec("alpha", (0.0,), _params(a=0.0), n_reps=2, base_seed=3)
        row = priority_sweep(spec)[0]
        assert row.flagged
        assert row.improvement_pct["shortest_first"] is None


class TestAssignmentSweep:
    def test_requires_multiple_nurses(self):
        with pytest.raises(ValueError):
            assignment_sweep(SweepSpec("alpha", (0.3,), _params(I=1)))

    def test_compares_heuristics_to_random(self):
        spec = SweepSpec("alpha", (0.4,), _params(I=2, a=0.0, T=900),
                         n_reps=5, base_seed=21)
        row = assignment_sweep(spec)[0]
        assert set(row.stats) == {"h1", "h2", "random"}
        assert row.baseline == "random"
        assert row.improvement_pct["random"] is None
        assert row.improvement_pct["h1"] is not None
        assert row.diff_vs_baseline["h1"][0] > 0

    def test_priority_rule_pairs_with_exponent(self):
        # a=1 pairs with longest-first; the sweep itself just has to run
        spec = SweepSpec("beta", (0.7,), _params(I=2, a=1.0), n_reps=3, base_seed=2)
        rows = assignment_sweep(spec)
        assert len(rows) == 1


class TestTradeoff:
    def test_grid_cross_product_and_determinism(self):
        base = _params(T=400, warmup=50)
        args = dict(alpha_grid=[0.1, 0.2], beta_grid=[0.8], gamma_grid=[0.2],
                    a_grid=[0.0, 1.0], n_reps=3, base_seed=8)
        rows = tradeoff_curve(base, **args)
        assert len(rows) == 2 * 1 * 1 * 2
        again = tradeoff_curve(base, **args)
        assert rows == again
        for r in rows:
            assert r.rule_chosen in ("shortest_first", "longest_first")
            assert r.avg_queue_hi <= r.avg_queue_all + 1e-12

    def test_flat_exponent_picks_the_smaller_queue(self):
        base = _params(T=900, warmup=100)
        rows = tradeoff_curve(base, [0.25], [0.8], [0.2], [0.0],
                              n_reps=4, base_seed=14)
        row = rows[0]
        short = run_many(replace(base, alpha=0.25),
                         PolicySpec("shortest_first", "random"), 4, 14)
        # chosen rule's mean flat cost can be no worse than shortest-first's
        short_mean = sum(s.total_cost for s in short) / 4
        assert row.avg_queue_all * short[0].periods_counted <= short_mean + 1e-9


class TestCommonRandomNumbers:
    def test_compared_policies_share_arrival_streams(self):
        params = _params(I=2)
        seeds = 4
        batches = [
            run_many(params, PolicySpec(pr, asg), seeds, 99)
            for pr, asg in (("shortest_first", "h1"),
                            ("longest_first", "h2"),
                            ("shortest_first", "random"))
        ]
        for k in range(seeds):
            hashes = {b[k].arrival_hash for b in batches}
            assert len(hashes) == 1
