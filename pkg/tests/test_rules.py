import math

import numpy as np
import pytest

from kldro.datagen import draw_dataset, nominal_marginals, random_nominal_spec, substream
from kldro.graphs import build_layered, enumerate_paths, path_cost, shortest_path
from kldro.marginals import DataSet, Support
from kldro.radius import AmbiguitySpec
from kldro.rules import (
    JointEmpirical,
    calibrate_ambiguity,
    dro1_prescribe,
    dro2_prescribe,
    dro_predict,
    dro_prescribe,
    hoeffding_prescribe,
    split_alpha,
    truncate_dataset,
)

VALUE_R01 = 1.7128786314558240  # worked worst case: {1,2}, q=(1/2,1/2), r=0.1


def integer_dataset(samples, d):
    sup = Support.integers(d)
    return DataSet(tuple(sup for _ in samples), tuple(np.asarray(s, dtype=float) for s in samples))


def random_dataset(g, d, seed, t_lo=4, t_hi=12):
    rng = substream(seed, 0)
    spec = random_nominal_spec("shifted-binomial", g.num_arcs, d, rng)
    marg = nominal_marginals(spec, g)
    sizes = rng.integers(t_lo, t_hi + 1, size=g.num_arcs)
    return draw_dataset(marg, sizes, rng), marg


class TestSplitAlpha:
    def test_symmetric(self):
        assert split_alpha(0.05, [1, 1]).tolist() == [0.025, 0.025]

    def test_inverse_ratio(self):
        got = split_alpha(0.05, [1, 3])
        assert got[0] == pytest.approx(0.0375, rel=1e-14)
        assert got[1] == pytest.approx(0.0125, rel=1e-14)

    def test_single_action(self):
        assert split_alpha(0.07, [9]).tolist() == [0.07]

    def test_sums_exactly(self):
        rng = np.random.default_rng(30)
        for _ in range(300):
            m = int(rng.integers(1, 40))
            sizes = rng.integers(1, 300, size=m)
            alpha = float(rng.uniform(0.001, 0.9))
            got = split_alpha(alpha, sizes)
            assert math.fsum(got) == alpha
            assert np.all(got > 0)

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            split_alpha(1.0, [1, 2])


class TestDroRules:
    def test_zero_radius_predict_is_sample_average(self):
        g = build_layered(1, 2)
        data = integer_dataset([[1, 2], [2, 2], [1, 1], [1, 3]], d=3)
        spec = AmbiguitySpec.manual(np.zeros(4))
        for x in enumerate_paths(g):
            expected = path_cost(x, [data.empirical(a).mean() for a in range(4)])
            assert dro_predict(x, data, spec) == expected

    def test_saturated_radius_predicts_top_cost_per_arc(self):
        g = build_layered(2, 2)
        d = 4
        data = integer_dataset([[1, 2]] * g.num_arcs, d)
        spec = AmbiguitySpec.manual(np.full(g.num_arcs, 50.0))
        x = enumerate_paths(g)[0]
        assert dro_predict(x, data, spec) == pytest.approx((g.h + 1) * d, rel=1e-9)

    def test_two_arc_worked_values(self):
        g = build_layered(1, 1)
        data = integer_dataset([[1, 1], [1, 2]], d=2)
        spec = AmbiguitySpec.manual([math.log(2), 0.1])
        x = enumerate_paths(g)[0]
        assert dro_predict(x, data, spec) == pytest.approx(1.5 + VALUE_R01, abs=1e-9)

    def test_zero_radius_prescribe_equals_saa(self):
        g = build_layered(2, 3)
        data, _ = random_dataset(g, 6, seed=31)
        spec = AmbiguitySpec.manual(np.zeros(g.num_arcs))
        robust = dro_prescribe(data, spec, g)
        means = [data.empirical(a).mean() for a in range(g.num_arcs)]
        saa_decision, saa_value = shortest_path(g, means)
        assert robust.decision == saa_decision
        assert robust.predicted_loss == saa_value

    def test_prescribe_matches_enumeration(self):
        for h, w, seed in [(2, 2, 32), (3, 2, 33), (2, 3, 34), (4, 2, 35)]:
            g = build_layered(h, w)
            data, _ = random_dataset(g, 5, seed=seed)
            spec = calibrate_ambiguity(data, 0.05)
            pres = dro_prescribe(data, spec, g)
            values = [dro_predict(x, data, spec) for x in enumerate_paths(g)]
            best = int(np.argmin(values))
            assert pres.decision == enumerate_paths(g)[best]
            assert pres.predicted_loss == values[best]

    def test_worst_case_costs_dominate_means_and_stay_below_top(self):
        g = build_layered(3, 3)
        data, _ = random_dataset(g, 8, seed=36)
        spec = calibrate_ambiguity(data, 0.05)
        pres = dro_prescribe(data, spec, g)
        for a in range(g.num_arcs):
            assert pres.arc_costs[a] >= data.empirical(a).mean() - 1e-12
            assert pres.arc_costs[a] <= 8.0 + 1e-12

    def test_spec_size_mismatch_rejected(self):
        g = build_layered(1, 2)
        data = integer_dataset([[1], [2], [1], [2]], d=2)
        with pytest.raises(ValueError):
            dro_prescribe(data, AmbiguitySpec.manual([0.1]), g)


class TestHoeffding:
    def test_epsilon_inversion(self):
        # two arcs, T=(2,2), alpha = 2/e so each arc gets alpha_a = 1/e and
        # eps = (d-1) sqrt(ln(e)/4) = 0.5 on the d=2 grid
        g = build_layered(1, 1)
        data = integer_dataset([[1, 1], [1, 2]], d=2)
        pres = hoeffding_prescribe(data, 2 / math.e, 2, g)
        assert pres.arc_costs[0] == pytest.approx(1.0 + 0.5, rel=1e-12)
        assert pres.arc_costs[1] == pytest.approx(1.5 + 0.5, rel=1e-12)

    def test_clipping_at_top_cost(self):
        g = build_layered(1, 1)
        data = integer_dataset([[2, 2], [2, 2]], d=2)
        pres = hoeffding_prescribe(data, 0.05, 2, g)
        assert np.all(pres.arc_costs == 2.0)

    def test_costs_follow_the_tail_inversion_formula(self):
        g = build_layered(2, 2)
        data, _ = random_dataset(g, 5, seed=37)
        means = np.array([data.empirical(a).mean() for a in range(g.num_arcs)])
        sizes = data.sizes
        alphas = split_alpha(0.4, sizes)
        eps = (5 - 1) * np.sqrt(np.log(1.0 / alphas) / (2.0 * sizes))
        pres = hoeffding_prescribe(data, 0.4, 5, g)
        assert pres.arc_costs == pytest.approx(np.minimum(means + eps, 5.0), rel=1e-12)
        # slack vanishes as the per-action confidence approaches one
        assert (5 - 1) * math.sqrt(math.log(1.0 / (1 - 1e-12)) / 2.0) < 1e-5

    def test_manual_epsilon_override(self):
        g = build_layered(2, 2)
        data, _ = random_dataset(g, 5, seed=38)
        means = np.array([data.empirical(a).mean() for a in range(g.num_arcs)])
        pres = hoeffding_prescribe(data, 0.05, 5, g, epsilon=0.0)
        assert np.array_equal(pres.arc_costs, np.minimum(means, 5.0))
        pres1 = hoeffding_prescribe(data, 0.05, 5, g, epsilon=1.0)
        assert np.array_equal(pres1.arc_costs, np.minimum(means + 1.0, 5.0))

    def test_rejects_non_integer_grid(self):
        sup = Support(np.array([1.0, 3.0]))
        data = DataSet((sup, sup), (np.array([1.0]), np.array([3.0])))
        with pytest.raises(ValueError):
            hoeffding_prescribe(data, 0.05, 2, build_layered(1, 1))


class TestTruncate:
    def test_identity_when_equal(self):
        data = integer_dataset([[1, 2], [2, 1]], d=2)
        got = truncate_dataset(data)
        assert all(np.array_equal(a, b) for a, b in zip(got.samples, data.samples))

    def test_prefix_and_t_min(self):
        data = integer_dataset([[1, 2, 1], [2, 1, 1, 2, 2]], d=2)
        got = truncate_dataset(data)
        assert got.sizes.tolist() == [3, 3]
        assert got.samples[1].tolist() == [2.0, 1.0, 1.0]
        assert got.t_min == data.t_min


class TestJointEmpirical:
    def test_atoms_deduplicated(self):
        data = integer_dataset([[1, 1, 2, 1], [2, 2, 1, 2]], d=2)
        joint = JointEmpirical.from_dataset(data)
        assert joint.atoms.shape == (2, 2)
        assert sorted(joint.probs.tolist()) == [0.25, 0.75]
        assert math.fsum(joint.probs) == 1.0

    def test_alignment_by_sample_index(self):
        data = integer_dataset([[1, 2, 2], [1, 2, 1]], d=2)
        joint = JointEmpirical.from_dataset(data)
        rows = {tuple(r) for r in joint.atoms}
        assert rows == {(1.0, 1.0), (2.0, 2.0), (2.0, 1.0)}


def dro1_grid_oracle(data, r, d, g, step=1e-4):
    """Independent re-implementation: dense beta grid on the raw product."""
    joint = JointEmpirical.from_dataset(truncate_dataset(data))
    best_value, best_path = math.inf, None
    for x in enumerate_paths(g):
        s = joint.atoms @ x.incidence.astype(float)
        lo = d * float(np.sum(x.incidence))
        span = 2.0 * lo
        while True:
            betas = np.arange(lo, lo + span, step)
            obj = betas - math.exp(-r) * np.prod(
                np.maximum(betas[:, None] - s[None, :], 0.0) ** joint.probs[None, :], axis=1
            )
            k = int(np.argmin(obj))
            if k < len(betas) - 1:
                break
            span *= 2
        if obj[k] < best_value:
            best_value, best_path = float(obj[k]), x
    return best_value, best_path


class TestDro1:
    def test_zero_radius_matches_joint_sample_average(self):
        g = build_layered(2, 2)
        data, _ = random_dataset(g, 4, seed=39, t_lo=6, t_hi=6)
        pres = dro1_prescribe(data, 0.05, 4, g, radius_override=0.0)
        joint = JointEmpirical.from_dataset(data)
        values = [float(np.dot(joint.probs, joint.atoms @ x.incidence.astype(float)))
                  for x in enumerate_paths(g)]
        assert pres.predicted_loss == pytest.approx(min(values), rel=1e-12)

    def test_single_path_graph(self):
        g = build_layered(2, 1)
        data = integer_dataset([[1, 2], [2, 1], [1, 1]], d=2)
        pres = dro1_prescribe(data, 0.05, 2, g)
        assert pres.decision == enumerate_paths(g)[0]
        assert pres.predicted_loss >= path_cost(pres.decision, [1.5, 1.5, 1.0]) - 1e-9

    def test_matches_dense_beta_grid_oracle(self):
        g = build_layered(2, 2)
        data, _ = random_dataset(g, 4, seed=40, t_lo=5, t_hi=9)
        rng = np.random.default_rng(41)
        for r in (0.05, 0.3, 1.0):
            pres = dro1_prescribe(data, 0.05, 4, g, radius_override=r)
            oracle_value, oracle_path = dro1_grid_oracle(data, r, 4, g)
            assert pres.predicted_loss == pytest.approx(oracle_value, abs=2e-4)
            assert pres.decision == oracle_path

    def test_calibrated_radius_runs(self):
        g = build_layered(2, 2)
        data, _ = random_dataset(g, 4, seed=42)
        pres = dro1_prescribe(data, 0.05, 4, g)
        assert pres.arc_costs is None
        assert pres.predicted_loss <= 4 * (g.h + 1) + 1e-9

    def test_enumeration_cap_propagates(self):
        g = build_layered(10, 4)
        sup = Support.integers(2)
        data = DataSet(tuple(sup for _ in range(g.num_arcs)),
                       tuple(np.array([1.0]) for _ in range(g.num_arcs)))
        with pytest.raises(ValueError, match="cap"):
            dro1_prescribe(data, 0.05, 2, g, cap=100)

    def test_path_objective_convex_in_beta(self):
        g = build_layered(2, 2)
        data, _ = random_dataset(g, 4, seed=43)
        joint = JointEmpirical.from_dataset(truncate_dataset(data))
        x = enumerate_paths(g)[1]
        s = joint.atoms @ x.incidence.astype(float)
        lo = 4.0 * (g.h + 1)
        rng = np.random.default_rng(44)
        for _ in range(100):
            a, b = np.sort(rng.uniform(lo, lo + 30, 2))
            mid = 0.5 * (a + b)

            def f(beta):
                return beta - math.exp(-0.3) * float(np.prod((beta - s) ** joint.probs))

            assert f(mid) <= 0.5 * (f(a) + f(b)) + 1e-9


class TestDro2:
    def test_equal_sizes_identical_to_baseline(self):
        g = build_layered(2, 2)
        data, _ = random_dataset(g, 5, seed=45, t_lo=7, t_hi=7)
        base = dro_prescribe(data, calibrate_ambiguity(data, 0.05), g)
        trunc = dro2_prescribe(data, 0.05, g)
        assert base.decision == trunc.decision
        assert base.predicted_loss == trunc.predicted_loss

    def test_duplicated_prefix_costs_dominate(self):
        # duplicated samples keep the empirical pmf fixed while halving T,
        # so every truncated worst-case cost must dominate the baseline one
        g = build_layered(1, 1)
        data = integer_dataset([[1, 2, 1, 2], [1, 2]], d=2)
        base = dro_prescribe(data, calibrate_ambiguity(data, 0.05), g)
        trunc = dro2_prescribe(data, 0.05, g)
        assert np.all(trunc.arc_costs >= base.arc_costs - 1e-12)
        assert trunc.arc_costs[0] > base.arc_costs[0]

    def test_extreme_tail_changes_decision(self):
        # second branch looks cheap on the prefix but expensive later; the
        # truncated rule ignores the tail and flips the decision
        g = build_layered(1, 2)
        samples = [
            [2, 2, 2],            # source -> node1
            [1, 1, 1, 5, 5],      # source -> node2
            [2, 2, 2],            # node1 -> sink
            [1, 1, 1, 5, 5],      # node2 -> sink
        ]
        data = integer_dataset(samples, d=5)
        spec = AmbiguitySpec.manual(np.zeros(4))
        base = dro_prescribe(data, spec, g)
        trunc = dro2_prescribe(data, 0.05, g, radius_override=0.0)
        assert base.decision != trunc.decision
        assert trunc.decision.nodes == (0, 2, 3)
        assert base.decision.nodes == (0, 1, 3)
