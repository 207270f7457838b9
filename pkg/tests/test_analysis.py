import numpy as np
import pytest

from sgelu import activations as act
from sgelu import network as nn
from sgelu.analysis import (
    gradient_check,
    ks_normal_test,
    weight_histogram,
    weight_update_demo,
)
from sgelu.analysis import test_all_layers as ks_all_layers
from sgelu.errors import ConfigurationError
from sgelu.mathcore import Rng, std_normal_cdf

from oracles import ks_statistic_bruteforce


class TestKsNormalTest:
    def test_seeded_normal_samples_pass(self):
        # simulation across seeds: the statistic stays well under 2/sqrt(n)
        # and the 0.05 test passes the vast majority of the time
        n = 10_000
        passes = 0
        for seed in range(100):
            r = ks_normal_test(Rng(seed).normal(n))
            assert r.statistic < 2.0 / np.sqrt(n)
            passes += r.passes
        assert passes >= 85

    def test_uniform_samples_fail(self):
        r = Rng(404)
        u = np.array([r.uniform() for _ in range(10_000)])
        assert not ks_normal_test(u).passes

    def test_two_point_distribution_fails(self):
        samples = np.tile([-1.0, 1.0], 500)
        assert not ks_normal_test(samples).passes

    def test_matches_bruteforce_sup_distance(self):
        for seed in (1, 2, 3):
            x = Rng(seed).normal(200)
            got = ks_normal_test(x).statistic
            ref = ks_statistic_bruteforce(x, lambda v: float(std_normal_cdf(v)))
            assert abs(got - ref) <= 1e-12

    def test_scale_shift_invariance(self):
        x = Rng(9).normal(500)
        base = ks_normal_test(x).statistic
        for a, c in ((3.5, -2.0), (-0.1, 7.0)):
            assert abs(ks_normal_test(a * x + c).statistic - base) <= 1e-12

    def test_result_invariants(self):
        r = ks_normal_test(Rng(1).normal(1000))
        assert 0.0 <= r.statistic <= 1.0
        assert r.critical_value > 0.0
        assert r.passes == (r.statistic < r.critical_value)

    def test_degenerate_sample_rejected(self):
        with pytest.raises(ConfigurationError):
            ks_normal_test(np.full(100, 3.0))
        with pytest.raises(ConfigurationError):
            ks_normal_test(np.arange(4.0))


class TestAllLayers:
    def test_fresh_glorot_network_passes_everywhere(self):
        specs = [nn.LayerSpec(64, act.sgelu(0.1), "minmax") for _ in range(8)]
        specs.append(nn.LayerSpec(10, act.sigmoid()))
        net = nn.init_network(128, specs, Rng(2))
        results = ks_all_layers(net)
        assert len(results) == 8
        assert all(r.passes for _, r in results)

    def test_output_layer_excluded(self):
        specs = [nn.LayerSpec(32, act.gelu(), "batchnorm"), nn.LayerSpec(5, act.sigmoid())]
        net = nn.init_network(16, specs, Rng(3))
        assert [i for i, _ in ks_all_layers(net)] == [0]


class TestWeightHistogram:
    def test_constant_weights_single_bin(self):
        net = nn.Network(input_dim=4, layers=[
            nn.DenseLayer(np.full((4, 4), 0.5), np.zeros(4), act.relu())
        ])
        counts, edges = weight_histogram(net, 0, 10)
        assert np.count_nonzero(counts) == 1 and counts.sum() == 16

    def test_counts_conserved(self):
        net = nn.init_network(12, [nn.LayerSpec(7, act.relu())], Rng(4))
        counts, _ = weight_histogram(net, 0, 13)
        assert counts.sum() == 7 * 12

    def test_seeded_normal_weights_low_skew(self):
        w = Rng(5).normal(5000).reshape(50, 100)
        net = nn.Network(input_dim=100, layers=[
            nn.DenseLayer(w, np.zeros(50), act.relu())
        ])
        counts, edges = weight_histogram(net, 0, 50)
        flat = w.ravel()
        skew = np.mean((flat - flat.mean()) ** 3) / flat.std() ** 3
        assert abs(skew) < 0.1

    def test_bad_index(self):
        net = nn.init_network(4, [nn.LayerSpec(2, act.relu())], Rng(6))
        with pytest.raises(ConfigurationError):
            weight_histogram(net, 5, 10)


class TestGradientCheck:
    def test_linear_network_near_exact(self):
        net = nn.init_network(4, [nn.LayerSpec(3, act.linear())], Rng(7))
        r = Rng(8)
        x = r.normal(20).reshape(5, 4)
        y = r.normal(15).reshape(5, 3)
        err, _ = gradient_check(net, x, y, h=1e-4)
        assert err <= 1e-9

    def test_sgelu_minmax_network(self):
        r = Rng(9)
        specs = [nn.LayerSpec(8, act.sgelu(0.1), "minmax"), nn.LayerSpec(3, act.sigmoid())]
        net = nn.init_network(4, specs, r)
        x = r.normal(16 * 4).reshape(16, 4)
        y = r.normal(48, 0.5, 0.1).reshape(16, 3)
        err, _ = gradient_check(net, x, y, h=1e-5)
        assert err <= 1e-4

    def test_corrupted_gradient_located(self):
        r = Rng(10)
        net = nn.init_network(4, [nn.LayerSpec(3, act.gelu()),
                                  nn.LayerSpec(2, act.linear())], Rng(10))
        x = r.normal(32).reshape(8, 4)
        y = r.normal(16).reshape(8, 2)
        err, loc = gradient_check(net, x, y, corrupt=(0, 5, 2.0))
        assert err > 1e-2
        assert loc == "layer0.W[1,1]"  # flat index 5 in a (3, 4) matrix

    def test_running_stats_restored(self):
        r = Rng(11)
        specs = [nn.LayerSpec(4, act.gelu(), "batchnorm"), nn.LayerSpec(2, act.linear())]
        net = nn.init_network(3, specs, r)
        before = net.layers[0].normalizer.running_mean.copy()
        gradient_check(net, r.normal(24).reshape(8, 3), r.normal(16).reshape(8, 2))
        assert np.array_equal(net.layers[0].normalizer.running_mean, before)


class TestWeightUpdateDemo:
    def test_relu_never_updates_from_negative_z(self):
        rows = weight_update_demo(act.relu(), -2.0, 1.0, 1.0, 0.5, 50)
        assert all(r[1] == -2.0 for r in rows)

    def test_gelu_stalls_without_improving(self):
        rows = weight_update_demo(act.gelu(), -4.0, 1.0, 1.0, 1.0, 100)
        errs = [r[4] for r in rows]
        ws = [r[1] for r in rows]
        assert abs(ws[-1] - ws[-2]) < 1e-3
        assert errs[0] - errs[-1] < 1e-3  # no meaningful error reduction

    def test_sgelu_error_strictly_decreases(self):
        rows = weight_update_demo(act.sgelu(0.1), -4.0, 1.0, 1.0, 1.0, 100)
        errs = [r[4] for r in rows]
        assert all(b < a for a, b in zip(errs, errs[1:]))

    def test_mirrored_start_gives_identical_error_trajectory(self):
        neg = weight_update_demo(act.sgelu(0.1), -4.0, 1.0, 1.0, 1.0, 100)
        pos = weight_update_demo(act.sgelu(0.1), 4.0, 1.0, 1.0, 1.0, 100)
        assert [r[4] for r in neg] == [r[4] for r in pos]
