import math

import pytest

from sgelu import activations as act
from sgelu.data import Dataset
from sgelu.errors import ConfigurationError
from sgelu.experiments import (
    ExperimentConfig,
    build_network,
    median_curves,
    MetricsRecord,
    normalizer_policy,
    run_autoencoder,
    run_classification,
    run_suite,
    train_one_run,
)
from sgelu.mathcore import Rng
from sgelu.network import evaluate

from conftest import make_blob_dataset

DIM = 16


def blob_config(task="classify", activation=None, **overrides):
    base = dict(
        task=task,
        activation=activation or act.sgelu(0.1),
        hidden_layers=2,
        width=24,
        epochs=3,
        batch_size=32,
        seeds=(1,),
        input_dim=DIM,
        train_samples=384,
        test_samples=384,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def blobs():
    full = make_blob_dataset(160, 3, DIM, seed=0)
    train = Dataset(full.images[:384], full.labels[:384])
    test = Dataset(full.images[384:], full.labels[384:])
    return train, test


class TestConfig:
    def test_normalizer_policy(self):
        assert normalizer_policy(act.sgelu(0.1)) == "minmax"
        assert normalizer_policy(act.gelu()) == "batchnorm"
        assert normalizer_policy(act.lisht()) == "batchnorm"

    def test_rejects_bad_task(self):
        with pytest.raises(ConfigurationError):
            blob_config(task="segment")

    def test_rejects_empty_seeds(self):
        with pytest.raises(ConfigurationError):
            blob_config(seeds=())

    def test_rejects_zero_epochs(self):
        with pytest.raises(ConfigurationError):
            blob_config(epochs=0)

    def test_output_layer_never_normalized(self):
        net = build_network(blob_config(), Rng(1))
        assert net.layers[-1].normalizer is None
        assert net.layers[-1].activation.name == "sigmoid"

    def test_sgelu_network_has_no_batchnorm(self):
        net = build_network(blob_config(activation=act.sgelu(0.1)), Rng(1))
        kinds = {type(l.normalizer).__name__ for l in net.layers[:-1]}
        assert kinds == {"MinMaxPost"}

    def test_gelu_network_has_no_minmax(self):
        net = build_network(blob_config(activation=act.gelu()), Rng(1))
        kinds = {type(l.normalizer).__name__ for l in net.layers[:-1]}
        assert kinds == {"BatchNormPre"}

    def test_autoencoder_two_layers(self):
        net = build_network(blob_config(task="autoencode"), Rng(1))
        assert len(net.layers) == 2
        assert net.layers[-1].fan_out == DIM


class TestTrainOneRun:
    def test_record_per_epoch(self, blobs):
        records, _ = train_one_run(blob_config(epochs=3), 1, *blobs)
        assert [r.epoch for r in records] == [1, 2, 3]
        assert all(math.isfinite(r.train_loss) for r in records)

    def test_deterministic_per_seed(self, blobs):
        a, _ = train_one_run(blob_config(), 7, *blobs)
        b, _ = train_one_run(blob_config(), 7, *blobs)
        assert [(r.train_loss, r.test_loss, r.test_acc) for r in a] == \
               [(r.train_loss, r.test_loss, r.test_acc) for r in b]

    def test_training_reduces_loss(self, blobs):
        for name in ("sgelu", "gelu", "lisht"):
            cfg = blob_config(activation=act.by_name(name), epochs=5)
            records, _ = train_one_run(cfg, 1, *blobs)
            assert records[4].train_loss < records[0].train_loss

    def test_learns_separable_blobs(self, blobs):
        cfg = blob_config(epochs=12, lr=3e-3)
        records, _ = train_one_run(cfg, 1, *blobs)
        assert records[-1].test_acc >= 0.9

    def test_autoencoder_improves_over_untrained(self, blobs):
        train, test = blobs
        train = Dataset(train.images)
        test = Dataset(test.images)
        cfg = blob_config(task="autoencode", epochs=3, lr=3e-3)
        untrained = build_network(cfg, Rng(1))
        loss0, _ = evaluate(untrained, test.images, test.images, "reconstruct")
        records, _ = train_one_run(cfg, 1, train, test)
        assert records[-1].test_loss < loss0
        assert all(r.train_acc is None and r.test_acc is None for r in records)


class TestRunners:
    def test_run_classification_multi_seed(self, blobs):
        cfg = blob_config(epochs=2, seeds=(1, 2, 3))
        records, nets = run_classification(cfg, *blobs)
        assert len(records) == 6
        assert set(nets) == {1, 2, 3}

    def test_task_mismatch_rejected(self, blobs):
        with pytest.raises(ConfigurationError):
            run_autoencoder(blob_config(task="classify"), *blobs)
        with pytest.raises(ConfigurationError):
            run_classification(blob_config(task="autoencode"), *blobs)

    def test_suite_covers_three_activations(self, blobs):
        cfg = blob_config(epochs=2, seeds=(1, 2))
        records, medians, nets = run_suite(cfg, train_ds=blobs[0], test_ds=blobs[1])
        assert {r.activation.split("(")[0] for r in records} == {"sgelu", "gelu", "lisht"}
        assert len(medians) == 6  # 3 activations x 2 epochs
        assert all(m["n_runs"] == 2 for m in medians)


class TestMedianCurves:
    def rec(self, seed, epoch, loss, diverged=False):
        return MetricsRecord("a", seed, epoch, loss, loss, diverged=diverged)

    def test_identical_runs_median_equals_single(self):
        records = [self.rec(s, 1, 0.25) for s in range(5)]
        assert median_curves(records)[0]["train_loss"] == 0.25

    def test_middle_order_statistic(self):
        records = [self.rec(s, 1, v) for s, v in enumerate([5.0, 1.0, 3.0, 2.0, 4.0])]
        assert median_curves(records)[0]["train_loss"] == 3.0

    def test_diverged_runs_excluded_and_flagged(self):
        records = [self.rec(1, 1, 2.0), self.rec(2, 1, 4.0),
                   self.rec(3, 1, math.nan, diverged=True)]
        m = median_curves(records)[0]
        assert m["train_loss"] == 3.0
        assert m["n_runs"] == 2 and m["n_diverged"] == 1
