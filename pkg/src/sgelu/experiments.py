"""Classification and auto-encoder training protocols with five-seed medians.

Protocol: 51,200 training samples (400 batches of 128) and 6,400 test
samples (50 batches), MSE loss, Adam, 50 epochs. SGELU hidden layers get
per-batch min-max normalization after the activation; GELU and LiSHT get
batch normalization before it. The output layer is sigmoid with no
normalizer. Metrics are recorded after every epoch; suites report the
across-seed median per epoch.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import activations as act
from . import network as nn
from .data import batches, load_mnist, take_subset
from .errors import ConfigurationError, NumericalDivergenceError
from .mathcore import Rng

DEFAULT_SEEDS = (1, 2, 3, 4, 5)
SUITE_ACTIVATIONS = ("sgelu", "gelu", "lisht")


@dataclass
class ExperimentConfig:
    task: str  # "classify" | "autoencode"
    activation: act.ActivationKind
    hidden_layers: int = 8
    width: int = 128
    epochs: int = 50
    batch_size: int = 128
    seeds: tuple = DEFAULT_SEEDS
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    input_dim: int = 784
    n_classes: int = 10
    train_samples: int = 51200
    test_samples: int = 6400
    dropout_p: float = 0.0
    data_dir: str | None = None

    def __post_init__(self):
        if self.task not in ("classify", "autoencode"):
            raise ConfigurationError(f"unknown task '{self.task}'")
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if not self.seeds:
            raise ConfigurationError("need at least one seed")

    @property
    def normalizer(self):
        return normalizer_policy(self.activation)


def normalizer_policy(activation):
    """SGELU pairs with post-activation min-max; everything else with BN."""
    return "minmax" if activation.name == "sgelu" else "batchnorm"


@dataclass
class MetricsRecord:
    activation: str
    seed: int
    epoch: int
    train_loss: float
    test_loss: float
    train_acc: float | None = None
    test_acc: float | None = None
    diverged: bool = False


def build_network(cfg, rng):
    """Assemble the task's architecture under the normalizer policy."""
    norm = cfg.normalizer
    if cfg.task == "classify":
        specs = [
            nn.LayerSpec(cfg.width, cfg.activation, norm, cfg.dropout_p)
            for _ in range(cfg.hidden_layers)
        ]
        specs.append(nn.LayerSpec(cfg.n_classes, act.sigmoid()))
    else:
        specs = [nn.LayerSpec(cfg.width, cfg.activation, norm, cfg.dropout_p)]
        specs.append(nn.LayerSpec(cfg.input_dim, act.sigmoid()))
    return nn.init_network(cfg.input_dim, specs, rng)


def _eval_in_batches(net, ds, batch_size, task):
    """Batch-mean loss/accuracy; min-max uses each batch's own statistics."""
    losses, accs = [], []
    for x, y in batches(ds, batch_size, shuffle=False):
        loss, acc = nn.evaluate(net, x, y, task)
        losses.append(loss)
        if acc is not None:
            accs.append(acc)
    return float(np.mean(losses)), (float(np.mean(accs)) if accs else None)


def train_one_run(cfg, seed, train_ds, test_ds):
    """Train for cfg.epochs with one seed; returns (records, network).

    A diverged run (non-finite activation or loss) stops early and emits a
    NaN sentinel record so suite medians stay computable.
    """
    rng = Rng(seed)
    net = build_network(cfg, rng)
    ps = nn.params(net)
    state = nn.AdamState.for_params(
        ps, lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.adam_eps
    )
    records = []
    name = str(cfg.activation)
    for epoch in range(1, cfg.epochs + 1):
        try:
            for x, y in batches(train_ds, cfg.batch_size, rng=rng, shuffle=True):
                y_pred, trace = nn.forward(net, x, train=True, rng=rng)
                loss, dloss = nn.mse_loss(y_pred, y)
                if not math.isfinite(loss):
                    raise NumericalDivergenceError("non-finite training loss")
                grads = nn.backward(net, trace, dloss)
                nn.adam_step(ps, grads, state)
            train_loss, train_acc = _eval_in_batches(net, train_ds, cfg.batch_size, cfg.task)
            test_loss, test_acc = _eval_in_batches(net, test_ds, cfg.batch_size, cfg.task)
        except NumericalDivergenceError:
            records.append(MetricsRecord(name, seed, epoch, math.nan, math.nan,
                                         diverged=True))
            break
        records.append(
            MetricsRecord(name, seed, epoch, train_loss, test_loss, train_acc, test_acc)
        )
    return records, net


def _load_data(cfg, train_ds, test_ds):
    if train_ds is None or test_ds is None:
        if cfg.data_dir is None:
            raise ConfigurationError("no datasets supplied and no data_dir configured")
        train_full, test_full = load_mnist(cfg.data_dir)
        if cfg.task == "autoencode":
            train_full.labels = None
            test_full.labels = None
        train_ds = take_subset(train_full, cfg.train_samples)
        test_ds = take_subset(test_full, cfg.test_samples)
    return train_ds, test_ds


def run_classification(cfg, train_ds=None, test_ds=None):
    """All-seed classification runs; returns (records, {seed: network})."""
    if cfg.task != "classify":
        raise ConfigurationError("run_classification needs a classify config")
    return _run_all_seeds(cfg, train_ds, test_ds)


def run_autoencoder(cfg, train_ds=None, test_ds=None):
    """All-seed reconstruction runs; the input is its own target."""
    if cfg.task != "autoencode":
        raise ConfigurationError("run_autoencoder needs an autoencode config")
    return _run_all_seeds(cfg, train_ds, test_ds)


def _run_all_seeds(cfg, train_ds, test_ds):
    train_ds, test_ds = _load_data(cfg, train_ds, test_ds)
    # layer sizes follow the data, so small synthetic sets train as-is
    cfg = replace(cfg, input_dim=train_ds.images.shape[1],
                  n_classes=(train_ds.labels.shape[1]
                             if train_ds.labels is not None else cfg.n_classes))
    records, nets = [], {}
    for seed in cfg.seeds:
        run_records, net = train_one_run(cfg, seed, train_ds, test_ds)
        records.extend(run_records)
        nets[seed] = net
    return records, nets


def run_suite(base_cfg, activations=None, train_ds=None, test_ds=None, alpha=0.1):
    """Run SGELU/GELU/LiSHT under one shared protocol.

    Returns (records, medians, nets) where medians is a list of dicts, one
    per (activation, epoch), with across-seed medians of each metric.
    """
    names = activations or SUITE_ACTIVATIONS
    train_ds, test_ds = _load_data(base_cfg, train_ds, test_ds)
    records, nets = [], {}
    for name in names:
        cfg = replace(base_cfg, activation=act.by_name(name, alpha if name == "sgelu" else None))
        run_records, run_nets = _run_all_seeds(cfg, train_ds, test_ds)
        records.extend(run_records)
        nets[name] = run_nets
    return records, median_curves(records), nets


def median_curves(records):
    """Across-seed medians per (activation, epoch), over surviving runs."""
    keys = []
    grouped = {}
    for r in records:
        key = (r.activation, r.epoch)
        if key not in grouped:
            grouped[key] = []
            keys.append(key)
        grouped[key].append(r)
    out = []
    for activation, epoch in keys:
        rs = grouped[(activation, epoch)]
        alive = [r for r in rs if not r.diverged]
        def med(vals):
            vals = [v for v in vals if v is not None and math.isfinite(v)]
            return float(np.median(vals)) if vals else None
        out.append({
            "activation": activation,
            "epoch": epoch,
            "train_loss": med([r.train_loss for r in alive]),
            "test_loss": med([r.test_loss for r in alive]),
            "train_acc": med([r.train_acc for r in alive]),
            "test_acc": med([r.test_acc for r in alive]),
            "n_runs": len(alive),
            "n_diverged": len(rs) - len(alive),
        })
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.10g}"


def write_metrics_csv(path, records):
    """Per-run CSV; accuracy columns are empty for the auto-encoder."""
    with open(path, "w") as fh:
        fh.write("activation,seed,epoch,train_loss,test_loss,train_acc,test_acc\n")
        for r in records:
            fh.write(
                f"{r.activation},{r.seed},{r.epoch},{_fmt(r.train_loss)},"
                f"{_fmt(r.test_loss)},{_fmt(r.train_acc)},{_fmt(r.test_acc)}\n"
            )


def write_median_csv(path, medians):
    with open(path, "w") as fh:
        fh.write("activation,epoch,train_loss,test_loss,train_acc,test_acc,"
                 "n_runs,n_diverged\n")
        for m in medians:
            fh.write(
                f"{m['activation']},{m['epoch']},{_fmt(m['train_loss'])},"
                f"{_fmt(m['test_loss'])},{_fmt(m['train_acc'])},"
                f"{_fmt(m['test_acc'])},{m['n_runs']},{m['n_diverged']}\n"
            )
