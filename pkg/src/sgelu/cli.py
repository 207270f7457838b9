"""Command-line entry point.

Every subcommand writes CSV artifacts plus rendered PNG figures into
--out-dir, together with a run.json echoing the fully resolved
configuration. Existing artifacts are never overwritten without --force.

Exit codes: 0 success, 1 runtime error (including refusal to overwrite),
2 usage error, 3 missing data file.
"""

import argparse
import json
import os
import sys

from . import __version__
from . import activations as act
from . import analysis, experiments, plots
from . import network as nn
from .errors import ConfigurationError, DataFormatError
from .mathcore import Rng
from .normalization import time_normalizers, write_timing_csv

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_MISSING_DATA = 3


def _parse_seeds(text):
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise ConfigurationError(f"bad seed list '{text}'")


class Artifacts:
    """Collects output paths, enforcing the no-silent-overwrite rule."""

    def __init__(self, out_dir, force):
        self.out_dir = out_dir
        self.force = force
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name):
        p = os.path.join(self.out_dir, name)
        if os.path.exists(p) and not self.force:
            raise ConfigurationError(
                f"refusing to overwrite {p} (pass --force to allow)"
            )
        return p

    def write_run_json(self, args):
        resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
        resolved["version"] = __version__
        with open(self.path("run.json"), "w") as fh:
            json.dump(resolved, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def _data_dir(args):
    data_dir = args.data_dir or os.environ.get("SGELU_DATA_DIR")
    if not data_dir:
        raise FileNotFoundError(
            "no data directory: pass --data-dir or set SGELU_DATA_DIR"
        )
    return data_dir


def _experiment_config(args, task, activation):
    return experiments.ExperimentConfig(
        task=task,
        activation=activation,
        hidden_layers=args.hidden_layers,
        width=args.width,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seeds=_parse_seeds(args.seeds),
        lr=args.lr,
        train_samples=args.train_samples,
        test_samples=args.test_samples,
        data_dir=_data_dir(args),
    )


def cmd_tabulate(args):
    kind = act.by_name(args.fn, args.alpha)
    table = act.tabulate(kind, args.min, args.max, args.n)
    out = Artifacts(args.out_dir, args.force)
    csv_path = out.path(f"activation_{args.fn}.csv")
    act.write_table_csv(csv_path, table)
    if not args.no_plot:
        plots.plot_activation_table(table, str(kind), out.path(f"activation_{args.fn}.png"))
    out.write_run_json(args)
    print(f"wrote {csv_path}")
    return EXIT_OK


def _cmd_train(args, task):
    kind = act.by_name(args.activation, args.alpha)
    cfg = _experiment_config(args, task, kind)
    runner = experiments.run_classification if task == "classify" \
        else experiments.run_autoencoder
    records, nets = runner(cfg)
    medians = experiments.median_curves(records)
    out = Artifacts(args.out_dir, args.force)
    stem = f"{task}_{args.activation}"
    experiments.write_metrics_csv(out.path(f"{stem}_runs.csv"), records)
    experiments.write_median_csv(out.path(f"{stem}_median.csv"), medians)
    for seed, net in nets.items():
        nn.save_network(out.path(f"{stem}_seed{seed}.npz"), net)
    if not args.no_plot:
        plots.plot_training_curves(medians, task, out.path(f"{stem}_curves.png"))
    out.write_run_json(args)
    print(f"wrote {stem}_runs.csv, {stem}_median.csv and {len(nets)} model files")
    return EXIT_OK


def cmd_train_classify(args):
    return _cmd_train(args, "classify")


def cmd_train_autoencoder(args):
    return _cmd_train(args, "autoencode")


def cmd_suite(args):
    task = args.task
    base = _experiment_config(args, task, act.by_name("sgelu", args.alpha))
    records, medians, nets = experiments.run_suite(base, alpha=args.alpha)
    out = Artifacts(args.out_dir, args.force)
    experiments.write_metrics_csv(out.path(f"suite_{task}_runs.csv"), records)
    experiments.write_median_csv(out.path(f"suite_{task}_median.csv"), medians)
    for name, by_seed in nets.items():
        for seed, net in by_seed.items():
            nn.save_network(out.path(f"suite_{task}_{name}_seed{seed}.npz"), net)
    if not args.no_plot:
        plots.plot_training_curves(medians, task, out.path(f"suite_{task}_curves.png"))
    out.write_run_json(args)
    print(f"wrote suite_{task}_runs.csv and suite_{task}_median.csv")
    return EXIT_OK


def cmd_analyze_weights(args):
    net = nn.load_network(args.model)
    out = Artifacts(args.out_dir, args.force)
    stem = os.path.splitext(os.path.basename(args.model))[0]
    results = analysis.test_all_layers(net)
    analysis.write_ks_csv(out.path(f"ks_{stem}.csv"), results)
    counts, edges = analysis.weight_histogram(net, args.layer, args.bins)
    analysis.write_histogram_csv(out.path(f"hist_{stem}_layer{args.layer}.csv"),
                                 counts, edges)
    if not args.no_plot:
        plots.plot_weight_histogram(
            counts, edges, f"{stem} layer {args.layer} weights",
            out.path(f"hist_{stem}_layer{args.layer}.png"))
    out.write_run_json(args)
    passed = sum(1 for _, r in results if r.passes)
    print(f"KS normality: {passed}/{len(results)} hidden layers pass at 0.05")
    return EXIT_OK


def cmd_gradcheck(args):
    kind = act.by_name(args.activation, args.alpha)
    norm = experiments.normalizer_policy(kind)
    rng = Rng(args.seed)
    sizes = [int(s) for s in args.layers.split(",")]
    specs = [nn.LayerSpec(s, kind, norm) for s in sizes[1:-1]]
    specs.append(nn.LayerSpec(sizes[-1], act.sigmoid()))
    net = nn.init_network(sizes[0], specs, rng)
    x = rng.normal(args.batch * sizes[0]).reshape(args.batch, sizes[0])
    y = rng.normal(args.batch * sizes[-1], 0.5, 0.1).reshape(args.batch, sizes[-1])
    err, loc = analysis.gradient_check(net, x, y, h=args.h)
    out = Artifacts(args.out_dir, args.force)
    with open(out.path("gradcheck.csv"), "w") as fh:
        fh.write("activation,normalizer,layers,batch,h,max_rel_error,location\n")
        fh.write(f"{args.activation},{norm},{args.layers.replace(',', 'x')},"
                 f"{args.batch},{args.h},{err:.6g},{loc}\n")
    out.write_run_json(args)
    print(f"max relative gradient error {err:.3g} at {loc}")
    return EXIT_OK if err <= args.tol else EXIT_ERROR


def cmd_demo_update(args):
    out = Artifacts(args.out_dir, args.force)
    traces = []
    for name in args.fn.split(","):
        kind = act.by_name(name, args.alpha)
        rows = analysis.weight_update_demo(
            kind, args.w0, args.x, args.target, args.lr, args.steps)
        analysis.write_demo_csv(out.path(f"demo_{name}.csv"), rows)
        traces.append((name, rows))
    if not args.no_plot:
        plots.plot_update_demo(traces, out.path("demo_update.png"))
    out.write_run_json(args)
    for name, rows in traces:
        print(f"{name}: |error| {rows[0][4]:.6g} -> {rows[-1][4]:.6g} "
              f"after {args.steps} steps")
    return EXIT_OK


def cmd_time_norm(args):
    bn_ns, mm_ns = time_normalizers(args.width, args.batch, args.iters)
    out = Artifacts(args.out_dir, args.force)
    rows = [("batchnorm", args.width, args.batch, bn_ns),
            ("minmax", args.width, args.batch, mm_ns)]
    write_timing_csv(out.path("normalizer_timing.csv"), rows)
    if not args.no_plot:
        plots.plot_timing(rows, out.path("normalizer_timing.png"))
    out.write_run_json(args)
    print(f"batchnorm {bn_ns:.1f} ns/elem, minmax {mm_ns:.1f} ns/elem")
    return EXIT_OK


def _add_common(p):
    p.add_argument("--out-dir", default="out", help="artifact directory")
    p.add_argument("--force", action="store_true", help="allow overwriting artifacts")
    p.add_argument("--no-plot", action="store_true", help="skip PNG rendering")


def _add_training(p):
    p.add_argument("--data-dir", default=None,
                   help="MNIST IDX directory (default: $SGELU_DATA_DIR)")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--seeds", default="1,2,3,4,5", help="comma-separated run seeds")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--alpha", type=float, default=0.1, help="SGELU hyper-parameter")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--hidden-layers", type=int, default=8)
    p.add_argument("--train-samples", type=int, default=51200)
    p.add_argument("--test-samples", type=int, default=6400)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sgelu",
        description="Train and analyze SGELU/GELU/LiSHT networks on MNIST.",
    )
    parser.add_argument("--config", default=None,
                        help="optional flat JSON file with flag defaults")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    subparsers = {}

    p = sub.add_parser("tabulate", help="export (x, f, f') tables for an activation")
    p.add_argument("--fn", required=True,
                   choices=["sgelu", "gelu", "relu", "elu", "lisht"])
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--min", type=float, default=-4.0)
    p.add_argument("--max", type=float, default=4.0)
    p.add_argument("--n", type=int, default=801)
    _add_common(p)
    p.set_defaults(func=cmd_tabulate)
    subparsers["tabulate"] = p

    p = sub.add_parser("train-classify", help="MNIST classification for one activation")
    p.add_argument("--activation", default="sgelu",
                   choices=["sgelu", "gelu", "lisht", "relu", "elu"])
    _add_training(p)
    _add_common(p)
    p.set_defaults(func=cmd_train_classify)
    subparsers["train-classify"] = p

    p = sub.add_parser("train-autoencoder", help="MNIST auto-encoder for one activation")
    p.add_argument("--activation", default="sgelu",
                   choices=["sgelu", "gelu", "lisht", "relu", "elu"])
    _add_training(p)
    _add_common(p)
    p.set_defaults(func=cmd_train_autoencoder)
    subparsers["train-autoencoder"] = p

    p = sub.add_parser("suite", help="SGELU vs GELU vs LiSHT with median curves")
    p.add_argument("--task", default="classify", choices=["classify", "autoencode"])
    _add_training(p)
    _add_common(p)
    p.set_defaults(func=cmd_suite)
    subparsers["suite"] = p

    p = sub.add_parser("analyze-weights", help="KS normality and histogram of a saved model")
    p.add_argument("--model", required=True, help="model .npz written by a train command")
    p.add_argument("--layer", type=int, default=0)
    p.add_argument("--bins", type=int, default=50)
    _add_common(p)
    p.set_defaults(func=cmd_analyze_weights)
    subparsers["analyze-weights"] = p

    p = sub.add_parser("gradcheck", help="finite-difference gradient certification")
    p.add_argument("--activation", default="sgelu",
                   choices=["sgelu", "gelu", "lisht", "relu", "elu"])
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--layers", default="4,8,8,3", help="comma-separated layer sizes")
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_gradcheck)
    subparsers["gradcheck"] = p

    p = sub.add_parser("demo-update", help="single-neuron weight-update trajectories")
    p.add_argument("--fn", default="sgelu,gelu", help="comma-separated activation names")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--w0", type=float, default=-4.0)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--target", type=float, default=1.0)
    p.add_argument("--lr", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=100)
    _add_common(p)
    p.set_defaults(func=cmd_demo_update)
    subparsers["demo-update"] = p

    p = sub.add_parser("time-norm", help="normalizer forward cost comparison")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--iters", type=int, default=101)
    _add_common(p)
    p.set_defaults(func=cmd_time_norm)
    subparsers["time-norm"] = p

    return parser, subparsers


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subparsers = build_parser()

    # flags override config-file values: install the config as defaults
    if "--config" in argv:
        cfg_path = argv[argv.index("--config") + 1]
        try:
            with open(cfg_path) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {cfg_path}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for sp in subparsers.values():
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()
                               if k.replace("-", "_") in known})

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_DATA
    except (ConfigurationError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
