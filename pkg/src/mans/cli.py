"""Command-line front end.

Commands: ``train``, ``eval-lp``, ``eval-tc``, ``sweep``,
``export-embeddings``. Every command reads one flat config file; any
config key can be overridden with a ``--key value`` flag. Exit codes:
0 success, 1 validation failure, 2 runtime failure (non-finite loss),
3 I/O failure.
"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace
from pathlib import Path

from . import evaluation
from .config import RunConfig, apply_assignments, parse_config_file, write_effective_config
from .data import load_dataset
from .exceptions import ConfigError, MansError, TrainingDivergedError
from .features import load_features, xavier_fill
from .model import export_embeddings, load_checkpoint
from .training import train, write_run_log

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_IO = 3


def _add_override_flags(parser):
    for f in fields(RunConfig):
        parser.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name,
                            default=None, metavar="V")


def _resolve_config(args, require_output=True):
    config = RunConfig()
    if args.config:
        config = parse_config_file(args.config, config)
    overrides = [
        (f.name, getattr(args, f.name))
        for f in fields(RunConfig)
        if getattr(args, f.name, None) is not None
    ]
    apply_assignments(config, overrides, source="command line")
    return config.validate(require_output=require_output)


def _load_inputs(config, sidecar_dir=None):
    dataset = load_dataset(config.train_path, config.valid_path, config.test_path,
                           sidecar_dir=sidecar_dir)
    if config.features_path:
        table = load_features(config.features_path, dataset.entities,
                              config.feature_dim, config.seed, config.embedding_dim)
    else:
        table = xavier_fill(len(dataset.entities), config.feature_dim,
                            config.embedding_dim, config.seed)
    return dataset, table


def _print_lp(metrics, heading="link prediction"):
    print(f"{heading}:")
    print(f"  MR      {metrics.mr:10.3f}")
    print(f"  MRR     {metrics.mrr:10.4f}")
    print(f"  Hits@1  {metrics.hits1:10.4f}")
    print(f"  Hits@3  {metrics.hits3:10.4f}")
    print(f"  Hits@10 {metrics.hits10:10.4f}")
    print(f"  queries {metrics.n_queries:10d}")


def _print_tc(metrics):
    print("triple classification:")
    print(f"  Accuracy  {metrics.accuracy:8.4f}")
    print(f"  Precision {metrics.precision:8.4f}")
    print(f"  Recall    {metrics.recall:8.4f}")
    print(f"  F1        {metrics.f1:8.4f}")


def _run_training(config):
    run_dir = Path(config.output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    write_effective_config(config, run_dir / "config.effective")
    dataset, table = _load_inputs(config, sidecar_dir=run_dir)
    store = dataset.store
    print(f"loaded {len(dataset.entities)} entities, {len(dataset.relations)} relations; "
          f"triples: {len(store.train)} train / {len(store.valid)} valid / "
          f"{len(store.test)} test ({len(store)} total)")
    params, log = train(dataset, table, config.train_config(),
                        checkpoint_dir=run_dir / "checkpoints")
    write_run_log(log, run_dir / "log.tsv")

    lp_metrics = None
    if config.final_eval in ("lp", "both"):
        lp_metrics = evaluation.link_prediction(params, table, dataset.store,
                                                split="valid", norm=config.norm)
        evaluation.write_lp_metrics(lp_metrics, run_dir / "metrics_lp.tsv")
        _print_lp(lp_metrics, heading="valid link prediction")
    if config.final_eval in ("tc", "both"):
        tc_metrics = evaluation.triple_classification(params, table, dataset.store,
                                                      norm=config.norm, seed=config.seed)
        evaluation.write_tc_metrics(tc_metrics, run_dir / "metrics_tc.tsv")
        _print_tc(tc_metrics)
    return params, lp_metrics


def cmd_train(args):
    config = _resolve_config(args)
    _run_training(config)
    return EXIT_OK


def _load_checkpoint_for(config, checkpoint_path):
    dataset, table = _load_inputs(config)
    params = load_checkpoint(checkpoint_path)
    expected = (len(dataset.entities), len(dataset.relations),
                config.embedding_dim, config.feature_dim)
    actual = (params.n_entities, params.n_relations, params.d, params.d_v)
    if expected != actual:
        raise ConfigError(
            f"checkpoint dims (entities, relations, d, d_v) = {actual} "
            f"do not match dataset/config dims {expected}"
        )
    return dataset, table, params


def cmd_eval_lp(args):
    config = _resolve_config(args, require_output=False)
    dataset, table, params = _load_checkpoint_for(config, args.checkpoint)
    result = evaluation.link_prediction(params, table, dataset.store,
                                        split=args.split, norm=config.norm,
                                        return_ranks=bool(args.rank_dump))
    if args.rank_dump:
        metrics, records = result
        evaluation.write_rank_dump(records, args.rank_dump)
    else:
        metrics = result
    if args.out:
        evaluation.write_lp_metrics(metrics, args.out)
    _print_lp(metrics, heading=f"{args.split} link prediction")
    return EXIT_OK


def cmd_eval_tc(args):
    config = _resolve_config(args, require_output=False)
    dataset, table, params = _load_checkpoint_for(config, args.checkpoint)
    metrics = evaluation.triple_classification(params, table, dataset.store,
                                               norm=config.norm, seed=config.seed)
    if args.out:
        evaluation.write_tc_metrics(metrics, args.out)
    _print_tc(metrics)
    return EXIT_OK


def _parse_grid(raw):
    values = []
    for part in raw.split(","):
        part = part.strip()
        if part:
            values.append(float(part))
    if not values:
        raise ConfigError("sweep needs at least one grid value")
    return values


def _sweep_one(task):
    config, param, value, index = task
    run_config = replace(config,
                         output_dir=str(Path(config.output_dir) / f"run_{index:03d}_{param}_{value:g}"),
                         seed=config.seed + index)
    setattr(run_config, param, _coerce_like(config, param, value))
    run_config.validate()
    _, metrics = _run_training(run_config)
    return value, metrics


def _coerce_like(config, param, value):
    current = getattr(config, param)
    if isinstance(current, bool):
        raise ConfigError(f"cannot sweep boolean parameter {param!r}")
    if isinstance(current, int) and not isinstance(current, bool):
        if value != int(value):
            raise ConfigError(f"{param} takes integer values, got {value}")
        return int(value)
    return value


def cmd_sweep(args):
    config = _resolve_config(args)
    if args.param not in {f.name for f in fields(RunConfig)}:
        raise ConfigError(f"unknown sweep parameter {args.param!r}")
    if config.final_eval == "none":
        raise ConfigError("sweep needs final_eval lp (metrics feed the sweep table)")
    config.final_eval = "lp"
    values = _parse_grid(args.values)
    tasks = [(config, args.param, value, index) for index, value in enumerate(values)]

    if args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(task) for task in tasks]

    out_path = Path(config.output_dir) / "sweep.tsv"
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("value\tmrr\tmr\thits1\thits3\thits10\n")
        for value, m in rows:
            fh.write(f"{value:g}\t{m.mrr:.6f}\t{m.mr:.6f}\t"
                     f"{m.hits1:.6f}\t{m.hits3:.6f}\t{m.hits10:.6f}\n")
    print(f"sweep table written to {out_path}")
    return EXIT_OK


def cmd_export(args):
    config = _resolve_config(args, require_output=False)
    dataset, table, params = _load_checkpoint_for(config, args.checkpoint)
    export_embeddings(params, table, dataset.entities, args.out)
    print(f"embeddings written to {args.out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mans",
        description="Multimodal KG embedding training and evaluation engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model and evaluate the valid split")
    p_train.add_argument("--config", help="flat key = value config file")
    _add_override_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_lp = sub.add_parser("eval-lp", help="filtered link prediction from a checkpoint")
    p_lp.add_argument("--checkpoint", required=True)
    p_lp.add_argument("--config", help="config naming the dataset to evaluate")
    p_lp.add_argument("--split", choices=("valid", "test"), default="test")
    p_lp.add_argument("--out", help="metrics TSV path")
    p_lp.add_argument("--rank-dump", help="per-query rank TSV path")
    _add_override_flags(p_lp)
    p_lp.set_defaults(func=cmd_eval_lp)

    p_tc = sub.add_parser("eval-tc", help="triple classification from a checkpoint")
    p_tc.add_argument("--checkpoint", required=True)
    p_tc.add_argument("--config")
    p_tc.add_argument("--out", help="metrics TSV path")
    _add_override_flags(p_tc)
    p_tc.set_defaults(func=cmd_eval_tc)

    p_sweep = sub.add_parser("sweep", help="grid sweep over one config parameter")
    p_sweep.add_argument("--config")
    p_sweep.add_argument("--param", required=True, help="config key to sweep")
    p_sweep.add_argument("--values", required=True, help="comma-separated grid")
    p_sweep.add_argument("--parallel", type=int, default=1,
                         help="run up to N sweeps concurrently")
    _add_override_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_exp = sub.add_parser("export-embeddings",
                           help="dump structural/visual embeddings as TSV")
    p_exp.add_argument("--checkpoint", required=True)
    p_exp.add_argument("--config")
    p_exp.add_argument("--out", required=True)
    _add_override_flags(p_exp)
    p_exp.set_defaults(func=cmd_export)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except TrainingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, MansError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
