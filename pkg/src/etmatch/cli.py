"""Command-line interface: validate, train, match, eval, ablate.

Every command is deterministic given its inputs, configuration, and
seed. Errors go to standard error with a stable exit-code contract:
0 success, 2 input or validation problems, 3 degenerate training data,
4 model mismatch, 5 evaluation input problems.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig, apply_overrides, load_config
from .errors import (
    ConfigError,
    EvalInputError,
    ModelMismatchError,
    ParseError,
    TrainingDataError,
    ValidationError,
)
from .evaluation import (
    AblationTask,
    emit_report,
    load_predicted,
    load_reference,
    run_ablation,
    score,
)
from .features import MatchContext, make_context, validate_mask
from .graph import compute_stats, load_graph
from .lexical import EmbeddingTable, Taxonomy, load_embeddings, load_taxonomy
from .matcher import (
    MatchTask,
    extract_alignment,
    load_model,
    save_model,
    score_candidates,
    train_matcher,
    write_match_file,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_TRAINING_DATA = 3
EXIT_MODEL_MISMATCH = 4
EXIT_EVAL_INPUT = 5

_FORMATS = {"table": "text_table", "json": "machine_json"}


def _build_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    return apply_overrides(
        config,
        seed=getattr(args, "seed", None),
        model_type=getattr(args, "model_type", None),
        extraction_policy=getattr(args, "policy", None),
        threshold=getattr(args, "threshold", None),
    )


def _parse_mask(args: argparse.Namespace) -> tuple[str, ...]:
    raw = getattr(args, "mask", None)
    if not raw:
        return ()
    names = tuple(part.strip() for part in raw.split(",") if part.strip())
    return validate_mask(names)


def _load_resources(config: RunConfig) -> tuple[Taxonomy | None, EmbeddingTable | None]:
    taxonomy = load_taxonomy(config.taxonomy) if config.taxonomy else None
    embeddings = load_embeddings(config.embeddings) if config.embeddings else None
    return taxonomy, embeddings


def _context_for(
    source: str,
    target: str,
    include_inherited: bool,
    resources: tuple[Taxonomy | None, EmbeddingTable | None],
) -> MatchContext:
    graph_a = load_graph(source)
    graph_b = load_graph(target)
    taxonomy, embeddings = resources
    return make_context(
        graph_a,
        graph_b,
        taxonomy=taxonomy,
        embeddings=embeddings,
        include_inherited=include_inherited,
    )


def _task_for(
    source: str,
    target: str,
    reference: str,
    config: RunConfig,
    resources: tuple[Taxonomy | None, EmbeddingTable | None],
) -> MatchTask:
    context = _context_for(source, target, config.include_inherited, resources)
    return MatchTask(context=context, reference=load_reference(reference))


def cmd_validate(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph)
    stats = compute_stats(graph, include_inherited=True)
    print(
        f"graph {graph.graph_id}: {len(graph.etypes)} etypes, "
        f"{len(graph.properties)} properties, max depth {stats.max_depth}"
    )
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    config = _build_config(args)
    mask = _parse_mask(args)
    resources = _load_resources(config)
    tasks = [_task_for(src, tgt, ref, config, resources) for src, tgt, ref in args.pair]
    model, summary = train_matcher(tasks, config, mask=mask)
    save_model(model, args.out)
    print(
        f"trained {summary['model_type']} on {summary['tasks']} task(s): "
        f"{summary['candidates']} candidates, {summary['positives']} positive / "
        f"{summary['negatives']} negative, balanced to {summary['balanced_size']}"
    )
    print(f"active features: {', '.join(summary['active_features'])}")
    print(f"model written to {args.out}")
    return EXIT_OK


def cmd_match(args: argparse.Namespace) -> int:
    config = _build_config(args)
    model = load_model(args.model)
    resources = _load_resources(config)
    include_inherited = bool(model.featurize_settings().get("include_inherited", True))
    context = _context_for(args.source, args.target, include_inherited, resources)
    predictions = score_candidates(model, context, config)
    alignment = extract_alignment(
        predictions, policy=config.extraction_policy, threshold=config.threshold
    )
    write_match_file(predictions, alignment, args.out)
    print(
        f"matched {context.graph_a.graph_id} x {context.graph_b.graph_id}: "
        f"{len(predictions)} candidates, {len(alignment.entries)} selected"
    )
    print(f"alignment written to {args.out}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    predicted = load_predicted(args.predicted)
    reference = load_reference(args.reference)
    report = score(predicted, reference)
    fmt = _FORMATS[args.format]
    sys.stdout.write(emit_report([("overall", report)], format=fmt))
    if fmt == "text_table":
        print(f"tp {report.tp}  fp {report.fp}  fn {report.fn}")
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    config = _build_config(args)
    resources = _load_resources(config)
    train_tasks = tuple(
        _task_for(src, tgt, ref, config, resources) for src, tgt, ref in args.train_pair
    )
    src, tgt, ref = args.test_pair
    test_task = _task_for(src, tgt, ref, config, resources)
    rows = run_ablation(AblationTask(train_tasks=train_tasks, test_task=test_task), config)
    sys.stdout.write(emit_report(rows, format=_FORMATS[args.format]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="etmatch",
        description="Train and apply entity-type graph matchers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--seed", type=int, help="master seed (default 0)")

    p_validate = sub.add_parser("validate", help="check a graph file and print a summary")
    p_validate.add_argument("graph", help="graph JSON file")
    p_validate.set_defaults(func=cmd_validate)

    p_train = sub.add_parser("train", help="fit a matcher on labeled graph pairs")
    add_common(p_train)
    p_train.add_argument(
        "--pair",
        nargs=3,
        metavar=("SOURCE", "TARGET", "REFERENCE"),
        action="append",
        required=True,
        help="training task: source graph, target graph, reference alignment (repeatable)",
    )
    p_train.add_argument("--out", required=True, help="model file to write")
    p_train.add_argument(
        "--model-type",
        choices=("rf", "sgd", "dt", "lr"),
        help="classifier family (default from config: random forest)",
    )
    p_train.add_argument(
        "--mask",
        help="comma-separated feature names to exclude, e.g. es_h,es_v",
    )
    p_train.set_defaults(func=cmd_train)

    p_match = sub.add_parser("match", help="score a graph pair with a trained model")
    add_common(p_match)
    p_match.add_argument("source", help="source graph JSON file")
    p_match.add_argument("target", help="target graph JSON file")
    p_match.add_argument("--model", required=True, help="trained model file")
    p_match.add_argument("--out", required=True, help="match TSV to write")
    p_match.add_argument(
        "--policy",
        choices=("all", "greedy-1to1"),
        help="alignment extraction policy (default: all)",
    )
    p_match.add_argument("--threshold", type=float, help="decision threshold (default 0.5)")
    p_match.set_defaults(func=cmd_match)

    p_eval = sub.add_parser("eval", help="score a predicted alignment against a reference")
    p_eval.add_argument("predicted", help="predicted alignment (match TSV or pair TSV)")
    p_eval.add_argument("reference", help="reference alignment (TSV or alignment XML)")
    p_eval.add_argument(
        "--format", choices=("table", "json"), default="table", help="report format"
    )
    p_eval.set_defaults(func=cmd_eval)

    p_ablate = sub.add_parser("ablate", help="run the four-variant feature ablation")
    add_common(p_ablate)
    p_ablate.add_argument(
        "--train-pair",
        nargs=3,
        metavar=("SOURCE", "TARGET", "REFERENCE"),
        action="append",
        required=True,
        help="training task (repeatable)",
    )
    p_ablate.add_argument(
        "--test-pair",
        nargs=3,
        metavar=("SOURCE", "TARGET", "REFERENCE"),
        required=True,
        help="held-out task to evaluate each variant on",
    )
    p_ablate.add_argument(
        "--model-type",
        choices=("rf", "sgd", "dt", "lr"),
        help="classifier family used for every variant",
    )
    p_ablate.add_argument(
        "--policy",
        choices=("all", "greedy-1to1"),
        help="alignment extraction policy (default: all)",
    )
    p_ablate.add_argument("--threshold", type=float, help="decision threshold (default 0.5)")
    p_ablate.add_argument(
        "--format", choices=("table", "json"), default="table", help="report format"
    )
    p_ablate.set_defaults(func=cmd_ablate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TrainingDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRAINING_DATA
    except ModelMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL_MISMATCH
    except EvalInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EVAL_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
