"""Command-line pipeline: generate data, train, predict, score, evaluate.

Exit codes: 0 success, 1 usage error (bad flags, missing files), 2 data
error (malformed or invalid file contents), 3 numeric failure (training
divergence or an oracle mismatch).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as cio
from ._backend import active_backend
from .datasets import gen_dataset
from .errors import (
    CredroError,
    DataFormatError,
    OracleMismatchError,
    TrainingError,
    UndefinedMetricError,
    UndefinedNormalizationError,
    ValidationError,
)
from .measures import batch_measure, measure_column_name
from .metrics import accuracy_rejection, auroc_scores, normalized_ar
from .oracles import auroc_pair_count, polish_entropy_pair, random_restart_lower
from .simplex import BoxCredalSet
from .train import predict_members, train_ensemble


class UsageError(CredroError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _cmd_gen_data(args) -> int:
    spec = cio.dataset_spec_from_file(args.spec)
    x, y = gen_dataset(spec)
    cio.write_dataset(args.out, x, y)
    print(f"wrote {x.shape[0]} instances to {args.out}")
    return 0


def _cmd_train(args) -> int:
    config = cio.train_config_from_file(args.config)
    x, y = cio.read_dataset(args.data)
    if np.any(y < 0):
        raise ValidationError("training data contains unlabeled rows (label -1)")
    artifact = train_ensemble(config, x, y, workers=args.workers)
    cio.write_ensemble(args.out, artifact)
    print(f"trained {artifact.size} members into {args.out}")
    return 0


def _cmd_predict(args) -> int:
    artifact = cio.read_ensemble(args.model_dir)
    x, y = cio.read_dataset(args.data)
    probs = predict_members(artifact, x)
    pred = cio.Predictions(np.arange(x.shape[0], dtype=np.int64), y, probs)
    cio.write_predictions(args.out, pred)
    print(f"wrote predictions for {x.shape[0]} instances to {args.out}")
    return 0


def _cmd_uq(args) -> int:
    pred = cio.read_predictions(args.pred)
    values = batch_measure(pred.probs, args.set, args.measure)
    name = measure_column_name(args.set, args.measure, pred.n_classes)
    cio.write_uq_csv(args.out, pred.instance_ids, pred.labels, name, values)
    print(f"wrote {values.size} {name} values to {args.out}")
    return 0


def _cmd_eval_ood(args) -> int:
    _, _, measure_id, id_values = cio.read_uq_csv(args.id)
    _, _, measure_ood, ood_values = cio.read_uq_csv(args.ood)
    if measure_id != measure_ood:
        raise DataFormatError(
            f"measure mismatch: {measure_id!r} (ID) vs {measure_ood!r} (OOD)"
        )
    scores = np.concatenate([id_values, ood_values])
    labels = np.concatenate(
        [np.zeros(id_values.size, dtype=np.int64), np.ones(ood_values.size, dtype=np.int64)]
    )
    value = auroc_scores(scores, labels)
    cio.write_metric_report(
        args.out,
        [
            ("auroc", float(value)),
            ("n_id", id_values.size),
            ("n_ood", ood_values.size),
            ("measure", measure_id),
        ],
    )
    print(f"auroc {value!r} -> {args.out}")
    return 0


def _cmd_eval_select(args) -> int:
    pred = cio.read_predictions(args.pred)
    labeled = pred.labels >= 0
    if not labeled.any():
        raise ValidationError("no labeled instances to evaluate")
    probs = pred.probs[labeled]
    labels = pred.labels[labeled]
    mean_probs = probs.mean(axis=1)
    correct = mean_probs.argmax(axis=1) == labels
    eu = batch_measure(probs, args.set, args.measure)
    curve = accuracy_rejection(eu, correct)
    rows = None
    pairs = [
        ("ar_auc", float(curve.auc)),
        ("base_accuracy_pct", float(curve.accuracies[0])),
        ("n_instances", int(labels.size)),
        ("measure", measure_column_name(args.set, args.measure, pred.n_classes)),
    ]
    try:
        norm = normalized_ar(curve)
        pairs.insert(1, ("normalized_ar_auc", float(norm.auc)))
        rows = ["rejection_rate,accuracy_pct,normalized_improvement"]
        for r, a, v in zip(curve.rejection_rates, curve.accuracies, norm.accuracies):
            rows.append(f"{float(r)!r},{float(a)!r},{float(v)!r}")
    except UndefinedNormalizationError:
        pairs.insert(1, ("normalized_ar_auc", "undefined"))
        rows = ["rejection_rate,accuracy_pct"]
        for r, a in zip(curve.rejection_rates, curve.accuracies):
            rows.append(f"{float(r)!r},{float(a)!r}")
    cio.write_metric_report(args.out, pairs, rows)
    print(f"ar_auc {curve.auc!r} -> {args.out}")
    return 0


def _random_member_probs(rng, m: int, c: int) -> np.ndarray:
    logits = rng.normal(0.0, 1.5, size=(m, c))
    z = np.exp(logits - logits.max(axis=1, keepdims=True))
    return z / z.sum(axis=1, keepdims=True)


def _cmd_oracle_check(args) -> int:
    from .entropy import lower_entropy_box, upper_entropy_box

    rng = np.random.default_rng(args.seed)
    failures = 0

    worst = 0.0
    for trial in range(args.trials):
        c = (2, 3, 4)[trial % 3]
        probs = _random_member_probs(rng, 5, c)
        box = BoxCredalSet(probs.min(axis=0), probs.max(axis=0))
        oracle = polish_entropy_pair(box)
        up = upper_entropy_box(box).value
        lo = lower_entropy_box(box).value
        dev = max(abs(up - oracle.upper), abs(lo - oracle.lower))
        worst = max(worst, dev)
        if dev > 1e-6:
            failures += 1
    print(f"entropy-box vs lattice+polish: {args.trials} trials, max |dev| {worst:.3e}")

    worst = 0.0
    n_large = max(1, args.trials // 5)
    for trial in range(n_large):
        c = (5, 6)[trial % 2]
        probs = _random_member_probs(rng, 5, c)
        box = BoxCredalSet(probs.min(axis=0), probs.max(axis=0))
        lo = lower_entropy_box(box).value
        h_oracle, _ = random_restart_lower(box, n_starts=50, seed=int(rng.integers(2**32)))
        dev = abs(lo - h_oracle)
        worst = max(worst, dev)
        if dev > 1e-9:
            failures += 1
    print(f"entropy-min vs restart descent: {n_large} trials, max |dev| {worst:.3e}")

    n_auroc = max(1, args.trials // 5)
    exact = True
    for _ in range(n_auroc):
        n = int(rng.integers(10, 501))
        scores = np.round(rng.normal(size=n), 2)  # rounding injects ties
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        a = auroc_scores(scores, labels)
        b = auroc_pair_count(scores, labels)
        if a != b:
            exact = False
            failures += 1
    print(f"auroc vs pair counting: {n_auroc} trials, exact={exact}")

    if failures:
        raise OracleMismatchError(f"{failures} oracle mismatches")
    print("all oracle checks passed")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="credro", description=__doc__)
    parser.add_argument(
        "--version", action="version", version=f"credro (backend: {active_backend()})"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset CSV")
    p.add_argument("--spec", required=True, help="dataset spec file (key = value)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="train the reweighted ensemble")
    p.add_argument("--config", required=True, help="training config file (key = value)")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="output model directory")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="write per-member predictions")
    p.add_argument("--model-dir", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("uq", help="per-instance uncertainty values")
    p.add_argument("--pred", required=True)
    p.add_argument("--set", choices=("box", "hull"), default="box")
    p.add_argument(
        "--measure",
        choices=("entropy-diff", "mi", "width", "pil", "auto"),
        default="auto",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_uq)

    p = sub.add_parser("eval-ood", help="AUROC separating ID from OOD scores")
    p.add_argument("--id", required=True, help="uncertainty CSV for ID data")
    p.add_argument("--ood", required=True, help="uncertainty CSV for OOD data")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval_ood)

    p = sub.add_parser("eval-select", help="accuracy-rejection curve and AUC")
    p.add_argument("--pred", required=True)
    p.add_argument("--set", choices=("box", "hull"), default="box")
    p.add_argument(
        "--measure",
        choices=("entropy-diff", "mi", "width", "pil", "auto"),
        default="auto",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval_select)

    p = sub.add_parser("oracle-check", help="run the brute-force oracle suites")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return 1
    except (
        DataFormatError,
        ValidationError,
        UndefinedMetricError,
        UndefinedNormalizationError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TrainingError, OracleMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
