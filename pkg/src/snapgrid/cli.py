"""``snapgrid`` command line: train, convert, apply, score, curve and rule utilities."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

from . import __version__
from .converter import ConversionError, DegenerateWeightsError, convert_models, reports_to_json
from .corpus import CorpusError, load_corpus, save_corpus
from .curve import DEFAULT_FRACTIONS, curve_to_csv, learning_curve
from .learner import LRModel, TrainConfig, TrainingError
from .pipeline import (
    FEATURE_SETS,
    LRPredictor,
    Models,
    RulePredictor,
    dumps_predictions,
    loads_prediction_events,
    predict_corpus,
    train_models,
)
from .ruledsl import RuleSyntaxError, diff_rules, merge_rules, parse_rules, serialize_rules, validate_ruleset
from .scoring import ScoringError, gold_event_map, report_to_json, score

log = logging.getLogger("snapgrid")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2, 3
TRIGGER_MODEL, PARTICIPANT_MODEL, TRAIN_LOG = "trigger.model.json", "participant.model.json", "train.log"


class InputError(Exception):
    pass


@dataclass
class PipelineConfig:
    corpus: Optional[str] = None
    dev: Optional[str] = None
    reg: str = "l1"
    lam: Optional[float] = None  # None -> regulariser default
    tolerance: float = 1e-6
    max_epochs: int = 500
    seed: int = 0
    features: str = "convertible"
    threshold: Optional[float] = None
    out: Optional[str] = None

    def train_config(self) -> TrainConfig:
        kw = {"tolerance": self.tolerance, "max_epochs": self.max_epochs, "seed": self.seed}
        if self.lam is not None:
            kw["lam"] = self.lam
        return TrainConfig.default_for(self.reg, **kw)

    def to_json(self):
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_json(cls, d):
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def _config(args) -> PipelineConfig:
    base = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise InputError(f"config file not found: {path}")
        try:
            base = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"config file {path} is not JSON: {exc}") from None
    cfg = PipelineConfig.from_json(base)
    for name in ("corpus", "dev", "reg", "lam", "tolerance", "max_epochs", "seed", "features", "threshold", "out"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def _write_atomic(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _need(path, what):
    if path is None:
        raise InputError(f"missing {what}")
    if not Path(path).exists():
        raise InputError(f"{what} not found: {path}")
    return path


def _load_docs(path, what="corpus"):
    return load_corpus(_need(path, what))


def _load_model(path) -> LRModel:
    try:
        return LRModel.load(_need(path, "model file"))
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read model file {path}: {exc}") from None


def _load_models(model_dir) -> Models:
    d = Path(_need(model_dir, "model directory"))
    return Models(_load_model(d / TRIGGER_MODEL), _load_model(d / PARTICIPANT_MODEL))


def _load_rules(path):
    text = Path(_need(path, "rule file")).read_text(encoding="utf-8")
    return parse_rules(text)


def _announce(cfg: PipelineConfig, command: str):
    print(f"snapgrid {__version__} {command}: " + json.dumps(cfg.to_json(), sort_keys=True), file=sys.stderr)


# --------------------------------------------------------------------------
# commands


def cmd_train(args) -> int:
    cfg = _config(args)
    _announce(cfg, "train")
    docs = _load_docs(cfg.corpus)
    out = Path(cfg.out or "model")
    tc = cfg.train_config()
    models = train_models(docs, tc, cfg.features)
    log_lines = []
    for name, m in (("trigger", models.trigger), ("participant", models.participant)):
        for epoch, loss in enumerate(m.history, 1):
            log_lines.append(json.dumps({"classifier": name, "epoch": epoch, "loss": loss}))
        log_lines.append(json.dumps({"classifier": name, "epochs": len(m.history), "nonzero": m.nonzero_count()}))
        print(f"{name}: {m.nonzero_count()} non-zero weights after {len(m.history)} epochs", file=sys.stderr)
    _write_atomic(out / TRIGGER_MODEL, json.dumps(models.trigger.to_json(), indent=1) + "\n")
    _write_atomic(out / PARTICIPANT_MODEL, json.dumps(models.participant.to_json(), indent=1) + "\n")
    _write_atomic(out / TRAIN_LOG, "\n".join(log_lines) + "\n")
    print(f"wrote {out / TRIGGER_MODEL}, {out / PARTICIPANT_MODEL}, {out / TRAIN_LOG}")
    return EXIT_OK


def cmd_convert(args) -> int:
    models = _load_models(args.model_dir)
    rules, reports = convert_models(models.trigger, models.participant)
    out = Path(args.out or "rules.txt")
    report_path = Path(args.report) if args.report else out.with_suffix(".report.json")
    _write_atomic(out, serialize_rules(rules))
    _write_atomic(report_path, reports_to_json(reports))
    for r in reports:
        print(r.summary())
    print(f"wrote {out} ({len(rules.rules)} rules) and {report_path}")
    return EXIT_OK


def cmd_apply(args) -> int:
    cfg = _config(args)
    docs = _load_docs(cfg.corpus)
    if (args.rules is None) == (args.model_dir is None):
        raise InputError("give exactly one of --rules or --model-dir")
    if args.rules is not None:
        t = cfg.threshold if cfg.threshold is not None else 0
        predictor = RulePredictor(_load_rules(args.rules), t, t)
    else:
        predictor = LRPredictor(_load_models(args.model_dir))
    preds = predict_corpus(predictor, docs)
    out = Path(cfg.out or "predictions.jsonl")
    _write_atomic(out, dumps_predictions(preds))
    n_events = sum(len(p.events) for p in preds)
    print(f"wrote {out}: {len(preds)} documents, {n_events} events")
    return EXIT_OK


def cmd_score(args) -> int:
    gold_docs = _load_docs(args.gold, "gold corpus")
    try:
        pred = loads_prediction_events(Path(_need(args.predictions, "predictions file")).read_text(encoding="utf-8"))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    report = score(pred, gold_event_map(gold_docs))
    sys.stdout.write(report.format_table())
    if args.out:
        _write_atomic(args.out, report_to_json(report))
    return EXIT_OK


def cmd_curve(args) -> int:
    cfg = _config(args)
    _announce(cfg, "curve")
    train_docs = _load_docs(cfg.corpus)
    dev_docs = _load_docs(cfg.dev, "dev corpus")
    fractions = args.fractions or list(DEFAULT_FRACTIONS)
    points = learning_curve(train_docs, dev_docs, fractions, cfg.train_config(), cfg.seed)
    text = curve_to_csv(points)
    if cfg.out:
        _write_atomic(cfg.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_rules(args) -> int:
    if args.action == "validate":
        rs = _load_rules(args.files[0])
        diags = validate_ruleset(rs)
        for d in diags:
            print(d)
        print(f"{len(rs.rules)} rules, {len(diags)} problems")
        return EXIT_OK if not diags else EXIT_INPUT
    if args.action == "merge":
        rs = _load_rules(args.files[0])
        merged = merge_rules(rs)
        text = serialize_rules(merged)
        if args.out:
            _write_atomic(args.out, text)
        else:
            sys.stdout.write(text)
        print(f"{len(rs.rules)} -> {len(merged.rules)} rules", file=sys.stderr)
        return EXIT_OK
    if len(args.files) != 2:
        raise InputError("rules diff needs two rule files")
    d = diff_rules(_load_rules(args.files[0]), _load_rules(args.files[1]))
    for name in d.added:
        print(f"+ {name}")
    for name in d.removed:
        print(f"- {name}")
    for name in d.changed:
        print(f"~ {name}")
    print(d.summary())
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synthetic import synthetic_splits

    train_docs, dev_docs = synthetic_splits(args.train, args.dev, args.seed)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    for name, docs in (("train.jsonl", train_docs), ("dev.jsonl", dev_docs)):
        tmp = out / f".{name}.tmp"
        save_corpus(docs, tmp)
        os.replace(tmp, out / name)
    print(f"wrote {out / 'train.jsonl'} ({len(train_docs)} docs) and {out / 'dev.jsonl'} ({len(dev_docs)} docs)")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def _add_pipeline_flags(p, corpus_help="training corpus (JSON lines)"):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--corpus", help=corpus_help)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")


def _add_training_flags(p):
    p.add_argument("--reg", choices=("l1", "l2"))
    p.add_argument("--lambda", dest="lam", type=float, help="regularisation strength (default: 0.1 for l1, 1.0 for l2)")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--features", choices=FEATURE_SETS, help="feature set (default: convertible)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="snapgrid", description=__doc__)
    ap.add_argument("--version", action="version", version=f"snapgrid {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the trigger and participant classifiers")
    _add_pipeline_flags(p)
    _add_training_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("convert", help="compile trained models into a rule file")
    p.add_argument("--model-dir", required=True)
    p.add_argument("--out")
    p.add_argument("--report", help="conversion report path (default: next to the rule file)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("apply", help="predict events with a rule file or trained models")
    _add_pipeline_flags(p, "corpus to annotate")
    p.add_argument("--rules")
    p.add_argument("--model-dir")
    p.add_argument("--threshold", type=float, help="rule decision threshold (default 0)")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("score", help="score predictions against a gold corpus")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", help="also write the report as JSON")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("curve", help="learning curve of LR versus converted rules")
    _add_pipeline_flags(p)
    _add_training_flags(p)
    p.add_argument("--dev", help="development corpus")
    p.add_argument("--fractions", type=float, nargs="+")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("rules", help="rule file utilities")
    p.add_argument("action", choices=("validate", "merge", "diff"))
    p.add_argument("files", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("synth", help="write the synthetic train/dev corpus")
    p.add_argument("--train", type=int, default=1000)
    p.add_argument("--dev", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, CorpusError, RuleSyntaxError, ScoringError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateWeightsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE if "degenerate" in str(exc) else EXIT_INTERNAL
    except ConversionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
