"""Learning curves: LR versus converted rules as training data grows."""

from __future__ import annotations

import csv
import io
import logging
import random
from dataclasses import dataclass
from typing import Sequence

from .converter import convert_models
from .corpus import Document
from .learner import TrainConfig
from .pipeline import LRPredictor, RulePredictor, event_map, predict_corpus, train_models
from .scoring import gold_event_map, score

log = logging.getLogger(__name__)

DEFAULT_FRACTIONS = tuple(round(0.1 * k, 1) for k in range(1, 11))


@dataclass(frozen=True)
class CurvePoint:
    fraction: float
    n_docs: int
    f1_lr: float  # All-Total F1 x 100
    f1_rules: float


def subsample(docs: Sequence[Document], fraction: float, seed: int) -> list:
    """First ``int(fraction * n)`` documents of a seeded shuffle; prefixes nest across fractions."""
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    k = int(fraction * len(docs) + 1e-9)
    if k == 0:
        raise ValueError(f"fraction {fraction} of {len(docs)} documents selects no documents")
    order = list(range(len(docs)))
    random.Random(seed).shuffle(order)
    return [docs[i] for i in sorted(order[:k])]


def evaluate_once(train_docs, dev_docs, config: TrainConfig, gold=None):
    """``(f1_lr, f1_rules)`` for convertible-feature models trained on ``train_docs``."""
    gold = gold if gold is not None else gold_event_map(dev_docs)
    models = train_models(train_docs, config, "convertible")
    rules, _ = convert_models(models.trigger, models.participant)
    lr = score(event_map(predict_corpus(LRPredictor(models), dev_docs)), gold).total()
    rb = score(event_map(predict_corpus(RulePredictor(rules), dev_docs)), gold).total()
    return 100 * lr.f1, 100 * rb.f1


def learning_curve(
    train_docs: Sequence[Document],
    dev_docs: Sequence[Document],
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    config: TrainConfig = TrainConfig.default_for("l1"),
    seed: int = 0,
) -> list[CurvePoint]:
    if list(fractions) != sorted(fractions):
        raise ValueError("fractions must be sorted")
    gold = gold_event_map(dev_docs)
    out = []
    for frac in fractions:
        sub = subsample(train_docs, frac, seed)
        f1_lr, f1_rules = evaluate_once(sub, dev_docs, config, gold)
        log.info("fraction %.2f (%d docs): LR %.2f, rules %.2f", frac, len(sub), f1_lr, f1_rules)
        out.append(CurvePoint(frac, len(sub), f1_lr, f1_rules))
    return out


def curve_to_csv(points: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fraction", "f1_lr", "f1_rules"])
    for p in points:
        w.writerow([f"{p.fraction:g}", f"{p.f1_lr:.4f}", f"{p.f1_rules:.4f}"])
    return buf.getvalue()
