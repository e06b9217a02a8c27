"""Interest prediction from early-cascade features.

Each story becomes one labeled example: v10 (in-network votes within the
first ten) and fans1 (submitter's fan count), labeled interesting when
final_votes reaches the label threshold.  The classifier is a small
binary decision tree over those two numeric attributes, grown greedily
on information gain ratio with midpoint thresholds and no post-pruning:
min_leaf and max_depth are the only brakes.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Sequence

from .cascade import DEFAULT_CONVENTION, PrefixConvention, in_network_votes
from .corpus import Corpus
from .errors import (
    EmptyTestsetError,
    NoPromotedStoriesError,
    TooFewExamplesError,
)
from .graph import FanGraph

DEFAULT_LABEL_THRESHOLD = 520
ATTRIBUTES = ("fans1", "v10")  # kept sorted; ties resolve to the first


@dataclass(frozen=True)
class FeatureVector:
    story_id: str
    v10: int
    fans1: int
    short: bool  # fewer than ten prefix votes were available

    def value(self, attribute: str) -> float:
        if attribute == "v10":
            return float(self.v10)
        if attribute == "fans1":
            return float(self.fans1)
        raise KeyError(attribute)


@dataclass(frozen=True)
class LabeledExample:
    features: FeatureVector
    label: bool  # True = interesting


def extract_features(
    corpus: Corpus,
    graph: FanGraph,
    threshold: int = DEFAULT_LABEL_THRESHOLD,
    convention: PrefixConvention = DEFAULT_CONVENTION,
) -> list[LabeledExample]:
    """One example per story; interesting means final_votes >= threshold."""
    examples = []
    for story in corpus:
        inn = in_network_votes(story, graph, k=10, convention=convention)
        features = FeatureVector(
            story_id=story.story_id,
            v10=inn.count,
            fans1=graph.fan_count(story.submitter),
            short=inn.short,
        )
        examples.append(LabeledExample(features=features, label=story.final_votes >= threshold))
    return examples


# ---- split criteria ----


def entropy(n_pos: int, n_neg: int) -> float:
    """Binary entropy of a class split, in bits."""
    n = n_pos + n_neg
    if n == 0 or n_pos == 0 or n_neg == 0:
        return 0.0
    p = n_pos / n
    q = n_neg / n
    return -(p * math.log2(p) + q * math.log2(q))


def candidate_thresholds(values: Sequence[float]) -> list[float]:
    """Midpoints between consecutive distinct sorted values."""
    distinct = sorted(set(values))
    return [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]


def _counts(examples: Sequence[LabeledExample]) -> tuple[int, int]:
    n_pos = sum(1 for example in examples if example.label)
    return n_pos, len(examples) - n_pos


@dataclass(frozen=True)
class SplitChoice:
    attribute: str
    threshold: float
    gain: float
    gain_ratio: float
    criterion: float  # gain_ratio or gain, whichever drove the choice


def evaluate_split(
    examples: Sequence[LabeledExample], attribute: str, threshold: float
) -> tuple[float, float]:
    """Return (gain, gain_ratio) for splitting at value <= threshold."""
    left_pos = left_neg = right_pos = right_neg = 0
    for example in examples:
        if example.features.value(attribute) <= threshold:
            if example.label:
                left_pos += 1
            else:
                left_neg += 1
        else:
            if example.label:
                right_pos += 1
            else:
                right_neg += 1
    n = len(examples)
    n_left = left_pos + left_neg
    n_right = right_pos + right_neg
    parent = entropy(left_pos + right_pos, left_neg + right_neg)
    children = (n_left / n) * entropy(left_pos, left_neg) + (n_right / n) * entropy(right_pos, right_neg)
    gain = parent - children
    if n_left == 0 or n_right == 0:
        return gain, 0.0
    wl = n_left / n
    wr = n_right / n
    split_info = -(wl * math.log2(wl) + wr * math.log2(wr))
    return gain, gain / split_info


def best_split(
    examples: Sequence[LabeledExample],
    *,
    use_gain_ratio: bool = True,
    attributes: Sequence[str] = ATTRIBUTES,
) -> SplitChoice | None:
    """The split maximizing the criterion, or None when no split gains.

    Attributes are scanned in sorted order and thresholds ascending with a
    strictly-greater update rule, so ties land on the lexicographically
    first attribute and then the smallest threshold.
    """
    best: SplitChoice | None = None
    for attribute in sorted(attributes):
        values = [example.features.value(attribute) for example in examples]
        for threshold in candidate_thresholds(values):
            gain, ratio = evaluate_split(examples, attribute, threshold)
            if gain <= 1e-12:
                continue
            criterion = ratio if use_gain_ratio else gain
            if best is None or criterion > best.criterion:
                best = SplitChoice(
                    attribute=attribute,
                    threshold=threshold,
                    gain=gain,
                    gain_ratio=ratio,
                    criterion=criterion,
                )
    return best


# ---- the tree ----


@dataclass
class Leaf:
    label: bool
    n_interesting: int
    n_not: int


@dataclass
class Split:
    attribute: str
    threshold: float
    n_interesting: int
    n_not: int
    left: "Leaf | Split"
    right: "Leaf | Split"


@dataclass(frozen=True)
class TrainParams:
    min_leaf: int = 1
    max_depth: int | None = None
    use_gain_ratio: bool = True


@dataclass
class DecisionTree:
    root: Leaf | Split
    params: TrainParams
    n_trained: int

    def predict(self, features: FeatureVector) -> bool:
        node = self.root
        while isinstance(node, Split):
            if features.value(node.attribute) <= node.threshold:
                node = node.left
            else:
                node = node.right
        return node.label

    def depth(self) -> int:
        def walk(node: Leaf | Split) -> int:
            if isinstance(node, Leaf):
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def n_leaves(self) -> int:
        def walk(node: Leaf | Split) -> int:
            if isinstance(node, Leaf):
                return 1
            return walk(node.left) + walk(node.right)

        return walk(self.root)


def _majority_leaf(n_pos: int, n_neg: int) -> Leaf:
    # Class tie goes to not-interesting.
    return Leaf(label=n_pos > n_neg, n_interesting=n_pos, n_not=n_neg)


def _grow(examples: Sequence[LabeledExample], params: TrainParams, depth: int) -> Leaf | Split:
    n_pos, n_neg = _counts(examples)
    if n_pos == 0 or n_neg == 0:
        return _majority_leaf(n_pos, n_neg)
    if len(examples) < params.min_leaf:
        return _majority_leaf(n_pos, n_neg)
    if params.max_depth is not None and depth >= params.max_depth:
        return _majority_leaf(n_pos, n_neg)
    choice = best_split(examples, use_gain_ratio=params.use_gain_ratio)
    if choice is None:
        return _majority_leaf(n_pos, n_neg)
    left = [e for e in examples if e.features.value(choice.attribute) <= choice.threshold]
    right = [e for e in examples if e.features.value(choice.attribute) > choice.threshold]
    return Split(
        attribute=choice.attribute,
        threshold=choice.threshold,
        n_interesting=n_pos,
        n_not=n_neg,
        left=_grow(left, params, depth + 1),
        right=_grow(right, params, depth + 1),
    )


def train_tree(examples: Sequence[LabeledExample], params: TrainParams = TrainParams()) -> DecisionTree:
    if not examples:
        raise EmptyTestsetError("cannot train on zero examples")
    return DecisionTree(root=_grow(examples, params, depth=0), params=params, n_trained=len(examples))


# ---- evaluation ----


@dataclass(frozen=True)
class EvalReport:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    @property
    def precision(self) -> float | None:
        """TP / (TP + FP); None when the predictor made no positive calls."""
        called = self.tp + self.fp
        if called == 0:
            return None
        return self.tp / called


def evaluate(tree: DecisionTree, examples: Sequence[LabeledExample]) -> EvalReport:
    if not examples:
        raise EmptyTestsetError("cannot evaluate on zero examples")
    tp = tn = fp = fn = 0
    for example in examples:
        predicted = tree.predict(example.features)
        if predicted and example.label:
            tp += 1
        elif predicted and not example.label:
            fp += 1
        elif not predicted and example.label:
            fn += 1
        else:
            tn += 1
    return EvalReport(tp=tp, tn=tn, fp=fp, fn=fn)


@dataclass
class CrossValidation:
    aggregate: EvalReport
    folds: list[EvalReport]
    n_folds: int
    seed: int


def cross_validate(
    examples: Sequence[LabeledExample],
    *,
    folds: int = 10,
    seed: int,
    params: TrainParams = TrainParams(),
) -> CrossValidation:
    """Seeded stratified k-fold; aggregate report sums the fold counts."""
    if folds < 2:
        raise TooFewExamplesError("need at least 2 folds")
    if len(examples) < folds:
        raise TooFewExamplesError(f"{len(examples)} examples cannot fill {folds} folds")
    rng = random.Random(seed)
    positives = [i for i, example in enumerate(examples) if example.label]
    negatives = [i for i, example in enumerate(examples) if not example.label]
    rng.shuffle(positives)
    rng.shuffle(negatives)
    fold_of = [0] * len(examples)
    cursor = 0
    for index in positives + negatives:  # continuing deal keeps every fold non-empty
        fold_of[index] = cursor % folds
        cursor += 1
    reports: list[EvalReport] = []
    for fold in range(folds):
        train = [examples[i] for i in range(len(examples)) if fold_of[i] != fold]
        test = [examples[i] for i in range(len(examples)) if fold_of[i] == fold]
        tree = train_tree(train, params)
        reports.append(evaluate(tree, test))
    aggregate = EvalReport(
        tp=sum(r.tp for r in reports),
        tn=sum(r.tn for r in reports),
        fp=sum(r.fp for r in reports),
        fn=sum(r.fn for r in reports),
    )
    return CrossValidation(aggregate=aggregate, folds=reports, n_folds=folds, seed=seed)


@dataclass(frozen=True)
class BaselineComparison:
    """Promotion-as-predictor vs the trained tree, on precision."""

    n_promoted: int
    n_promoted_interesting: int
    baseline_precision: float
    predictor_precision: float | None

    @property
    def predictor_beats_baseline(self) -> bool:
        if self.predictor_precision is None:
            return False
        return self.predictor_precision > self.baseline_precision


def baseline_compare(
    corpus: Corpus,
    predictor_report: EvalReport,
    threshold: int = DEFAULT_LABEL_THRESHOLD,
) -> BaselineComparison:
    """Precision of 'promoted implies interesting' on this corpus."""
    promoted = [story for story in corpus if story.promoted]
    if not promoted:
        raise NoPromotedStoriesError("corpus has no promoted stories to form a baseline")
    hits = sum(1 for story in promoted if story.final_votes >= threshold)
    return BaselineComparison(
        n_promoted=len(promoted),
        n_promoted_interesting=hits,
        baseline_precision=hits / len(promoted),
        predictor_precision=predictor_report.precision,
    )


# ---- serialization ----

TREE_FORMAT = "fancast-tree/1"


def tree_to_json(tree: DecisionTree) -> str:
    def encode(node: Leaf | Split) -> dict:
        if isinstance(node, Leaf):
            return {
                "type": "leaf",
                "label": "interesting" if node.label else "not_interesting",
                "counts": [node.n_interesting, node.n_not],
            }
        return {
            "type": "split",
            "attribute": node.attribute,
            "threshold": node.threshold,
            "counts": [node.n_interesting, node.n_not],
            "left": encode(node.left),
            "right": encode(node.right),
        }

    payload = {
        "format": TREE_FORMAT,
        "params": {
            "min_leaf": tree.params.min_leaf,
            "max_depth": tree.params.max_depth,
            "use_gain_ratio": tree.params.use_gain_ratio,
        },
        "n_trained": tree.n_trained,
        "root": encode(tree.root),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def tree_from_json(text: str) -> DecisionTree:
    payload = json.loads(text)
    if payload.get("format") != TREE_FORMAT:
        raise ValueError(f"unsupported tree format {payload.get('format')!r}")

    def decode(node: dict) -> Leaf | Split:
        if node["type"] == "leaf":
            return Leaf(
                label=node["label"] == "interesting",
                n_interesting=node["counts"][0],
                n_not=node["counts"][1],
            )
        return Split(
            attribute=node["attribute"],
            threshold=node["threshold"],
            n_interesting=node["counts"][0],
            n_not=node["counts"][1],
            left=decode(node["left"]),
            right=decode(node["right"]),
        )

    params = payload["params"]
    return DecisionTree(
        root=decode(payload["root"]),
        params=TrainParams(
            min_leaf=params["min_leaf"],
            max_depth=params["max_depth"],
            use_gain_ratio=params["use_gain_ratio"],
        ),
        n_trained=payload["n_trained"],
    )


def tree_to_text(tree: DecisionTree) -> str:
    """Human-readable indented rendering, one node per line."""
    lines: list[str] = []

    def walk(node: Leaf | Split, indent: int) -> None:
        pad = "  " * indent
        if isinstance(node, Leaf):
            label = "interesting" if node.label else "not_interesting"
            lines.append(f"{pad}leaf {label} [{node.n_interesting}/{node.n_not}]")
            return
        lines.append(f"{pad}split {node.attribute} <= {node.threshold:g} [{node.n_interesting}/{node.n_not}]")
        walk(node.left, indent + 1)
        walk(node.right, indent + 1)

    walk(tree.root, 0)
    return "\n".join(lines) + "\n"
