"""Compact classifiers whose size is the quantity under study.

train_tree grows a multiway decision tree: at each node the feature
with the highest gain ratio among those with positive gain is chosen
(ties go to the lowest feature index), with one branch per value
observed there. Instances missing the split feature descend every
branch with their weight scaled by the branch's share of the known
mass, the standard fractional treatment. Growth stops on pure nodes,
when no split has positive gain, or when the weighted instance count
drops below 2 * min_leaf. With cf < 1, pessimistic error pruning then
collapses any subtree whose error estimate as a single leaf does not
exceed the sum over its leaves, using the upper confidence bound of the
binomial error at confidence cf; cf = 1 disables pruning.

Prediction routes by value token, so models survive re-interned or
re-filtered schemas; a MISSING or unseen value fans out across all
branches weighted by the training proportions and the resulting class
distributions are mixed. Ties in the final argmax go to the earliest
label.

train_rules runs sequential covering: classes from rarest to most
frequent, each growing conjunctive rules condition by condition to
maximize FOIL information gain on a grow split, pruning final condition
sequences to maximize (p - n) / (p + n) on a prune split, and stopping
a class once a candidate rule's prune-split accuracy no longer beats
always predicting that class. Uncovered instances end in a default rule
predicting their majority. Rule syntax:

    (input16 = '(90-inf)') and (input11 = '(-inf-10]') => class=8

model_size counts every node of a tree (internal plus leaves) and every
rule of a rule list including the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from statistics import NormalDist

from .data import MISSING, Dataset, Feature
from .errors import ConfigError, DataError

TREE_MIN_LEAF = 2
TREE_CF = 0.25
RULES_PRUNE_FRACTION = 1.0 / 3.0


def _class_entropy(counts) -> float:
    total = sum(counts)
    if total <= 0:
        return 0.0
    ent = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            ent -= p * math.log2(p)
    return ent


def _argmax_low(values) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


# ---------------------------------------------------------------------------
# Decision tree
# ---------------------------------------------------------------------------


@dataclass
class Leaf:
    counts: tuple[float, ...]
    label: int

    @property
    def size(self) -> int:
        return 1

    @property
    def n_leaves(self) -> int:
        return 1


@dataclass
class Split:
    feature: int
    name: str
    children: dict[str, "Leaf | Split"]
    branch_weights: dict[str, float]
    counts: tuple[float, ...]
    label: int

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children.values())

    @property
    def n_leaves(self) -> int:
        return sum(c.n_leaves for c in self.children.values())


@dataclass(frozen=True)
class TreeModel:
    root: Leaf | Split
    labels: tuple[str, ...]
    features: tuple[Feature, ...]

    @cached_property
    def size(self) -> int:
        """Node count: internal nodes plus leaves."""
        return self.root.size

    @cached_property
    def n_leaves(self) -> int:
        """Root-to-leaf path count, the auxiliary size measure."""
        return self.root.n_leaves

    def predict(self, inst, schema: Dataset | None = None):
        return predict_tree(self, inst, schema)

    def split_features(self) -> set[str]:
        out: set[str] = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Split):
                out.add(node.name)
                stack.extend(node.children.values())
        return out

    def to_text(self) -> str:
        return format_tree(self)


def _node_distribution(node, tokens, n_labels):
    if isinstance(node, Leaf):
        total = sum(node.counts)
        if total <= 0:
            return [1.0 / n_labels] * n_labels
        return [c / total for c in node.counts]
    tok = tokens.get(node.name)
    if tok is not None and tok in node.children:
        return _node_distribution(node.children[tok], tokens, n_labels)
    mixed = [0.0] * n_labels
    for t, child in node.children.items():
        bw = node.branch_weights[t]
        dist = _node_distribution(child, tokens, n_labels)
        for l in range(n_labels):
            mixed[l] += bw * dist[l]
    return mixed


def predict_tree(m: TreeModel, inst, schema: Dataset | None = None):
    """Label token and class distribution for one instance.

    schema is the dataset the instance belongs to; None means the
    training schema. Values routed by token, so instances from filtered
    or re-interned datasets predict correctly; MISSING and unseen values
    mix all branches by training proportion.
    """
    features = schema.features if schema is not None else m.features
    tokens = {
        f.name: (None if z == MISSING else f.values[z])
        for f, z in zip(features, inst.slots)
    }
    dist = _node_distribution(m.root, tokens, len(m.labels))
    label = _argmax_low(dist)
    return m.labels[label], tuple(dist)


def train_tree(d: Dataset, min_leaf: int = TREE_MIN_LEAF, cf: float = TREE_CF) -> TreeModel:
    """Grow and (for cf < 1) pessimistically prune a tree on d."""
    if min_leaf < 1:
        raise ConfigError(f"min_leaf must be >= 1, got {min_leaf}")
    if not 0.0 < cf <= 1.0:
        raise ConfigError(f"cf must lie in (0, 1], got {cf}")
    if not d.instances:
        raise DataError("cannot train a tree on an empty dataset")

    n_labels = len(d.labels)
    cols = [d.column(x) for x in range(len(d.features))]
    ys = [inst.label for inst in d.instances]
    ws = [inst.weight for inst in d.instances]

    def grow(items, avail):
        counts = [0.0] * n_labels
        for i, w in items:
            counts[ys[i]] += w
        total = sum(counts)
        label = _argmax_low(counts)
        if (
            total < 2 * min_leaf
            or sum(1 for c in counts if c > 0) <= 1
            or not avail
        ):
            return Leaf(tuple(counts), label)

        best = None  # (ratio, x, val_counts, known_w)
        for x in sorted(avail):
            col = cols[x]
            val_counts: dict[int, list[float]] = {}
            known_w = 0.0
            for i, w in items:
                z = col[i]
                if z == MISSING:
                    continue
                per = val_counts.setdefault(z, [0.0] * n_labels)
                per[ys[i]] += w
                known_w += w
            if known_w <= 0 or len(val_counts) < 2:
                continue
            known_counts = [0.0] * n_labels
            info = 0.0
            split_info = 0.0
            for per in val_counts.values():
                vw = sum(per)
                for l in range(n_labels):
                    known_counts[l] += per[l]
                info += (vw / known_w) * _class_entropy(per)
                q = vw / total
                if q > 0:
                    split_info -= q * math.log2(q)
            miss_w = total - known_w
            if miss_w > 0:
                q = miss_w / total
                split_info -= q * math.log2(q)
            gain = (known_w / total) * (_class_entropy(known_counts) - info)
            if gain <= 1e-12 or split_info <= 0:
                continue
            ratio = gain / split_info
            if best is None or ratio > best[0] + 1e-12:
                best = (ratio, x, val_counts, known_w)
        if best is None:
            return Leaf(tuple(counts), label)

        _, x, val_counts, known_w = best
        col = cols[x]
        buckets: dict[int, list] = {z: [] for z in sorted(val_counts)}
        missing_items = []
        for i, w in items:
            z = col[i]
            if z == MISSING:
                missing_items.append((i, w))
            else:
                buckets[z].append((i, w))
        children: dict[str, Leaf | Split] = {}
        branch_weights: dict[str, float] = {}
        sub_avail = avail - {x}
        for z, child_items in buckets.items():
            share = sum(val_counts[z]) / known_w
            if missing_items:
                child_items = child_items + [
                    (i, w * share) for i, w in missing_items if w * share > 1e-12
                ]
            tok = d.features[x].values[z]
            children[tok] = grow(child_items, sub_avail)
            branch_weights[tok] = share
        return Split(x, d.features[x].name, children, branch_weights, tuple(counts), label)

    items = [(i, w) for i, w in enumerate(ws)]
    root = grow(items, set(range(len(d.features))))
    if cf < 1.0:
        root = _prune(root, cf)
    return TreeModel(root, d.labels, d.features)


def _added_errors(n: float, e: float, cf: float) -> float:
    """Upper-confidence-bound extra errors for e observed errors in n cases."""
    if cf >= 0.5:
        return 0.0
    if n <= 0:
        return 0.0
    if e < 1:
        base = n * (1.0 - cf ** (1.0 / n))
        if e == 0:
            return base
        return base + e * (_added_errors(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = NormalDist().inv_cdf(1.0 - cf)
    f = (e + 0.5) / n
    r = (
        f
        + z * z / (2 * n)
        + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))
    ) / (1.0 + z * z / n)
    return r * n - e


def _estimated_errors(node, cf) -> float:
    if isinstance(node, Leaf):
        total = sum(node.counts)
        errors = total - node.counts[node.label]
        return errors + _added_errors(total, errors, cf)
    return sum(_estimated_errors(c, cf) for c in node.children.values())


def _prune(node, cf):
    if isinstance(node, Leaf):
        return node
    node.children = {t: _prune(c, cf) for t, c in node.children.items()}
    total = sum(node.counts)
    errors = total - node.counts[node.label]
    as_leaf = errors + _added_errors(total, errors, cf)
    subtree = _estimated_errors(node, cf)
    if as_leaf <= subtree + 1e-9:
        return Leaf(node.counts, node.label)
    return node


def format_tree(m: TreeModel) -> str:
    lines: list[str] = []

    def leaf_text(leaf: Leaf) -> str:
        return f"{m.labels[leaf.label]} ({format(sum(leaf.counts), 'g')})"

    def walk(node, depth):
        prefix = "|  " * depth
        if isinstance(node, Leaf):
            lines.append(f"{prefix}{leaf_text(node)}")
            return
        for tok, child in node.children.items():
            if isinstance(child, Leaf):
                lines.append(f"{prefix}{node.name} = {tok}: {leaf_text(child)}")
            else:
                lines.append(f"{prefix}{node.name} = {tok}")
                walk(child, depth + 1)

    walk(m.root, 0)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Sequential-covering rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    """Conjunction of (feature name, value token) tests; empty = default."""

    conditions: tuple[tuple[str, str], ...]
    label: int
    distribution: tuple[float, ...]

    def text(self, labels) -> str:
        body = " and ".join(f"({f} = '{v}')" for f, v in self.conditions)
        head = f"=> class={labels[self.label]}"
        return f"{body} {head}" if body else head


@dataclass(frozen=True)
class RuleModel:
    rules: tuple[Rule, ...]
    labels: tuple[str, ...]
    features: tuple[Feature, ...]

    @property
    def size(self) -> int:
        """Rule count, the default rule included."""
        return len(self.rules)

    def predict(self, inst, schema: Dataset | None = None):
        return predict_rules(self, inst, schema)

    def rule_features(self) -> set[str]:
        return {f for rule in self.rules for f, _ in rule.conditions}

    def to_text(self) -> str:
        return format_rules(self)


def predict_rules(m: RuleModel, inst, schema: Dataset | None = None):
    """First matching rule wins; the default rule matches everything."""
    features = schema.features if schema is not None else m.features
    tokens = {
        f.name: (None if z == MISSING else f.values[z])
        for f, z in zip(features, inst.slots)
    }
    for rule in m.rules:
        if all(tokens.get(f) == v for f, v in rule.conditions):
            return m.labels[rule.label], rule.distribution
    return m.labels[m.rules[-1].label], m.rules[-1].distribution


def format_rules(m: RuleModel) -> str:
    return "\n".join(r.text(m.labels) for r in m.rules) + "\n"


def _positional_split(items, labels, prune_fraction):
    """Deterministic stratified grow/prune partition preserving order.

    Within each class, every prune_fraction-th instance goes to the
    prune side, so both sides keep the class mix without any randomness.
    """
    grow, prune = [], []
    acc: dict[int, float] = {}
    for it in items:
        y = labels[it]
        acc[y] = acc.get(y, 0.0) + prune_fraction
        if acc[y] >= 1.0 - 1e-9:
            acc[y] -= 1.0
            prune.append(it)
        else:
            grow.append(it)
    return grow, prune


def train_rules(d: Dataset, prune_fraction: float = RULES_PRUNE_FRACTION) -> RuleModel:
    """Learn an ordered rule list by sequential covering."""
    if not 0.0 <= prune_fraction < 1.0:
        raise ConfigError(f"prune_fraction must lie in [0, 1), got {prune_fraction}")
    if not d.instances:
        raise DataError("cannot learn rules from an empty dataset")

    n_labels = len(d.labels)
    ys = [inst.label for inst in d.instances]
    ws = [inst.weight for inst in d.instances]
    cols = [d.column(x) for x in range(len(d.features))]

    def covers(conds, i) -> bool:
        return all(cols[x][i] == z for x, z in conds)

    def pn(conds, idxs, target):
        p = n = 0.0
        for i in idxs:
            if covers(conds, i):
                if ys[i] == target:
                    p += ws[i]
                else:
                    n += ws[i]
        return p, n

    def grow_rule(grow_idx, target):
        conds: list[tuple[int, int]] = []
        covered = list(grow_idx)
        p0 = sum(ws[i] for i in covered if ys[i] == target)
        n0 = sum(ws[i] for i in covered if ys[i] != target)
        if p0 <= 0:
            return None
        used: set[int] = set()
        while n0 > 0:
            cand: dict[tuple[int, int], list[float]] = {}
            for i in covered:
                for x in range(len(cols)):
                    if x in used:
                        continue
                    z = cols[x][i]
                    if z == MISSING:
                        continue
                    pq = cand.setdefault((x, z), [0.0, 0.0])
                    pq[0 if ys[i] == target else 1] += ws[i]
            best = None
            for (x, z), (p1, q1) in sorted(cand.items()):
                if p1 <= 0:
                    continue
                gain = p1 * (
                    math.log2(p1 / (p1 + q1)) - math.log2(p0 / (p0 + n0))
                )
                if best is None or gain > best[0] + 1e-12:
                    best = (gain, x, z, p1, q1)
            if best is None or best[0] <= 1e-12:
                break
            _, x, z, p0, n0 = best
            conds.append((x, z))
            used.add(x)
            covered = [i for i in covered if cols[x][i] == z]
        return conds or None

    def prune_rule(conds, prune_idx, target):
        if not prune_idx or len(conds) <= 1:
            return conds
        def worth(cs):
            p, n = pn(cs, prune_idx, target)
            if p + n <= 0:
                return -1.0
            return (p - n) / (p + n)
        best_len, best_v = len(conds), worth(conds)
        for keep in range(len(conds) - 1, 0, -1):
            v = worth(conds[:keep])
            if v > best_v + 1e-12:
                best_len, best_v = keep, v
        return conds[:best_len]

    label_counts = [0.0] * n_labels
    for y, w in zip(ys, ws):
        label_counts[y] += w
    order = sorted(range(n_labels), key=lambda l: (label_counts[l], l))

    remaining = list(range(len(d.instances)))
    rules: list[Rule] = []
    for target in order[:-1]:
        while any(ys[i] == target for i in remaining):
            grow_idx, prune_idx = _positional_split(remaining, ys, prune_fraction)
            conds = grow_rule(grow_idx, target)
            if conds is None:
                break
            conds = prune_rule(conds, prune_idx, target)
            check_idx = prune_idx or grow_idx
            p, n = pn(conds, check_idx, target)
            rule_acc = p / (p + n) if p + n > 0 else 0.0
            base = sum(ws[i] for i in check_idx if ys[i] == target)
            total = sum(ws[i] for i in check_idx)
            default_acc = base / total if total > 0 else 0.0
            if rule_acc <= default_acc:
                break
            dist_counts = [0.0] * n_labels
            for i in remaining:
                if covers(conds, i):
                    dist_counts[ys[i]] += ws[i]
            total_cov = sum(dist_counts)
            dist = tuple(
                (c / total_cov if total_cov > 0 else 1.0 / n_labels)
                for c in dist_counts
            )
            rules.append(
                Rule(
                    tuple(
                        (d.features[x].name, d.features[x].values[z])
                        for x, z in conds
                    ),
                    target,
                    dist,
                )
            )
            remaining = [i for i in remaining if not covers(conds, i)]

    tail_counts = [0.0] * n_labels
    for i in remaining:
        tail_counts[ys[i]] += ws[i]
    if sum(tail_counts) <= 0:
        tail_counts = label_counts
    default_label = _argmax_low(tail_counts)
    total_tail = sum(tail_counts)
    default_dist = tuple(
        (c / total_tail if total_tail > 0 else 1.0 / n_labels) for c in tail_counts
    )
    rules.append(Rule((), default_label, default_dist))
    return RuleModel(tuple(rules), d.labels, d.features)


# ---------------------------------------------------------------------------
# Shared surface
# ---------------------------------------------------------------------------


def model_size(m) -> int:
    """Nodes of a tree, rules of a rule list (default included)."""
    if isinstance(m, (TreeModel, RuleModel)):
        return m.size
    raise ConfigError(f"not a model: {type(m).__name__}")


@dataclass(frozen=True)
class LearnerSpec:
    """Which classifier to train and with what knobs."""

    kind: str = "tree"
    min_leaf: int = TREE_MIN_LEAF
    cf: float = TREE_CF
    prune_fraction: float = RULES_PRUNE_FRACTION

    def __post_init__(self):
        if self.kind not in ("tree", "rules"):
            raise ConfigError(f"unknown learner kind {self.kind!r}")

    def train(self, d: Dataset):
        if self.kind == "tree":
            return train_tree(d, self.min_leaf, self.cf)
        return train_rules(d, self.prune_fraction)
