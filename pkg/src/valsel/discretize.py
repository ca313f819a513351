"""Supervised and unsupervised discretization of numeric columns.

Three fitting strategies produce cut lists per numeric feature:

* binning: equal-width intervals between the observed min and max.
* frequency: equal-frequency intervals; ties on equal values never split
  across a cut, so cuts sit midway between distinct adjacent sorted
  values and duplicate-forced empty bins merge away.
* mdl: recursive entropy minimization with the MDL stopping rule, which
  accepts a binary split of a segment of n values into subsets with k1
  and k2 classes only when

      gain > (log2(n-1) + log2(3^k - 2) - k*E + k1*E1 + k2*E2) / n

  where E, E1, E2 are the class entropies (in bits) of the segment and
  its two sides and k the number of classes present in the segment.

Applying a spec rewrites each listed feature into interval value tokens
"(-inf-c1]", "(c1-c2]", ..., "(ck-inf)" and marks it discretized-numeric.
Out-of-range values fall into the end bins, so application is total on
the reals; MISSING stays MISSING.
"""

from __future__ import annotations

import json
import logging
import math
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path

from .data import CATEGORICAL, DISCRETIZED, MISSING, Dataset, Feature, Instance
from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

METHODS = ("binning", "frequency", "mdl")


@dataclass(frozen=True)
class DiscretizationSpec:
    """Fitted cut lists, keyed by feature name in feature order."""

    method: str
    bins: int
    cuts: dict[str, tuple[float, ...]]

    def __post_init__(self):
        object.__setattr__(
            self, "cuts", {k: tuple(v) for k, v in self.cuts.items()}
        )
        if self.method not in METHODS:
            raise ConfigError(f"unknown discretization method {self.method!r}")
        if self.bins < 1:
            raise ConfigError(f"bins must be >= 1, got {self.bins}")
        for name, cs in self.cuts.items():
            if any(b <= a for a, b in zip(cs, cs[1:])):
                raise ConfigError(f"cuts for {name!r} are not strictly ascending")

    def to_text(self) -> str:
        payload = {
            "method": self.method,
            "bins": self.bins,
            "cuts": {k: list(v) for k, v in self.cuts.items()},
        }
        return json.dumps(payload, indent=1) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DiscretizationSpec":
        try:
            payload = json.loads(text)
            return cls(
                payload["method"],
                payload["bins"],
                {k: tuple(v) for k, v in payload["cuts"].items()},
            )
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise DataError(f"bad discretization spec: {exc}") from None

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "DiscretizationSpec":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def _observed(column, name):
    vals = [v for v in column if v is not None]
    if not vals:
        raise DataError(f"feature {name!r}: all values missing, nothing to discretize")
    return vals


def fit_equal_width(column, bins: int, name: str = "column") -> list[float]:
    """Cuts at min + k*(max-min)/bins for k = 1..bins-1; none when min == max."""
    if bins < 1:
        raise ConfigError(f"bins must be >= 1, got {bins}")
    vals = _observed(column, name)
    lo, hi = min(vals), max(vals)
    if lo == hi:
        return []
    cuts = []
    for k in range(1, bins):
        c = lo + k * (hi - lo) / bins
        if not cuts or c > cuts[-1]:
            cuts.append(c)
    return cuts


def fit_equal_frequency(column, bins: int, name: str = "column") -> list[float]:
    """Cuts splitting the sorted column into bins of near-equal population.

    Each cut lands on the legal boundary (between distinct adjacent
    values) closest to the ideal position k*n/bins, at the midpoint of
    the two values. Boundaries forced together by duplicates collapse
    into one, merging the empty bins.
    """
    if bins < 1:
        raise ConfigError(f"bins must be >= 1, got {bins}")
    vals = sorted(_observed(column, name))
    n = len(vals)
    legal = [j for j in range(1, n) if vals[j - 1] != vals[j]]
    if not legal:
        return []
    cuts = []
    for k in range(1, bins):
        target = k * n / bins
        j = min(legal, key=lambda pos: (abs(pos - target), pos))
        c = (vals[j - 1] + vals[j]) / 2.0
        if c not in cuts:
            cuts.append(c)
    return sorted(cuts)


def _entropy_bits(counts) -> float:
    total = sum(counts)
    if total <= 0:
        return 0.0
    ent = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            ent -= p * math.log2(p)
    return ent


def fit_mdl(column, labels, name: str = "column") -> list[float]:
    """Recursive minimal-entropy cuts accepted by the MDL criterion."""
    column = list(column)
    labels = list(labels)
    if len(column) != len(labels):
        raise DataError(
            f"feature {name!r}: {len(column)} values but {len(labels)} labels"
        )
    pts = sorted(
        ((v, l) for v, l in zip(column, labels) if v is not None),
        key=lambda p: p[0],
    )
    if not pts:
        raise DataError(f"feature {name!r}: all values missing, nothing to discretize")
    values = [p[0] for p in pts]
    class_ids: dict = {}
    ys = [class_ids.setdefault(l, len(class_ids)) for _, l in pts]
    width = len(class_ids)

    # cumulative class counts: cum[i][c] = count of class c among the first i points
    cum = [[0] * width]
    for y in ys:
        row = cum[-1][:]
        row[y] += 1
        cum.append(row)

    def seg_counts(lo, hi):
        return [cum[hi][c] - cum[lo][c] for c in range(width)]

    cuts: list[float] = []
    stack = [(0, len(values))]
    while stack:
        lo, hi = stack.pop()
        n = hi - lo
        if n < 2:
            continue
        counts = seg_counts(lo, hi)
        e_whole = _entropy_bits(counts)
        if e_whole == 0.0:
            continue
        best = None
        for p in range(lo + 1, hi):
            if values[p - 1] == values[p]:
                continue
            left = seg_counts(lo, p)
            right = seg_counts(p, hi)
            e1, e2 = _entropy_bits(left), _entropy_bits(right)
            weighted = ((p - lo) * e1 + (hi - p) * e2) / n
            if best is None or weighted < best[0] - 1e-12:
                best = (weighted, p, left, right, e1, e2)
        if best is None:
            continue
        weighted, p, left, right, e1, e2 = best
        gain = e_whole - weighted
        k = sum(1 for c in counts if c > 0)
        k1 = sum(1 for c in left if c > 0)
        k2 = sum(1 for c in right if c > 0)
        threshold = (
            math.log2(n - 1)
            + math.log2(3**k - 2)
            - k * e_whole
            + k1 * e1
            + k2 * e2
        ) / n
        if gain > threshold:
            cuts.append((values[p - 1] + values[p]) / 2.0)
            stack.append((lo, p))
            stack.append((p, hi))
    return sorted(cuts)


def interval_labels(cuts) -> tuple[str, ...]:
    """Value tokens for the intervals induced by an ascending cut list."""
    cuts = tuple(cuts)
    if not cuts:
        return ("(-inf-inf)",)
    shown = [format(c, "g") for c in cuts]
    if len(set(shown)) != len(shown):
        # cuts too close for the compact format; fall back to full precision
        shown = [repr(c) for c in cuts]
    labels = [f"(-inf-{shown[0]}]"]
    labels += [f"({a}-{b}]" for a, b in zip(shown, shown[1:])]
    labels.append(f"({shown[-1]}-inf)")
    return tuple(labels)


def numeric_feature_indices(d: Dataset) -> list[int]:
    """Features whose every observed token parses as a float (and has one)."""
    out = []
    for x, f in enumerate(d.features):
        if f.kind != CATEGORICAL:
            continue
        seen = {z for inst in d.instances for z in (inst.slots[x],) if z != MISSING}
        if not seen:
            continue
        try:
            for z in seen:
                float(f.values[z])
        except ValueError:
            continue
        out.append(x)
    return out


def _float_column(d: Dataset, x: int) -> list[float | None]:
    name = d.features[x].name
    col = []
    for i, inst in enumerate(d.instances):
        z = inst.slots[x]
        if z == MISSING:
            col.append(None)
            continue
        tok = d.features[x].values[z]
        try:
            col.append(float(tok))
        except ValueError:
            raise DataError(
                f"feature {name!r}: value {tok!r} in instance {i} is not numeric"
            ) from None
    return col


def fit(d: Dataset, method: str, bins: int = 10) -> DiscretizationSpec:
    """Fit cuts for every numeric-looking feature of d.

    Numeric-looking means all observed tokens parse as floats; columns
    with no observed values are skipped. The mdl method uses d's labels.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown discretization method {method!r}")
    if bins < 1:
        raise ConfigError(f"bins must be >= 1, got {bins}")
    cuts: dict[str, tuple[float, ...]] = {}
    label_ids = [inst.label for inst in d.instances]
    for x in numeric_feature_indices(d):
        name = d.features[x].name
        col = _float_column(d, x)
        if method == "binning":
            cs = fit_equal_width(col, bins, name)
        elif method == "frequency":
            cs = fit_equal_frequency(col, bins, name)
        else:
            cs = fit_mdl(col, label_ids, name)
        cuts[name] = tuple(cs)
    return DiscretizationSpec(method, bins, cuts)


def apply(spec: DiscretizationSpec, d: Dataset) -> Dataset:
    """Rewrite the features named in spec into interval values.

    Total on the reals: values beyond the fitted range land in the end
    bins. MISSING slots stay MISSING. Unlisted features pass through.
    """
    by_name = {f.name: x for x, f in enumerate(d.features)}
    for name in spec.cuts:
        if name not in by_name:
            raise DataError(f"spec names feature {name!r} absent from {d.name!r}")

    new_features = []
    bin_of: dict[int, list[int] | None] = {}
    for x, f in enumerate(d.features):
        if f.name not in spec.cuts:
            new_features.append(f)
            bin_of[x] = None
            continue
        cuts = spec.cuts[f.name]
        new_features.append(Feature(f.name, interval_labels(cuts), DISCRETIZED))
        col = _float_column(d, x)
        bin_of[x] = [
            MISSING if v is None else bisect_left(cuts, v) for v in col
        ]

    new_instances = []
    for i, inst in enumerate(d.instances):
        slots = list(inst.slots)
        for x, mapping in bin_of.items():
            if mapping is not None:
                slots[x] = mapping[i]
        new_instances.append(Instance(tuple(slots), inst.label, inst.weight))
    return Dataset(tuple(new_features), tuple(new_instances), d.labels, d.name)
