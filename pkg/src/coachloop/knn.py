"""Incremental k-nearest-neighbour classifier over mixed-type features.

Distance is Gower-style: per-field terms in [0, 1] (min-max normalized
absolute difference for numerics, 0/1 mismatch for categoricals, Jaccard
distance for tag sets), combined as a weighted mean.  Models are immutable
snapshots; an update returns a new versioned snapshot, so readers can keep
querying old ones.

All tie-breaking is total and deterministic: neighbours order by
(distance, instance_id); vote ties resolve to the nearest tied label.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .errors import EmptyTrainingSet, SchemaMismatch
from .features import FeatureVector

EXPORT_SCHEMA_VERSION = 1


class InstanceSource(str, enum.Enum):
    CaregiverAssignment = "CaregiverAssignment"
    CaregiverRefinement = "CaregiverRefinement"
    Simulated = "Simulated"


class PredictionStatus(str, enum.Enum):
    Ok = "Ok"
    ColdStart = "ColdStart"


@dataclass(frozen=True)
class FieldRange:
    lo: float
    hi: float

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi


@dataclass(frozen=True)
class NormStats:
    """Observed min/max per numeric field, in schema order."""

    ranges: tuple[tuple[str, FieldRange], ...]

    def as_mapping(self) -> dict[str, FieldRange]:
        return dict(self.ranges)


@dataclass(frozen=True)
class LabeledInstance:
    instance_id: str
    features: FeatureVector
    label: str
    source: InstanceSource
    created_at: str  # ISO timestamp, recorded for audit

    def __post_init__(self):
        if not self.label:
            raise ValueError("label must be nonempty")

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "features": self.features.to_dict(),
            "label": self.label,
            "source": self.source.value,
            "created_at": self.created_at,
        }


@dataclass(frozen=True)
class Prediction:
    label: str
    confidence: float
    neighbor_ids: tuple[str, ...]
    status: PredictionStatus

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "confidence": self.confidence,
            "neighbor_ids": list(self.neighbor_ids),
            "status": self.status.value,
        }


def fit_normalizer(instances: Sequence[LabeledInstance]) -> NormStats:
    """Per-field min/max over the training set; a single instance (or equal
    values) leaves the field degenerate so it contributes zero distance."""
    if not instances:
        raise EmptyTrainingSet("cannot fit a normalizer on zero instances")
    names = [n for n, _ in instances[0].features.numeric]
    lows = [v for _, v in instances[0].features.numeric]
    highs = list(lows)
    for inst in instances[1:]:
        for j, (_, v) in enumerate(inst.features.numeric):
            if v < lows[j]:
                lows[j] = v
            elif v > highs[j]:
                highs[j] = v
    return NormStats(ranges=tuple(
        (names[j], FieldRange(lows[j], highs[j])) for j in range(len(names))
    ))


def _check_same_schema(a: FeatureVector, b: FeatureVector) -> None:
    if a.schema_id != b.schema_id or a.field_names != b.field_names:
        raise SchemaMismatch(f"{a.schema_id!r} vs {b.schema_id!r}")


def distance(a: FeatureVector, b: FeatureVector, norm: NormStats,
             weights: Mapping[str, float] | None = None) -> float:
    """Weighted Gower distance in [0, 1] (under any nonnegative weights)."""
    _check_same_schema(a, b)
    weights = weights or {}
    ranges = norm.as_mapping()

    acc = 0.0
    wsum = 0.0
    for (name, va), (_, vb) in zip(a.numeric, b.numeric):
        w = weights.get(name, 1.0)
        if w < 0:
            raise ValueError(f"negative weight for field {name!r}")
        r = ranges[name]
        if r.degenerate:
            d = 0.0
        else:
            d = abs(va - vb) / (r.hi - r.lo)
            if d > 1.0:
                d = 1.0
        acc += w * d
        wsum += w
    for (name, va), (_, vb) in zip(a.categorical, b.categorical):
        w = weights.get(name, 1.0)
        if w < 0:
            raise ValueError(f"negative weight for field {name!r}")
        acc += w * (0.0 if va == vb else 1.0)
        wsum += w
    for (name, va), (_, vb) in zip(a.setvalued, b.setvalued):
        w = weights.get(name, 1.0)
        if w < 0:
            raise ValueError(f"negative weight for field {name!r}")
        if va or vb:
            d = 1.0 - len(va & vb) / len(va | vb)
        else:
            d = 0.0
        acc += w * d
        wsum += w
    if wsum <= 0.0:
        raise ValueError("at least one field weight must be positive")
    return acc / wsum


@dataclass
class KnnModel:
    """Instance store plus normalization; treat instances as append-only."""

    schema_id: str
    default_label: str
    k: int = 5
    weights: dict[str, float] = field(default_factory=dict)
    instances: tuple[LabeledInstance, ...] = ()
    norm: NormStats | None = None
    version: int = 0

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError("k must be an odd positive integer")
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("weights must be nonnegative")

    def __len__(self) -> int:
        return len(self.instances)


def add_labeled_instance(model: KnnModel, features: FeatureVector, label: str,
                         source: InstanceSource, instance_id: str | None = None,
                         created_at: str = "") -> KnnModel:
    """Append one instance and refit normalization; returns a new snapshot."""
    if model.instances:
        _check_same_schema(model.instances[0].features, features)
    elif features.schema_id != model.schema_id:
        raise SchemaMismatch(f"{features.schema_id!r} vs model {model.schema_id!r}")
    if instance_id is None:
        instance_id = f"i-{len(model.instances) + 1:06d}"
    inst = LabeledInstance(instance_id=instance_id, features=features,
                           label=label, source=InstanceSource(source),
                           created_at=created_at)
    instances = model.instances + (inst,)
    return replace(model, instances=instances, norm=fit_normalizer(instances),
                   version=model.version + 1)


def knn_predict(model: KnnModel, query: FeatureVector) -> Prediction:
    """Majority vote among the k' = min(k, n) nearest instances.

    Ordering ties on distance break by smaller instance_id; vote ties break
    to the label of the nearest neighbour holding a tied label.
    """
    n = len(model.instances)
    if n == 0:
        return Prediction(label=model.default_label, confidence=0.0,
                          neighbor_ids=(), status=PredictionStatus.ColdStart)
    _check_same_schema(model.instances[0].features, query)

    ranked = _rank_neighbors(model, query)
    kprime = min(model.k, n)
    neighbors = ranked[:kprime]

    votes: dict[str, int] = {}
    for _, _, label in neighbors:
        votes[label] = votes.get(label, 0) + 1
    top = max(votes.values())
    tied = {label for label, c in votes.items() if c == top}
    if len(tied) == 1:
        winner = next(iter(tied))
    else:
        winner = next(label for _, _, label in neighbors if label in tied)

    return Prediction(
        label=winner,
        confidence=top / kprime,
        neighbor_ids=tuple(iid for _, iid, _ in neighbors),
        status=PredictionStatus.Ok,
    )


def _rank_neighbors(model: KnnModel, query: FeatureVector) -> list[tuple[float, str, str]]:
    """All instances as (distance, instance_id, label), ascending."""
    norm = model.norm
    assert norm is not None
    weights = model.weights

    # aligned per-field constants, hoisted out of the instance loop
    num_fields = [
        (j, weights.get(name, 1.0), rng)
        for j, (name, rng) in enumerate(norm.ranges)
    ]
    spans = []
    for _, _, rng in num_fields:
        spans.append(None if rng.degenerate else (rng.hi - rng.lo))
    qnum = [v for _, v in query.numeric]
    qcat = [v for _, v in query.categorical]
    qset = [v for _, v in query.setvalued]
    wcat = [weights.get(name, 1.0) for name, _ in query.categorical]
    wset = [weights.get(name, 1.0) for name, _ in query.setvalued]
    # accumulate in field order, same as distance(), so results match exactly
    wsum = 0.0
    for _, w, _ in num_fields:
        wsum += w
    for w in wcat:
        wsum += w
    for w in wset:
        wsum += w
    if wsum <= 0.0:
        raise ValueError("at least one field weight must be positive")
    nnum = len(qnum)
    ncat = len(qcat)
    nset = len(qset)

    out = []
    for inst in model.instances:
        f = inst.features
        acc = 0.0
        for j in range(nnum):
            _, w, _ = num_fields[j]
            span = spans[j]
            if span is None:
                d = 0.0
            else:
                d = abs(qnum[j] - f.numeric[j][1]) / span
                if d > 1.0:
                    d = 1.0
            acc += w * d
        for j in range(ncat):
            acc += wcat[j] * (0.0 if qcat[j] == f.categorical[j][1] else 1.0)
        for j in range(nset):
            a = qset[j]
            b = f.setvalued[j][1]
            if a or b:
                d = 1.0 - len(a & b) / len(a | b)
            else:
                d = 0.0
            acc += wset[j] * d
        out.append((acc / wsum, inst.instance_id, inst.label))
    out.sort(key=lambda t: (t[0], t[1]))
    return out


# -- export / import ---------------------------------------------------------

def export_model(model: KnnModel) -> str:
    """Canonical JSON document; byte-stable for equal models."""
    doc = {
        "schema_version": EXPORT_SCHEMA_VERSION,
        "schema_id": model.schema_id,
        "default_label": model.default_label,
        "k": model.k,
        "version": model.version,
        "weights": dict(sorted(model.weights.items())),
        "norm": None if model.norm is None else {
            name: [r.lo, r.hi] for name, r in model.norm.ranges
        },
        "instances": [inst.to_dict() for inst in model.instances],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def import_model(text: str | bytes) -> KnnModel:
    doc = json.loads(text)
    if doc.get("schema_version") != EXPORT_SCHEMA_VERSION:
        raise SchemaMismatch(f"unsupported export version {doc.get('schema_version')!r}")
    instances = tuple(
        LabeledInstance(
            instance_id=rec["instance_id"],
            features=FeatureVector.from_dict(rec["features"]),
            label=rec["label"],
            source=InstanceSource(rec["source"]),
            created_at=rec["created_at"],
        )
        for rec in doc["instances"]
    )
    norm = None
    if doc["norm"] is not None and instances:
        order = [n for n, _ in instances[0].features.numeric]
        norm = NormStats(ranges=tuple(
            (name, FieldRange(float(doc["norm"][name][0]), float(doc["norm"][name][1])))
            for name in order
        ))
    return KnnModel(
        schema_id=doc["schema_id"],
        default_label=doc["default_label"],
        k=int(doc["k"]),
        weights={k: float(v) for k, v in doc["weights"].items()},
        instances=instances,
        norm=norm,
        version=int(doc["version"]),
    )
