"""Activity clustering, feasibility filtering, and weekly-plan composition.

Everything here is pure given its inputs and seed: clustering is
agglomerative with a total deterministic merge order, and composition
draws from `random.Random(seed)` only, so equal inputs give byte-equal
plans.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Iterable, Mapping, Sequence

from .adherence import FrequencyTable
from .domain import (
    Activity,
    ActivityCluster,
    ActivityKind,
    Plan,
    SlotOrigin,
    UserProfile,
    new_plan,
)
from .errors import NoFeasibleActivity, OverlapViolation, UnknownActivity


@dataclass(frozen=True)
class PlanTemplate:
    """Weekly skeleton: required activity count per kind per day, plus the
    confirmed clusters new behaviours may be drawn from (empty = any)."""

    template_id: str
    kind_mix: Mapping[ActivityKind, int]
    target_clusters: frozenset[str] = frozenset()
    notes: str = ""

    def __post_init__(self):
        if not self.template_id:
            raise ValueError("template_id must be nonempty")
        if any(c < 0 for c in self.kind_mix.values()):
            raise ValueError("kind counts must be nonnegative")
        if self.slots_per_day < 1:
            raise ValueError("kind mix must require at least one slot per day")

    @property
    def slots_per_day(self) -> int:
        return sum(self.kind_mix.values())

    def slot_kinds(self) -> tuple[ActivityKind, ...]:
        """Kind of each slot index within a day, in fixed enum order."""
        out = []
        for kind in ActivityKind:
            out.extend([kind] * self.kind_mix.get(kind, 0))
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "template_id": self.template_id,
            "kind_mix": {k.value: v for k, v in sorted(self.kind_mix.items(), key=lambda kv: kv[0].value)},
            "target_clusters": sorted(self.target_clusters),
            "notes": self.notes,
        }


class SuggestionRationale(str, enum.Enum):
    FrequentHabit = "FrequentHabit"
    NewBehavior = "NewBehavior"


@dataclass(frozen=True)
class Suggestion:
    user_id: str
    activity_id: str
    rationale: SuggestionRationale
    created_at: str

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "activity_id": self.activity_id,
            "rationale": self.rationale.value,
            "created_at": self.created_at,
        }


# -- clustering ---------------------------------------------------------------

def jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def propose_clusters(pool: Sequence[Activity], sim_threshold: float = 0.5) -> list[ActivityCluster]:
    """Average-linkage agglomerative clustering over tag-set similarity.

    Merging continues while the best cluster pair's mean pairwise Jaccard
    similarity is at or above `sim_threshold`.  Ties order by the pair of
    smallest member ids, so reruns on the same pool are identical.
    """
    if not pool:
        raise ValueError("activity pool must be nonempty")
    tags = {a.activity_id: a.tags for a in pool}
    # each cluster is a sorted tuple of member ids, keyed by its smallest id
    clusters: list[tuple[str, ...]] = sorted((a.activity_id,) for a in pool)

    while len(clusters) > 1:
        best = None  # (similarity, pair_key, i, j)
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                ca, cb = clusters[i], clusters[j]
                total = 0.0
                for ma in ca:
                    for mb in cb:
                        total += jaccard(tags[ma], tags[mb])
                sim = total / (len(ca) * len(cb))
                key = tuple(sorted((ca[0], cb[0])))
                if best is None or sim > best[0] or (sim == best[0] and key < best[1]):
                    best = (sim, key, i, j)
        if best is None or best[0] < sim_threshold:
            break
        _, _, i, j = best
        merged = tuple(sorted(clusters[i] + clusters[j]))
        clusters = [c for idx, c in enumerate(clusters) if idx not in (i, j)]
        clusters.append(merged)
        clusters.sort()

    return [
        ActivityCluster(cluster_id=f"c-{idx + 1:03d}", member_ids=frozenset(members))
        for idx, members in enumerate(sorted(clusters))
    ]


def confirm_clusters(proposed: Sequence[ActivityCluster],
                     edits: Iterable[Mapping[str, str]],
                     pool: Sequence[Activity]) -> list[ActivityCluster]:
    """Apply caregiver reassignments and mark the result confirmed.

    Each edit moves one activity into a target cluster (an existing id or a
    fresh one).  Two edits sending the same activity to different clusters
    violate the partition and are rejected.
    """
    known = {a.activity_id for a in pool}
    assignment: dict[str, str] = {}
    for cluster in proposed:
        for member in cluster.member_ids:
            assignment[member] = cluster.cluster_id

    moved: dict[str, str] = {}
    for edit in edits:
        activity_id = edit["activity_id"]
        cluster_id = edit["cluster_id"]
        if activity_id not in known:
            raise UnknownActivity(f"edit references unknown activity {activity_id!r}")
        if not cluster_id:
            raise OverlapViolation("edit has an empty cluster_id")
        if activity_id in moved and moved[activity_id] != cluster_id:
            raise OverlapViolation(
                f"activity {activity_id!r} assigned to both "
                f"{moved[activity_id]!r} and {cluster_id!r}")
        moved[activity_id] = cluster_id
    assignment.update(moved)

    by_cluster: dict[str, set[str]] = {}
    for activity_id, cluster_id in assignment.items():
        by_cluster.setdefault(cluster_id, set()).add(activity_id)
    return [
        ActivityCluster(cluster_id=cid, member_ids=frozenset(members), confirmed=True)
        for cid, members in sorted(by_cluster.items())
    ]


# -- feasibility and composition ----------------------------------------------

def feasible(activity: Activity, profile: UserProfile, freq_table: FrequencyTable) -> bool:
    """Resource check, waived for habits the user already performs."""
    return (activity.required_resources <= profile.resources
            or freq_table.frequent(activity.activity_id))


def _arm_pools(pool: Sequence[Activity], profile: UserProfile,
               freq_table: FrequencyTable,
               clusters: Sequence[ActivityCluster] = (),
               target_clusters: frozenset[str] = frozenset()):
    """Split the feasible pool into the frequent arm and the new-behaviour
    arm; the latter optionally restricted to target-cluster members."""
    allowed = None
    if target_clusters:
        allowed = set()
        for c in clusters:
            if c.cluster_id in target_clusters:
                allowed |= c.member_ids
    frequent: dict[ActivityKind, list[Activity]] = {k: [] for k in ActivityKind}
    infrequent: dict[ActivityKind, list[Activity]] = {k: [] for k in ActivityKind}
    for a in sorted(pool, key=lambda a: a.activity_id):
        if not feasible(a, profile, freq_table):
            continue
        if freq_table.frequent(a.activity_id):
            frequent[a.kind].append(a)
        elif allowed is None or a.activity_id in allowed:
            infrequent[a.kind].append(a)
    return frequent, infrequent


def frequent_target(slots_per_day: int, share: float = 0.7, days: int = 7) -> int:
    return math.ceil(share * days * slots_per_day)


def compose_weekly_plan(profile: UserProfile, template: PlanTemplate,
                        freq_table: FrequencyTable, pool: Sequence[Activity],
                        clusters: Sequence[ActivityCluster],
                        plan_id: str, week_start: date, seed: int,
                        frequent_share: float = 0.7) -> Plan:
    """Fill the 7-day grid, preferring the user's frequent activities for at
    least ceil(share * slots) slots when they exist for the slot's kind.

    Slots are visited in a seeded shuffle so the frequent/new mix spreads
    over the week instead of front-loading; activity picks avoid repeats
    within a day when the arm allows it.
    """
    slot_kinds = template.slot_kinds()
    frequent, infrequent = _arm_pools(pool, profile, freq_table, clusters,
                                      template.target_clusters)
    for kind in ActivityKind:
        if template.kind_mix.get(kind, 0) > 0 and not frequent[kind] and not infrequent[kind]:
            raise NoFeasibleActivity(kind.value)

    rng = random.Random(seed)
    positions = [(d, s) for d in range(7) for s in range(len(slot_kinds))]
    rng.shuffle(positions)
    target = frequent_target(len(slot_kinds), frequent_share)

    used_by_day: dict[int, set[str]] = {d: set() for d in range(7)}
    chosen: dict[tuple[int, int], tuple[str, SlotOrigin]] = {}
    frequent_count = 0
    for d, s in positions:
        kind = slot_kinds[s]
        if frequent_count < target and frequent[kind]:
            arm, origin = frequent[kind], SlotOrigin.Frequent
        elif infrequent[kind]:
            arm, origin = infrequent[kind], SlotOrigin.Infrequent
        else:
            arm, origin = frequent[kind], SlotOrigin.Frequent
        fresh = [a for a in arm if a.activity_id not in used_by_day[d]]
        pick = rng.choice(fresh if fresh else arm)
        used_by_day[d].add(pick.activity_id)
        chosen[(d, s)] = (pick.activity_id, origin)
        if origin is SlotOrigin.Frequent:
            frequent_count += 1

    slots = [
        (week_start + timedelta(days=d), s, activity_id, origin)
        for (d, s), (activity_id, origin) in chosen.items()
    ]
    return new_plan(plan_id=plan_id, user_id=profile.user_id,
                    template_id=template.template_id, week_start=week_start,
                    slots=slots, known_activities={a.activity_id for a in pool},
                    slots_per_day=len(slot_kinds))


def generate_suggestions(profile: UserProfile, freq_table: FrequencyTable,
                         pool: Sequence[Activity], n: int, seed: int,
                         epsilon: float = 0.3, created_at: str = "") -> list[Suggestion]:
    """Epsilon-greedy suggestion batch: exploit a frequent habit with
    probability 1 - epsilon, otherwise explore a new behaviour.  No activity
    repeats within a batch; an empty arm falls back to the other."""
    if n < 1:
        raise ValueError("n must be at least 1")
    frequent_by_kind, infrequent_by_kind = _arm_pools(pool, profile, freq_table)
    frequent = [a for k in ActivityKind for a in frequent_by_kind[k]]
    infrequent = [a for k in ActivityKind for a in infrequent_by_kind[k]]
    frequent.sort(key=lambda a: a.activity_id)
    infrequent.sort(key=lambda a: a.activity_id)
    if not frequent and not infrequent:
        raise NoFeasibleActivity("any")

    rng = random.Random(seed)
    taken: set[str] = set()
    out: list[Suggestion] = []
    for _ in range(n):
        exploit = rng.random() < 1.0 - epsilon
        arms = [frequent, infrequent] if exploit else [infrequent, frequent]
        candidates = [a for a in arms[0] if a.activity_id not in taken]
        if not candidates:
            candidates = [a for a in arms[1] if a.activity_id not in taken]
        if not candidates:
            break
        pick = rng.choice(candidates)
        taken.add(pick.activity_id)
        rationale = (SuggestionRationale.FrequentHabit
                     if freq_table.frequent(pick.activity_id)
                     else SuggestionRationale.NewBehavior)
        out.append(Suggestion(user_id=profile.user_id,
                              activity_id=pick.activity_id,
                              rationale=rationale, created_at=created_at))
    return out
