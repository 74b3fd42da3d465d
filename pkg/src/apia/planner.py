"""On-demand activity generation under a behavior mode's lexicographic objective."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Sequence

from .compliance import DO, REFRAIN, STRONG, WEAK, CompiledDomain, cost_of, rank, waive_semantics
from .domain import Activity, Step, atom_name, ignore_action
from .errors import InconsistentEffects
from .transition import State

_WAIVER_FOR = {STRONG: "not_permitted", WEAK: "neg_permitted", REFRAIN: "obl_refrain", DO: "obl_do"}


@dataclass(frozen=True)
class Plan:
    steps: tuple[Step, ...]
    cost: tuple[int, int, int, int]

    @property
    def rank(self) -> tuple[int, int, int]:
        return rank(self.cost)

    def __str__(self) -> str:
        return f"[{'; '.join(map(str, self.steps))}] cost {self.cost}"


@dataclass(frozen=True)
class Futile:
    goal: str
    horizon: int

    def __str__(self) -> str:
        return f"futile: no admissible plan for {self.goal} within {self.horizon} step(s)"


def required_for(goal: str, compiled: CompiledDomain) -> frozenset[str]:
    if compiled.policy is None or atom_name(goal) != "policy_compliant":
        return frozenset()
    return frozenset(compiled.mode.required_fluents)


def replay(compiled: CompiledDomain, state: State, steps: Sequence[Step]) -> State | None:
    """Run ``steps`` from ``state``; ``None`` as soon as one is not executable."""
    for step in steps:
        ok, _ = compiled.executable(state, step.actions)
        if not ok:
            return None
        try:
            state = compiled.step(state, step.actions)
        except InconsistentEffects:
            return None
    return state


def _expand(compiled: CompiledDomain, state: State, action: str, required: frozenset[str]) -> Step | None:
    """The step running ``action`` with exactly the waivers the goal needs, or ``None`` if it cannot be kept."""
    alone = frozenset({action})
    verdicts = compiled.verdicts(state, alone)
    lost = waive_semantics(state, alone, verdicts, compiled.domain) if compiled.policy is not None else {}
    waivers = []
    allowed = compiled.mode.allowed
    for fluent in sorted(lost):
        if fluent not in required:
            continue
        kind = _WAIVER_FOR[fluent]
        if kind not in allowed:
            return None
        if kind == "obl_do":
            waivers += [ignore_action(kind, b) for b, neg in verdicts.obligations() if not neg and b != action]
        else:
            waivers.append(ignore_action(kind, action))
    return Step(action, tuple(waivers))


def plan(state: State, goal: str, compiled: CompiledDomain, horizon: int = 10) -> Plan | Futile:
    """Cost-minimal plan of at most ``horizon`` steps reaching ``goal`` from ``state``.

    Past compliance is not held against the agent: the search starts with all
    compliance fluents restored.  Ties on cost go to the lexicographically
    smaller step sequence.
    """
    start = compiled.fresh(state)
    if start.holds(goal):
        return Plan((), (0, 0, 0, 0))
    required = required_for(goal, compiled)
    actions = compiled.domain.agent_actions
    counter = itertools.count()
    frontier: list = [((0, 0, 0), (), (0, 0, 0, 0), next(counter), start, ())]
    settled: set[frozenset[str]] = set()
    while frontier:
        _, _, cost, _, current, steps = heapq.heappop(frontier)
        if current.inertial in settled:
            continue
        settled.add(current.inertial)
        if current.holds(goal):
            return Plan(steps, cost)
        if len(steps) >= horizon:
            continue
        for action in actions:
            step = _expand(compiled, current, action, required)
            if step is None:
                continue
            ok, _ = compiled.executable(current, step.actions)
            if not ok:
                continue
            try:
                nxt = compiled.step(current, step.actions)
            except InconsistentEffects:
                continue
            if nxt.inertial in settled:
                continue
            new_steps = steps + (step,)
            new_cost = cost_of(new_steps)
            key = tuple(str(s) for s in new_steps)
            heapq.heappush(frontier, (rank(new_cost), key, new_cost, next(counter), nxt, new_steps))
    return Futile(goal, horizon)


def activity_cost(compiled: CompiledDomain, state: State, activity: Activity) -> tuple[int, int, int, int] | None:
    """Cost of running a stored activity from ``state``, or ``None`` if it is inadmissible."""
    end = replay(compiled, compiled.fresh(state), activity.components)
    if end is None or not end.holds(activity.goal):
        return None
    return cost_of(activity.components)


def prefer_stored(activities: Sequence[Activity], state: State, goal: str,
                  compiled: CompiledDomain) -> Activity | None:
    """Cheapest stored activity for ``goal`` that is executable, admissible and goal-achieving now."""
    best = None
    for activity in activities:
        if activity.goal != goal:
            continue
        cost = activity_cost(compiled, state, activity)
        if cost is None:
            continue
        key = (rank(cost), activity.length, activity.id)
        if best is None or key < best[0]:
            best = (key, activity)
    return None if best is None else best[1]
