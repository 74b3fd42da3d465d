"""The observe-interpret-act control loop with minimal abductive diagnosis."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

from .compliance import CompiledDomain, ModeConfig, compile_policy_dynamics
from .domain import WAIT, Activity, DomainDescription, Lit, Step
from .dsl import Scenario
from .errors import DiagnosisFailure, InconsistentEffects, ScenarioError
from .intentions import MentalState, apply_mental_dynamics, next_physical_action
from .planner import Plan, plan, prefer_stored, replay
from .policy import Policy
from .transition import State

log = logging.getLogger(__name__)

WAIT_STEP = Step(WAIT)


@dataclass
class History:
    """Append-only record of what the agent attempted, saw happen, and observed."""

    initial: tuple[Lit, ...] = ()
    observations: dict[int, list[Lit]] = field(default_factory=dict)
    attempts: dict[int, Step] = field(default_factory=dict)
    executed: dict[int, bool] = field(default_factory=dict)
    events: dict[int, list[str]] = field(default_factory=dict)

    def observed_at(self, step: int) -> list[Lit]:
        lits = list(self.observations.get(step, ()))
        if step == 0:
            lits = list(self.initial) + lits
        return lits


@dataclass(frozen=True)
class BeliefModel:
    abduced: tuple[tuple[int, str], ...]
    states: tuple[State, ...]
    action_sets: tuple[frozenset[str], ...]

    @property
    def current(self) -> State:
        return self.states[-1]


def _reconstruct(history: History, compiled: CompiledDomain, now: int,
                 abduced: Sequence[tuple[int, str]]) -> BeliefModel | None:
    facts = compiled.domain.facts
    for step in range(now + 1):
        for lit in history.observed_at(step):
            if lit.kind == "static" and (lit.atom in facts) != lit.positive:
                return None
    start = [lit.atom for lit in history.observed_at(0) if lit.kind == "fluent" and lit.positive]
    state = compiled.initial_state(start)
    states, sets = [state], []
    extra: dict[int, list[str]] = {}
    for step, action in abduced:
        extra.setdefault(step, []).append(action)
    for t in range(now):
        exo = frozenset(history.events.get(t, ())) | frozenset(extra.get(t, ()))
        ok, _ = compiled.executable(state, exo)
        if not ok:
            return None
        attempt = history.attempts.get(t)
        acts = exo
        if attempt is not None:
            with_agent = exo | attempt.actions
            ok, _ = compiled.executable(state, with_agent)
            if ok != history.executed.get(t, True):
                return None
            if ok:
                acts = with_agent
        try:
            state = compiled.step(state, acts)
        except InconsistentEffects:
            return None
        if not all(state.satisfies(lit) for lit in history.observed_at(t + 1) if lit.kind == "fluent"):
            return None
        states.append(state)
        sets.append(acts)
    if not all(states[0].satisfies(lit) for lit in history.observed_at(0) if lit.kind == "fluent"):
        return None
    return BeliefModel(tuple(abduced), tuple(states), tuple(sets))


def interpret(history: History, compiled: CompiledDomain, now: int,
              prior: Sequence[tuple[int, str]] = (), bound: int = 2) -> BeliefModel:
    """Belief trajectory explaining the history, abducing as few unobserved exogenous actions as possible.

    Earlier abductions are kept.  Among minimal explanations the one whose
    ``(action, -step)`` list is lexicographically smallest wins, which places
    unobserved actions as late as the observations allow.
    """
    model = _reconstruct(history, compiled, now, prior)
    if model is not None:
        return model
    taken = set(prior)
    candidates = sorted(
        ((t, a) for t in range(now) for a in compiled.domain.exogenous_actions if (t, a) not in taken),
        key=lambda c: (c[1], -c[0]),
    )
    for size in range(1, bound + 1):
        for combo in itertools.combinations(candidates, size):
            model = _reconstruct(history, compiled, now, tuple(prior) + combo)
            if model is not None:
                return model
    raise DiagnosisFailure(f"no explanation of the observations up to step {now} with at most {bound} unobserved action(s)")


def goal_viable(compiled: CompiledDomain, state: State, activity: Activity, progress: int) -> bool:
    end = replay(compiled, compiled.fresh(state), activity.components[progress:])
    return end is not None and end.holds(activity.goal)


def select_intended(state: State, mental: MentalState, compiled: CompiledDomain,
                    activities: list[Activity], horizon: int = 10) -> tuple[Step, str]:
    """Intended step for this iteration and a short note explaining the choice.

    A freshly planned activity is appended to ``activities``.
    """
    if mental.activity is not None:
        activity = next(a for a in activities if a.id == mental.activity)
        stop = Step(f"stop({activity.id})")
        if mental.active_goal is None:
            achieved = compiled.fresh(state).holds(activity.goal)
            return stop, "goal achieved" if achieved else "goal no longer active"
        if mental.progress >= activity.length:
            return stop, "activity finished"
        if not goal_viable(compiled, state, activity, mental.progress):
            return stop, "remaining activity no longer achieves the goal"
        return next_physical_action(mental, activities), ""
    goal = mental.active_goal
    if goal is None:
        return WAIT_STEP, ""
    stored = prefer_stored(activities, state, goal, compiled)
    if stored is not None:
        return Step(f"start({stored.id})"), f"stored activity {stored.id}"
    found = plan(state, goal, compiled, horizon)
    if not isinstance(found, Plan) or not found.steps:
        return WAIT_STEP, "futile"
    ident = max((a.id for a in activities), default=0) + 1
    activities.append(Activity(ident, goal, found.steps))
    return Step(f"start({ident})"), f"planned activity {ident} = {found}"


@dataclass(frozen=True)
class TraceRecord:
    step: int
    abduced: tuple[str, ...]
    goal: str | None
    activity: str
    intended: str
    outcome: str
    events: tuple[str, ...]
    observed: tuple[str, ...]
    compliance: tuple[tuple[str, bool], ...]
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "step": self.step,
            "abduced": list(self.abduced),
            "goal": self.goal,
            "activity": self.activity,
            "intended": self.intended,
            "outcome": self.outcome,
            "events": list(self.events),
            "observed": list(self.observed),
            "compliance": dict(self.compliance),
            "note": self.note,
        }

    def line(self) -> str:
        def join(items):
            return ", ".join(items) if items else "-"

        comp = " ".join(f"{k.split('(')[1][:-1]}={'T' if v else 'F'}" for k, v in self.compliance) or "-"
        text = (
            f"step {self.step:>3} | abduced: {join(self.abduced)} | goal: {self.goal or '-'} | "
            f"activity: {self.activity} | intended: {self.intended} | outcome: {self.outcome} | "
            f"events: {join(self.events)} | observed: {join(self.observed)} | compliance: {comp}"
        )
        return text + (f" | note: {self.note}" if self.note else "")


class Simulation:
    """Runs the agent against a scripted world, one loop iteration at a time."""

    def __init__(self, domain: DomainDescription, policy: Policy | None, scenario: Scenario,
                 mode: ModeConfig | None = None, horizon: int | None = None, bound: int = 2):
        self.scenario = scenario
        self.mode = mode or scenario.mode
        self.horizon = horizon or scenario.horizon
        self.bound = bound
        self.compiled = compile_policy_dynamics(domain, policy, self.mode)
        self.activities: list[Activity] = list(domain.activities)
        self.history = History(initial=scenario.initial)
        for obs in scenario.observations:
            if obs.step == 0:
                self.history.observations.setdefault(0, []).append(obs.lit)
        start = [lit.atom for lit in scenario.initial if lit.kind == "fluent" and lit.positive]
        self.world = self.compiled.initial_state(start)
        self.world_states: list[State] = [self.world]
        self.mental = MentalState()
        self.step_index = 0
        self.abduced: tuple[tuple[int, str], ...] = ()
        self.belief: BeliefModel | None = None
        self.trace: list[TraceRecord] = []
        self.futile = False

    def pending_inputs(self) -> bool:
        n = self.step_index
        return any(e.step >= n for e in self.scenario.events) or any(
            o.step > n for o in self.scenario.observations
        )

    def done(self) -> bool:
        if self.pending_inputs():
            return False
        idle = self.mental.activity is None
        return idle and (self.mental.active_goal is None or self.futile)

    def run_iteration(self) -> TraceRecord:
        n = self.step_index
        compiled = self.compiled
        belief = interpret(self.history, compiled, n, self.abduced, self.bound)
        new = belief.abduced[len(self.abduced):]
        self.abduced = belief.abduced
        self.belief = belief
        current = belief.current
        goal = self.mental.active_goal
        if goal is not None and compiled.fresh(current).holds(goal):
            self.mental = replace(self.mental, active_goal=None)
        status = self._status()
        goal_text = self.mental.active_goal

        intended, note = select_intended(current, self.mental, compiled, self.activities, self.horizon)
        self.futile = note == "futile"

        events = self.scenario.events_at(n)
        exo_all = frozenset(e.action for e in events)
        observed_events = sorted(e.action for e in events if not e.hidden)
        ok, reasons = compiled.executable(self.world, exo_all)
        if not ok:
            raise ScenarioError(f"scripted events at step {n} are not executable: {'; '.join(reasons)}")
        attempt = exo_all | intended.actions
        ok, reasons = compiled.executable(self.world, attempt)
        self.world = compiled.step(self.world, attempt if ok else exo_all)
        self.world_states.append(self.world)

        self.history.attempts[n] = intended
        self.history.executed[n] = ok
        if observed_events:
            self.history.events[n] = observed_events
        new_obs = self.scenario.observations_at(n + 1)
        if new_obs:
            self.history.observations[n + 1] = list(new_obs)

        done_acts = frozenset(observed_events) | (intended.actions if ok else frozenset())
        predicted = compiled.step(current, done_acts) if compiled.executable(current, done_acts)[0] else current
        self.mental = apply_mental_dynamics(self.mental, done_acts, compiled.fresh(predicted), self.activities)

        record = TraceRecord(
            step=n,
            abduced=tuple(f"{a}@{t}" for t, a in new),
            goal=goal_text,
            activity=status,
            intended=str(intended),
            outcome="executed" if ok else "non-executable",
            events=tuple(observed_events),
            observed=tuple(f"{lit}@{n + 1}" for lit in new_obs),
            compliance=tuple(compiled.compliance(current).items()),
            note=note if ok else f"{note}; blocked by {'; '.join(reasons)}".lstrip("; "),
        )
        self.trace.append(record)
        self.step_index = n + 1
        return record

    def _status(self) -> str:
        if self.mental.activity is None:
            return "-"
        activity = next(a for a in self.activities if a.id == self.mental.activity)
        return f"{activity.id}:{self.mental.progress}/{activity.length}"

    def outcome(self) -> str:
        """Why the run stopped, or would stop now."""
        if not self.done():
            return "step cap reached"
        if self.mental.active_goal is not None:
            return "goal futile"
        goals = [r.goal for r in self.trace if r.goal]
        if goals and self.compiled.fresh(self.world).holds(goals[-1]):
            return "goal achieved"
        return "no active goal"

    def run(self, max_steps: int = 50) -> list[TraceRecord]:
        while not self.done() and self.step_index < max_steps:
            self.run_iteration()
        return self.trace

    def executed_actions(self) -> list[tuple[int, str]]:
        """``(step, action)`` for every agent action that actually ran, policy actions excluded."""
        return [(t, s.action) for t, s in sorted(self.history.attempts.items()) if self.history.executed[t]]
