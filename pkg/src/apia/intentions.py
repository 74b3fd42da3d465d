"""Mental fluents of the theory of intentions: the active goal and the progress of the intended activity."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .domain import Activity, Step, atom_args, atom_name
from .errors import IntentionError
from .transition import State

__all__ = ["Activity", "MentalState", "Step", "apply_mental_dynamics", "next_physical_action"]


@dataclass(frozen=True)
class MentalState:
    active_goal: str | None = None
    activity: int | None = None  # the single activity with status >= 0
    progress: int = 0

    def status(self, activity_id: int) -> int:
        return self.progress if self.activity == activity_id else -1

    def goal_active(self, goal: str) -> bool:
        return self.active_goal == goal


def _find(activities: Iterable[Activity], activity_id: int) -> Activity:
    for act in activities:
        if act.id == activity_id:
            return act
    raise IntentionError(f"unknown activity {activity_id}")


def apply_mental_dynamics(mental: MentalState, actions: frozenset[str], state: State,
                          activities: Sequence[Activity]) -> MentalState:
    """Mental state after ``actions`` occur; ``state`` is the resulting physical state."""
    goal, current, progress = mental.active_goal, mental.activity, mental.progress
    for atom in sorted(actions):
        name = atom_name(atom)
        if name == "select":
            goal = atom_args(atom)[0]
        elif name == "abandon" and atom_args(atom)[0] == goal:
            goal = None
    starting = [atom for atom in actions if atom_name(atom) == "start"]
    stopping = [atom for atom in actions if atom_name(atom) == "stop"]
    for atom in stopping:
        ident = int(atom_args(atom)[0])
        if current != ident:
            raise IntentionError(f"stop({ident}) but activity {ident} is not active")
        current, progress = None, 0
    for atom in starting:
        ident = int(atom_args(atom)[0])
        if current is not None:
            raise IntentionError(f"start({ident}) while activity {current} is active")
        _find(activities, ident)
        current, progress = ident, 0
    if current is not None and not starting:
        activity = _find(activities, current)
        if progress < activity.length:
            component = activity.components[progress]
            if component.actions <= actions:
                progress += 1
    if goal is not None and state.holds(goal):
        goal = None
    return replace(mental, active_goal=goal, activity=current, progress=progress)


def next_physical_action(mental: MentalState, activities: Sequence[Activity]) -> Step | None:
    """Next component of the intended activity, or ``None`` if there is none left."""
    if mental.activity is None:
        return None
    activity = _find(activities, mental.activity)
    if mental.progress >= activity.length:
        return None
    return activity.components[mental.progress]
