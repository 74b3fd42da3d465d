"""In-memory domain description: declarations, ground laws, statics and activities."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .terms import Fn, parse_ground_atom, render

FLUENT_KINDS = ("inertial", "defined")
ACTION_CLASSES = ("physical", "mental", "policy")
ACTORS = ("agent", "exogenous")
LAW_KINDS = ("dynamic-causal", "state-constraint", "executability")

WAIT = "wait"
AGENT_MENTAL = ("start", "stop")
EXOGENOUS_MENTAL = ("select", "abandon")
SELECT_ALIASES = {"select_goal": "select", "abandon_goal": "abandon"}
IGNORE_ACTIONS = ("ignore_not_permitted", "ignore_neg_permitted", "ignore_obl")
POLICY_ATOMS = ("permitted", "obl")


@dataclass(frozen=True)
class Lit:
    """A condition literal.

    ``kind`` is ``fluent`` (also used for defined and built-in fluents),
    ``action`` (occurrence in the same step) or ``policy``.  For policy
    literals ``atom`` is a derived policy literal such as ``-permitted(a)``
    and ``positive=False`` means default negation (``not``).
    """

    atom: str
    positive: bool = True
    kind: str = "fluent"

    def __str__(self) -> str:
        if self.kind == "policy":
            return self.atom if self.positive else f"not {self.atom}"
        return self.atom if self.positive else f"-{self.atom}"

    def negate(self) -> "Lit":
        return Lit(self.atom, not self.positive, self.kind)


@dataclass(frozen=True)
class Law:
    kind: str
    head: Lit | None
    trigger: str | None = None
    body: tuple[Lit, ...] = ()

    def __str__(self) -> str:
        cond = f" if {', '.join(map(str, self.body))}" if self.body else ""
        if self.kind == "dynamic-causal":
            return f"{self.trigger or '*'} causes {self.head}{cond}"
        if self.kind == "executability":
            return f"impossible {self.trigger}{cond}"
        return f"{self.head}{cond}"


@dataclass(frozen=True)
class FluentDecl:
    name: str
    sorts: tuple[str, ...]
    kind: str


@dataclass(frozen=True)
class ActionDecl:
    name: str
    sorts: tuple[str, ...]
    cls: str
    actor: str


@dataclass(frozen=True)
class StaticDecl:
    name: str
    sorts: tuple[str, ...]


@dataclass(frozen=True)
class Step:
    """One agent action plus the policy actions executed concurrently with it."""

    action: str
    policy_actions: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "policy_actions", tuple(sorted(set(self.policy_actions))))

    @property
    def actions(self) -> frozenset[str]:
        return frozenset((self.action, *self.policy_actions))

    def __str__(self) -> str:
        return " + ".join((self.action, *self.policy_actions))


@dataclass(frozen=True)
class Activity:
    id: int
    goal: str
    components: tuple[Step, ...]

    @property
    def length(self) -> int:
        return len(self.components)

    def __str__(self) -> str:
        body = "; ".join(map(str, self.components))
        return f"activity {self.id} goal {self.goal} do {body}"


def ground_atoms(name: str, sorts: tuple[str, ...], sort_table: Mapping[str, tuple[str, ...]]) -> list[str]:
    if not sorts:
        return [name]
    pools = [sort_table[s] for s in sorts]
    return [render(Fn(name, tuple(Fn(c) for c in combo))) for combo in itertools.product(*pools)]


def atom_name(atom: str) -> str:
    idx = atom.find("(")
    return atom if idx < 0 else atom[:idx]


def atom_args(atom: str) -> tuple[str, ...]:
    term = parse_ground_atom(atom)
    return tuple(render(a) for a in term.args)


def ignore_kind(atom: str) -> tuple[str, str] | None:
    """Return ``(kind, paired action)`` for an ignore action, else ``None``.

    Kinds: ``not_permitted``, ``neg_permitted``, ``obl_do``, ``obl_refrain``.
    """
    name = atom_name(atom)
    if name not in IGNORE_ACTIONS:
        return None
    (inner,) = atom_args(atom)
    if name == "ignore_not_permitted":
        return "not_permitted", inner
    if name == "ignore_neg_permitted":
        return "neg_permitted", inner
    if atom_name(inner) == "neg":
        (a,) = atom_args(inner)
        return "obl_refrain", a
    return "obl_do", inner


def ignore_action(kind: str, action: str) -> str:
    return {
        "not_permitted": f"ignore_not_permitted({action})",
        "neg_permitted": f"ignore_neg_permitted({action})",
        "obl_do": f"ignore_obl({action})",
        "obl_refrain": f"ignore_obl(neg({action}))",
    }[kind]


@dataclass(frozen=True)
class DomainDescription:
    sorts: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    fluents: Mapping[str, FluentDecl] = field(default_factory=dict)
    actions: Mapping[str, ActionDecl] = field(default_factory=dict)
    statics: Mapping[str, StaticDecl] = field(default_factory=dict)
    facts: frozenset[str] = frozenset()
    laws: tuple[Law, ...] = ()
    activities: tuple[Activity, ...] = ()
    # ground built-ins added by the policy layer: atom -> kind / (class, actor)
    builtin_fluents: Mapping[str, str] = field(default_factory=dict)
    builtin_actions: Mapping[str, tuple[str, str]] = field(default_factory=dict)

    @cached_property
    def fluent_table(self) -> dict[str, str]:
        table: dict[str, str] = {}
        for decl in self.fluents.values():
            for atom in ground_atoms(decl.name, decl.sorts, self.sorts):
                table[atom] = decl.kind
        table.update(self.builtin_fluents)
        return table

    @cached_property
    def action_table(self) -> dict[str, tuple[str, str]]:
        table: dict[str, tuple[str, str]] = {}
        for decl in self.actions.values():
            for atom in ground_atoms(decl.name, decl.sorts, self.sorts):
                table[atom] = (decl.cls, decl.actor)
        table.update(self.builtin_actions)
        return table

    @cached_property
    def physical_fluents(self) -> tuple[str, ...]:
        return tuple(sorted(a for a in self.fluent_table if a not in self.builtin_fluents))

    @cached_property
    def inertial_fluents(self) -> tuple[str, ...]:
        return tuple(sorted(a for a, k in self.fluent_table.items() if k == "inertial"))

    @cached_property
    def defined_fluents(self) -> tuple[str, ...]:
        return tuple(sorted(a for a, k in self.fluent_table.items() if k == "defined"))

    @cached_property
    def agent_actions(self) -> tuple[str, ...]:
        """Ground physical agent actions, excluding the built-in ``wait``."""
        return tuple(sorted(a for a, (c, who) in self.action_table.items() if c == "physical" and who == "agent"))

    @cached_property
    def exogenous_actions(self) -> tuple[str, ...]:
        return tuple(sorted(a for a, (c, who) in self.action_table.items() if c == "physical" and who == "exogenous"))

    @cached_property
    def policy_actions(self) -> tuple[str, ...]:
        return tuple(sorted(a for a, (c, _) in self.action_table.items() if c == "policy"))

    def is_fluent(self, atom: str) -> bool:
        return atom in self.fluent_table

    def classify_action(self, atom: str) -> tuple[str, str] | None:
        """``(class, actor)`` of a ground action, covering the built-ins."""
        found = self.action_table.get(atom)
        if found is not None:
            return found
        name = atom_name(atom)
        if atom == WAIT:
            return "physical", "agent"
        if name in AGENT_MENTAL:
            return "mental", "agent"
        if name in EXOGENOUS_MENTAL or name in SELECT_ALIASES:
            return "mental", "exogenous"
        return None

    def is_agent_action(self, atom: str) -> bool:
        info = self.classify_action(atom)
        return info is not None and info[1] == "agent" and info[0] != "policy"

    @cached_property
    def dynamic_laws(self) -> dict[str | None, tuple[Law, ...]]:
        index: dict[str | None, list[Law]] = {}
        for law in self.laws:
            if law.kind == "dynamic-causal":
                index.setdefault(law.trigger, []).append(law)
        return {k: tuple(v) for k, v in index.items()}

    @cached_property
    def executability_laws(self) -> dict[str, tuple[Law, ...]]:
        index: dict[str, list[Law]] = {}
        for law in self.laws:
            if law.kind == "executability":
                index.setdefault(law.trigger, []).append(law)
        return {k: tuple(v) for k, v in index.items()}

    @cached_property
    def constraint_strata(self) -> tuple[tuple[Law, ...], ...]:
        from .transition import stratify

        return stratify(self)

    def activity(self, activity_id: int) -> Activity | None:
        for act in self.activities:
            if act.id == activity_id:
                return act
        return None
