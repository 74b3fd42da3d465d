"""Physical transition relation: direct effects, inertia, defined-fluent closure, executability."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .domain import DomainDescription, Law, Lit, atom_name
from .errors import InconsistentEffects


@dataclass(frozen=True)
class State:
    """Closed-world valuation: fluents absent from ``inertial``/``defined`` are false."""

    inertial: frozenset[str]
    defined: frozenset[str] = frozenset()
    step: int = 0

    @cached_property
    def true_atoms(self) -> frozenset[str]:
        return self.inertial | self.defined

    def holds(self, atom: str) -> bool:
        return atom in self.true_atoms

    def satisfies(self, lit: Lit) -> bool:
        return (lit.atom in self.true_atoms) == lit.positive

    def valuation(self, domain: DomainDescription) -> dict[str, bool]:
        return {f: f in self.true_atoms for f in (*domain.inertial_fluents, *domain.defined_fluents)}


def body_holds(body: Iterable[Lit], true_atoms: frozenset[str] | set[str],
               actions: frozenset[str] = frozenset(), policy_facts: frozenset[str] = frozenset()) -> bool:
    for lit in body:
        if lit.kind == "fluent":
            pool = true_atoms
        elif lit.kind == "action":
            pool = actions
        else:
            pool = policy_facts
        if (lit.atom in pool) != lit.positive:
            return False
    return True


def stratify(domain: DomainDescription) -> tuple[tuple[Law, ...], ...]:
    """Group state constraints by the stratum of their head predicate.

    Raises ``ValueError`` when a defined fluent depends negatively on itself.
    """
    constraints = [law for law in domain.laws if law.kind == "state-constraint"]
    defined_names = {atom_name(a) for a in domain.defined_fluents}
    level = {name: 0 for name in defined_names}
    limit = len(defined_names) + 1
    changed = True
    while changed:
        changed = False
        for law in constraints:
            head = atom_name(law.head.atom)
            for lit in law.body:
                if lit.kind != "fluent":
                    continue
                dep = atom_name(lit.atom)
                if dep not in defined_names:
                    continue
                need = level[dep] + (0 if lit.positive else 1)
                if level[head] < need:
                    level[head] = need
                    changed = True
                    if need > limit:
                        raise ValueError(f"defined fluent {head} depends negatively on itself")
    strata: dict[int, list[Law]] = {}
    for law in constraints:
        strata.setdefault(level[atom_name(law.head.atom)], []).append(law)
    return tuple(tuple(strata[k]) for k in sorted(strata))


def close_defined(inertial: frozenset[str], domain: DomainDescription) -> frozenset[str]:
    """Least fixpoint of the state constraints, stratum by stratum."""
    true = set(inertial)
    derived: set[str] = set()
    for stratum in domain.constraint_strata:
        changed = True
        while changed:
            changed = False
            for law in stratum:
                head = law.head.atom
                if head in derived:
                    continue
                if body_holds(law.body, true):
                    derived.add(head)
                    true.add(head)
                    changed = True
    return frozenset(derived)


def make_state(domain: DomainDescription, true_inertial: Iterable[str], step: int = 0) -> State:
    inertial = frozenset(true_inertial)
    unknown = inertial.difference(domain.inertial_fluents)
    if unknown:
        raise ValueError(f"not inertial fluents: {sorted(unknown)}")
    return State(inertial, close_defined(inertial, domain), step)


def check_action_set(actions: frozenset[str], domain: DomainDescription) -> None:
    agent = []
    for atom in actions:
        info = domain.classify_action(atom)
        if info is None:
            raise ValueError(f"unknown action {atom}")
        cls, actor = info
        if actor == "agent" and cls != "policy":
            agent.append(atom)
    if len(agent) > 1:
        raise ValueError(f"more than one agent action in one step: {sorted(agent)}")


def executable(state: State, actions: frozenset[str], domain: DomainDescription,
               policy_facts: frozenset[str] = frozenset()) -> tuple[bool, list[str]]:
    """Return ``(ok, blocking laws)``; ``ok`` is false iff some executability law fires."""
    check_action_set(actions, domain)
    reasons = []
    true = state.true_atoms
    for atom in sorted(actions):
        for law in domain.executability_laws.get(atom, ()):
            if body_holds(law.body, true, actions, policy_facts):
                reasons.append(str(law))
    return not reasons, reasons


def direct_effects(state: State, actions: frozenset[str], domain: DomainDescription,
                   policy_facts: frozenset[str] = frozenset()) -> dict[str, tuple[bool, Law]]:
    effects: dict[str, tuple[bool, Law]] = {}
    true = state.true_atoms
    laws: list[Law] = list(domain.dynamic_laws.get(None, ()))
    for atom in sorted(actions):
        laws.extend(domain.dynamic_laws.get(atom, ()))
    for law in laws:
        if not body_holds(law.body, true, actions, policy_facts):
            continue
        fluent, value = law.head.atom, law.head.positive
        prior = effects.get(fluent)
        if prior is not None and prior[0] != value:
            raise InconsistentEffects(fluent, (prior[1], law))
        effects[fluent] = (value, law)
    return effects


def successor(state: State, actions: frozenset[str], domain: DomainDescription,
              policy_facts: frozenset[str] = frozenset()) -> State:
    """Deterministic successor; caller guarantees executability."""
    effects = direct_effects(state, actions, domain, policy_facts)
    inertial = set(state.inertial)
    for fluent, (value, _) in effects.items():
        if value:
            inertial.add(fluent)
        else:
            inertial.discard(fluent)
    frozen = frozenset(inertial)
    return State(frozen, close_defined(frozen, domain), state.step + 1)
