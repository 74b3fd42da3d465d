"""Authorization and obligation policies: verdict derivation, consistency checks, compliance classes.

Verdicts are the skeptical consequences of the ground policy at one state:
strict rules fire on their condition; a defeasible rule fires unless it is
defeated through ``prefer``, its contrary is derived, or the cross-modality
literal that blocks it is derived.  Atoms derived in every answer set are
decided, everything else is undetermined.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .domain import DomainDescription, Lit, WAIT
from .errors import PolicyInconsistency
from .transition import State, body_holds, executable, successor

log = logging.getLogger(__name__)

MODALITIES = ("permitted", "-permitted", "obl", "-obl")
AUTH_LEVELS = ("non-compliant", "weak", "strong")


def contrary(literal: str) -> str:
    return literal[1:] if literal.startswith("-") else f"-{literal}"


def blocker(literal: str, action: str) -> str | None:
    """The literal whose presence blocks a defeasible rule with this head."""
    return {
        f"permitted({action})": f"obl(neg({action}))",
        f"-permitted({action})": f"obl({action})",
        f"obl({action})": f"-permitted({action})",
        f"obl(neg({action}))": f"permitted({action})",
    }.get(literal)


@dataclass(frozen=True)
class PolicyRule:
    modality: str
    action: str
    negated: bool = False  # obl(neg(a)) / -obl(neg(a))
    condition: tuple[Lit, ...] = ()
    defeasible: bool = False
    label: str | None = None

    @property
    def head(self) -> str:
        sign = "-" if self.modality.startswith("-") else ""
        base = self.modality.lstrip("-")
        subject = f"neg({self.action})" if self.negated else self.action
        return f"{sign}{base}({subject})"

    def __str__(self) -> str:
        prefix = f"{self.label}: normally " if self.defeasible else ""
        cond = f" if {', '.join(map(str, self.condition))}" if self.condition else ""
        return f"{prefix}{self.head}{cond}"


@dataclass(frozen=True)
class Policy:
    rules: tuple[PolicyRule, ...] = ()
    prefer: frozenset[tuple[str, str]] = frozenset()

    @cached_property
    def by_action(self) -> dict[str, tuple[PolicyRule, ...]]:
        index: dict[str, list[PolicyRule]] = {}
        for rule in self.rules:
            index.setdefault(rule.action, []).append(rule)
        return {k: tuple(v) for k, v in index.items()}

    @cached_property
    def by_label(self) -> dict[str, tuple[PolicyRule, ...]]:
        index: dict[str, list[PolicyRule]] = {}
        for rule in self.rules:
            if rule.label is not None:
                index.setdefault(rule.label, []).append(rule)
        return {k: tuple(v) for k, v in index.items()}

    @cached_property
    def mentioned_actions(self) -> frozenset[str]:
        """Actions that appear inside rule conditions (these make verdicts depend on the step)."""
        return frozenset(lit.atom for r in self.rules for lit in r.condition if lit.kind == "action")

    def __str__(self) -> str:
        lines = [str(r) for r in self.rules]
        lines += [f"prefer({a}, {b})" for a, b in sorted(self.prefer)]
        return "\n".join(lines)


@dataclass(frozen=True)
class PolicyVerdictSet:
    derived: frozenset[str] = frozenset()
    defeated: frozenset[str] = frozenset()
    warnings: tuple[str, ...] = ()

    def permitted(self, action: str) -> bool | None:
        if f"permitted({action})" in self.derived:
            return True
        if f"-permitted({action})" in self.derived:
            return False
        return None

    def obl(self, action: str, negated: bool = False) -> bool | None:
        subject = f"neg({action})" if negated else action
        if f"obl({subject})" in self.derived:
            return True
        if f"-obl({subject})" in self.derived:
            return False
        return None

    def obligations(self) -> list[tuple[str, bool]]:
        """``(action, negated)`` for every derived ``obl`` atom."""
        out = []
        for lit in self.derived:
            if lit.startswith("obl(neg("):
                out.append((lit[len("obl(neg("):-2], True))
            elif lit.startswith("obl("):
                out.append((lit[len("obl("):-1], False))
        return sorted(out)


_EMPTY = PolicyVerdictSet()


def _defeated(policy: Policy, true: frozenset[str], actions: frozenset[str]) -> frozenset[str]:
    out = set()
    for winner, loser in policy.prefer:
        if any(body_holds(r.condition, true, actions) for r in policy.by_label.get(winner, ())):
            out.add(loser)
    return frozenset(out)


def _answer_sets(strict: set[str], defeasible: list[PolicyRule], action: str) -> list[frozenset[str]]:
    """Stable models of one action's ground rules (conditions already decided)."""
    heads = sorted({r.head for r in defeasible} - strict)
    models = []
    for size in range(len(heads) + 1):
        for chosen in itertools.combinations(heads, size):
            model = strict | set(chosen)
            supported = {
                r.head for r in defeasible
                if contrary(r.head) not in model and blocker(r.head, action) not in model
            }
            if supported - strict != set(chosen):
                continue
            if _violations(model, action):
                continue
            models.append(frozenset(model))
    return models


def _violations(model: set[str] | frozenset[str], action: str) -> list[str]:
    bad = []
    for lit in model:
        if contrary(lit) in model and not lit.startswith("-"):
            bad.append(f"{lit} and {contrary(lit)}")
    if f"obl({action})" in model and f"-permitted({action})" in model:
        bad.append(f"obl({action}) with -permitted({action})")
    if f"obl(neg({action}))" in model and f"permitted({action})" in model:
        bad.append(f"obl(neg({action})) with permitted({action})")
    return bad


def derive_verdicts(state: State, actions: frozenset[str], policy: Policy) -> PolicyVerdictSet:
    """Policy atoms that hold at ``state`` when ``actions`` occur."""
    if not policy.rules:
        return _EMPTY
    true = state.true_atoms
    defeated = _defeated(policy, true, actions)
    derived: set[str] = set()
    warnings: list[str] = []
    for action, rules in sorted(policy.by_action.items()):
        live = [r for r in rules if body_holds(r.condition, true, actions)]
        if not live:
            continue
        strict_rules = [r for r in live if not r.defeasible]
        strict = {r.head for r in strict_rules}
        bad = _violations(strict, action)
        if bad:
            raise PolicyInconsistency(
                f"strict policy rules contradict each other at step {state.step}: {'; '.join(sorted(bad))}",
                tuple(strict_rules),
            )
        soft = [r for r in live if r.defeasible and r.label not in defeated]
        if not soft:
            derived |= strict
            continue
        models = _answer_sets(strict, soft, action)
        if not models:
            raise PolicyInconsistency(f"no consistent reading of the policy for {action}", tuple(live))
        common = frozenset.intersection(*models)
        if len(models) > 1:
            undecided = sorted(frozenset.union(*models) - common)
            warnings.append(f"unresolved defeasible conflict on {action}: {', '.join(undecided)}")
        derived |= common
    return PolicyVerdictSet(frozenset(derived), defeated, tuple(warnings))


@dataclass(frozen=True)
class ConsistencyReport:
    checked: int
    violations: tuple[tuple[State, frozenset[str], str], ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def consistent(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        """Machine-readable records, one violating state per line."""
        out = []
        for state, actions, message in self.violations:
            out.append(
                f"inconsistent\tstate={','.join(sorted(state.inertial)) or '-'}"
                f"\tactions={','.join(sorted(actions)) or '-'}\t{message}"
            )
        return out

    def __str__(self) -> str:
        if self.consistent:
            head = f"policy consistent over {self.checked} state(s)"
        else:
            head = f"policy INCONSISTENT in {len(self.violations)} of {self.checked} state(s)"
        return "\n".join([head, *self.lines(), *(f"warning\t{w}" for w in self.warnings)])


def check_policy_consistency(policy: Policy, domain: DomainDescription,
                             states: Iterable[State]) -> ConsistencyReport:
    """Run verdict derivation over a state sample, listing every failing state."""
    action_sets = [frozenset()]
    if policy.mentioned_actions:
        action_sets += [frozenset({a}) for a in domain.agent_actions]
    violations = []
    warnings: set[str] = set()
    count = 0
    for state in states:
        count += 1
        for acts in action_sets:
            try:
                verdicts = derive_verdicts(state, acts, policy)
            except PolicyInconsistency as exc:
                violations.append((state, acts, str(exc)))
                break
            warnings.update(verdicts.warnings)
    return ConsistencyReport(count, tuple(violations), tuple(sorted(warnings)))


@dataclass(frozen=True)
class ComplianceClass:
    authorization: str = "strong"
    obligation: str = "compliant"

    @property
    def auth_rank(self) -> int:
        return AUTH_LEVELS.index(self.authorization)

    def __str__(self) -> str:
        return f"{self.authorization}/{self.obligation}"


def classify_action_set(state: State, actions: frozenset[str], policy: Policy,
                        domain: DomainDescription | None = None) -> ComplianceClass:
    """Definition-style compliance of the agent's actions occurring at ``state``.

    Only physical agent actions are judged; ``wait``, mental, policy and
    exogenous actions are excluded.
    """
    verdicts = derive_verdicts(state, actions, policy)
    judged = [a for a in actions if _judged(a, domain)]
    auth = "strong"
    for action in judged:
        allowed = verdicts.permitted(action)
        if allowed is False:
            auth = "non-compliant"
            break
        if allowed is None:
            auth = "weak"
    obligation = "compliant"
    for action, negated in verdicts.obligations():
        if negated == (action in actions):
            obligation = "non-compliant"
    return ComplianceClass(auth, obligation)


def _judged(action: str, domain: DomainDescription | None) -> bool:
    if action == WAIT:
        return False
    if domain is None:
        return not action.startswith(("ignore_", "start(", "stop(", "select(", "abandon("))
    info = domain.classify_action(action)
    return info == ("physical", "agent")


def combine(classes: Sequence[ComplianceClass]) -> ComplianceClass:
    """Pointwise lift: worst authorization, conjunction of obligation compliance."""
    auth = min((c.auth_rank for c in classes), default=2)
    obligation = "compliant" if all(c.obligation == "compliant" for c in classes) else "non-compliant"
    return ComplianceClass(AUTH_LEVELS[auth], obligation)


def classify_trajectory(initial: State, action_sets: Sequence[frozenset[str]], policy: Policy,
                        domain: DomainDescription, now: int = 0) -> ComplianceClass:
    """Compliance of the steps at index ``now`` and later; earlier steps count as compliant."""
    state = initial
    classes = []
    for index, actions in enumerate(action_sets):
        verdicts = derive_verdicts(state, actions, policy).derived
        ok, reasons = executable(state, actions, domain, verdicts)
        if not ok:
            raise ValueError(f"step {index} is not executable: {'; '.join(reasons)}")
        if index >= now:
            classes.append(classify_action_set(state, actions, policy, domain))
        state = successor(state, actions, domain, verdicts)
    return combine(classes)
