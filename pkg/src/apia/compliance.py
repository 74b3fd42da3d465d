"""Policy fluents, ignore actions and behavior modes layered over the transition engine."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

from .domain import DomainDescription, Law, Lit, ignore_action, ignore_kind
from .errors import DanglingWaiver
from .policy import Policy, PolicyVerdictSet, derive_verdicts
from .transition import State, close_defined, executable, successor

STRONG = "auth_compliance(strong)"
WEAK = "auth_compliance(weak)"
DO = "obl_compliant(do_action)"
REFRAIN = "obl_compliant(refrain_from_action)"
COMPLIANCE_FLUENTS = (STRONG, WEAK, DO, REFRAIN)
IGNORE_KINDS = ("not_permitted", "neg_permitted", "obl_do", "obl_refrain")

# auth mode -> (threshold, ignore kinds the agent may use, each one counted in the plan cost)
AUTH_MODES = {
    "paranoid": ("strong", frozenset()),
    "cautious": ("strong", frozenset({"not_permitted"})),
    "subordinate": ("weak", frozenset()),
    "best-effort": ("strong", frozenset({"not_permitted", "neg_permitted"})),
    "subordinate-when-possible": ("weak", frozenset({"neg_permitted"})),
    "utilitarian": (None, frozenset()),
}
# obl mode -> (obligation fluents required, ignore kinds allowed)
OBL_MODES = {
    "subordinate": (True, frozenset()),
    "permit-omissions": (True, frozenset({"obl_do"})),
    "permit-commissions": (True, frozenset({"obl_refrain"})),
    "best-effort": (True, frozenset({"obl_do", "obl_refrain"})),
    "utilitarian": (False, frozenset()),
}


@dataclass(frozen=True)
class ModeConfig:
    auth: str = "utilitarian"
    obl: str = "utilitarian"

    def __post_init__(self):
        if self.auth not in AUTH_MODES:
            raise ValueError(f"unknown authorization mode {self.auth!r}; expected one of {', '.join(AUTH_MODES)}")
        if self.obl not in OBL_MODES:
            raise ValueError(f"unknown obligation mode {self.obl!r}; expected one of {', '.join(OBL_MODES)}")

    @property
    def threshold(self) -> str | None:
        return AUTH_MODES[self.auth][0]

    @property
    def requires_obligations(self) -> bool:
        return OBL_MODES[self.obl][0]

    @property
    def allowed(self) -> frozenset[str]:
        """Ignore kinds the agent may use; every use is minimized."""
        return AUTH_MODES[self.auth][1] | OBL_MODES[self.obl][1]

    @property
    def forbidden(self) -> frozenset[str]:
        return frozenset(IGNORE_KINDS) - self.allowed

    @property
    def required_fluents(self) -> tuple[str, ...]:
        out = []
        # aiming for strong compliance still ranks weak above non-compliance
        if self.threshold == "strong":
            out += [STRONG, WEAK]
        elif self.threshold == "weak":
            out.append(WEAK)
        if self.requires_obligations:
            out += [DO, REFRAIN]
        return tuple(out)

    def __str__(self) -> str:
        return f"({self.auth}, {self.obl})"


def cost_of(steps: Iterable) -> tuple[int, int, int, int]:
    """Cost vector ``(non-compliance waivers, weak waivers, obligation waivers, length)``."""
    neg = weak = obl = length = 0
    for step in steps:
        length += 1
        for atom in step.policy_actions:
            kind = ignore_kind(atom)[0]
            if kind == "neg_permitted":
                neg += 1
            elif kind == "not_permitted":
                weak += 1
            else:
                obl += 1
    return neg, weak, obl, length


def rank(cost: tuple[int, int, int, int]) -> tuple[int, int, int]:
    """Lexicographic preference: non-compliance and obligation waivers, then weak waivers, then length."""
    neg, weak, obl, length = cost
    return neg + obl, weak, length


@dataclass(eq=False)
class CompiledDomain:
    """A domain with the policy layer compiled in for one behavior mode."""

    domain: DomainDescription
    base: DomainDescription
    policy: Policy | None
    mode: ModeConfig
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def policy_enabled(self) -> bool:
        return self.policy is not None

    def verdicts(self, state: State, actions: frozenset[str] = frozenset()) -> PolicyVerdictSet:
        if self.policy is None:
            return PolicyVerdictSet()
        key = (state.inertial, actions & self.policy.mentioned_actions)
        found = self._cache.get(key)
        if found is None:
            found = derive_verdicts(state, actions, self.policy)
            self._cache[key] = found
        return found

    def executable(self, state: State, actions: frozenset[str]) -> tuple[bool, list[str]]:
        return executable(state, actions, self.domain, self.verdicts(state, actions).derived)

    def step(self, state: State, actions: frozenset[str]) -> State:
        return successor(state, actions, self.domain, self.verdicts(state, actions).derived)

    def initial_state(self, true_physical: Iterable[str]) -> State:
        inertial = frozenset(true_physical)
        if self.policy is not None:
            inertial |= frozenset(COMPLIANCE_FLUENTS)
        return State(inertial, close_defined(inertial, self.domain), 0)

    def fresh(self, state: State) -> State:
        """Same physical state with every compliance fluent restored (a fresh start)."""
        if self.policy is None or frozenset(COMPLIANCE_FLUENTS) <= state.inertial:
            return state
        inertial = state.inertial | frozenset(COMPLIANCE_FLUENTS)
        return State(inertial, close_defined(inertial, self.domain), state.step)

    def compliance(self, state: State) -> dict[str, bool]:
        return {f: f in state.inertial for f in COMPLIANCE_FLUENTS} if self.policy is not None else {}

    def goal_holds(self, state: State, goal: str) -> bool:
        return state.holds(goal)


def compile_policy_dynamics(domain: DomainDescription, policy: Policy | None,
                            mode: ModeConfig) -> CompiledDomain:
    """Add policy fluents, ignore actions and their laws; ``policy=None`` compiles the layer out."""
    physical = domain.physical_fluents
    fluents: dict[str, str] = {f"policy_compliant({f})": "defined" for f in physical}
    laws: list[Law] = []
    actions: dict[str, tuple[str, str]] = {}
    required = mode.required_fluents if policy is not None else ()
    for f in physical:
        body = (Lit(f), *(Lit(r) for r in required))
        laws.append(Law("state-constraint", Lit(f"policy_compliant({f})"), None, body))
    for a in domain.agent_actions:
        np_, neg_ = ignore_action("not_permitted", a), ignore_action("neg_permitted", a)
        do_, ref_ = ignore_action("obl_do", a), ignore_action("obl_refrain", a)
        for atom in (np_, neg_, do_, ref_):
            actions[atom] = ("policy", "agent")
        if policy is None:
            # without a policy there is nothing to waive
            laws += [Law("executability", None, atom, ()) for atom in (np_, neg_, do_, ref_)]
            continue
        fluents.update({f: "inertial" for f in COMPLIANCE_FLUENTS})
        laws += [
            Law("dynamic-causal", Lit(STRONG, False), a,
                (Lit(f"permitted({a})", False, "policy"), Lit(np_, False, "action"))),
            Law("dynamic-causal", Lit(WEAK, False), a,
                (Lit(f"-permitted({a})", True, "policy"), Lit(neg_, False, "action"))),
            Law("dynamic-causal", Lit(DO, False), None,
                (Lit(f"obl({a})", True, "policy"), Lit(a, False, "action"), Lit(do_, False, "action"))),
            Law("dynamic-causal", Lit(REFRAIN, False), a,
                (Lit(f"obl(neg({a}))", True, "policy"), Lit(ref_, False, "action"))),
        ]
        for kind, atom in zip(IGNORE_KINDS, (np_, neg_, do_, ref_)):
            if kind in mode.forbidden:
                laws.append(Law("executability", None, atom, ()))
            elif kind == "obl_do":
                laws.append(Law("executability", None, atom, (Lit(a, True, "action"),)))
            else:
                laws.append(Law("executability", None, atom, (Lit(a, False, "action"),)))
    augmented = replace(
        domain,
        laws=domain.laws + tuple(laws),
        builtin_fluents={**domain.builtin_fluents, **fluents},
        builtin_actions={**domain.builtin_actions, **actions},
    )
    return CompiledDomain(augmented, domain, policy, mode)


def waive_semantics(state: State, actions: frozenset[str], verdicts: PolicyVerdictSet,
                    domain: DomainDescription) -> dict[str, bool]:
    """Compliance fluents that this step turns false, after the step's waivers."""
    for atom in actions:
        found = ignore_kind(atom)
        if found is None:
            continue
        kind, paired = found
        if kind == "obl_do" and paired in actions:
            raise DanglingWaiver(f"{atom} occurs together with {paired}, which it would waive the omission of")
        if kind != "obl_do" and paired not in actions:
            raise DanglingWaiver(f"{atom} occurs without {paired}")
    agent = set(domain.agent_actions)
    lost: set[str] = set()
    for a in actions:
        if a not in agent:
            continue
        allowed = verdicts.permitted(a)
        if allowed is not True and ignore_action("not_permitted", a) not in actions:
            lost.add(STRONG)
        if allowed is False and ignore_action("neg_permitted", a) not in actions:
            lost.add(WEAK)
        if verdicts.obl(a, negated=True) and ignore_action("obl_refrain", a) not in actions:
            lost.add(REFRAIN)
    for b, negated in verdicts.obligations():
        if not negated and b in agent and b not in actions and ignore_action("obl_do", b) not in actions:
            lost.add(DO)
    return {f: False for f in COMPLIANCE_FLUENTS if f in lost and f in state.inertial}
