import itertools
import random

import pytest

from helpers import SCENARIOS, all_states, office, random_domain_text, random_policy_text

from apia.compliance import ModeConfig, compile_policy_dynamics
from apia.dsl import parse_domain, parse_policy
from apia.errors import PolicyInconsistency
from apia.policy import (
    ComplianceClass,
    blocker,
    check_policy_consistency,
    classify_action_set,
    classify_trajectory,
    combine,
    contrary,
    derive_verdicts,
)
from apia.transition import make_state

GREET = "greet(alice,bob)"


def policy(name, dom=None):
    dom = dom or office()
    return parse_policy((SCENARIOS / f"{name}.pol").read_text(), dom)


def at(*atoms):
    return make_state(office(), atoms)


def test_example_a_permits_everything_agent_does():
    pol = policy("example_a")
    verdicts = derive_verdicts(at("in_room(alice,r1)", "in_room(bob,r4)"), frozenset(), pol)
    for action in office().agent_actions:
        assert verdicts.permitted(action) is True


def test_example_b_greet_conditions():
    pol = policy("example_b")
    idle = at("in_room(alice,r4)", "in_room(bob,r4)")
    busy = at("in_room(alice,r4)", "in_room(bob,r4)", "busy_working(bob)")
    knocked = at("in_room(alice,r4)", "in_room(bob,r4)", "busy_working(bob)", "knocked_on_door(d34)")
    assert derive_verdicts(idle, frozenset(), pol).permitted(GREET) is True
    assert derive_verdicts(busy, frozenset(), pol).permitted(GREET) is None
    assert derive_verdicts(knocked, frozenset(), pol).permitted(GREET) is True


def test_example_c_strict_prohibition_wins():
    pol = policy("example_c")
    busy = at("in_room(alice,r4)", "in_room(bob,r4)", "busy_working(bob)", "knocked_on_door(d34)")
    assert derive_verdicts(busy, frozenset(), pol).permitted(GREET) is False
    idle = at("in_room(alice,r4)", "in_room(bob,r4)")
    assert derive_verdicts(idle, frozenset(), pol).permitted(GREET) is True


def test_example_d_prefer_defeats_m1():
    pol = policy("example_d")
    verdicts = derive_verdicts(at("in_room(alice,r3)", "in_room(bob,r4)"), frozenset(), pol)
    assert verdicts.permitted("move_through(alice,d34)") is False
    assert "m1(alice,d34)" in verdicts.defeated
    assert verdicts.permitted("move_through(alice,d12)") is True
    # from inside the office the prohibition does not apply
    inside = derive_verdicts(at("in_room(alice,r4)", "in_room(bob,r4)"), frozenset(), pol)
    assert inside.permitted("move_through(alice,d34)") is True


def test_unresolved_conflict_is_undetermined_with_warning():
    dom = office()
    pol = parse_policy("a: normally permitted(greet(alice, bob))\nb: normally -permitted(greet(alice, bob))\n", dom)
    verdicts = derive_verdicts(at("in_room(alice,r1)"), frozenset(), pol)
    assert verdicts.permitted(GREET) is None
    assert any("unresolved" in w for w in verdicts.warnings)
    pol = parse_policy("a: normally permitted(greet(alice, bob))\nb: normally -permitted(greet(alice, bob))\n"
                       "prefer(b, a)\n", dom)
    verdicts = derive_verdicts(at("in_room(alice,r1)"), frozenset(), pol)
    assert verdicts.permitted(GREET) is False and not verdicts.warnings


def test_obligation_blocks_defeasible_prohibition():
    dom = office()
    pol = parse_policy("obl(greet(alice, bob))\nnormally -permitted(greet(alice, bob))\n", dom)
    verdicts = derive_verdicts(at(), frozenset(), pol)
    assert verdicts.obl(GREET) is True
    assert verdicts.permitted(GREET) is None


def test_strict_contradiction_raises():
    dom = office()
    pol = parse_policy((SCENARIOS / "inconsistent.pol").read_text(), dom)
    with pytest.raises(PolicyInconsistency) as info:
        derive_verdicts(at(), frozenset(), pol)
    assert len(info.value.rules) == 2


def test_consistency_report_lines():
    dom = parse_domain("fluent inertial p\naction physical agent a\n")
    pol = parse_policy("permitted(a)\n-permitted(a) if p\n", dom)
    compiled = compile_policy_dynamics(dom, pol, ModeConfig())
    report = check_policy_consistency(pol, compiled.domain, list(all_states(compiled, ["p"])))
    assert not report.consistent
    assert report.checked == 2
    assert len(report.lines()) == 1
    assert report.lines()[0].startswith("inconsistent\tstate=")
    assert "p" in report.lines()[0].split("\t")[1]


def test_condition_on_actions():
    dom = office()
    pol = parse_policy("obl(knock_on_door(A, d34)) if greet(A, bob)\n", dom)
    s = at()
    assert derive_verdicts(s, frozenset({GREET}), pol).obl("knock_on_door(alice,d34)") is True
    assert derive_verdicts(s, frozenset(), pol).obl("knock_on_door(alice,d34)") is None


def test_classification():
    dom = office()
    pol = policy("example_b")
    busy = at("in_room(alice,r4)", "in_room(bob,r4)", "busy_working(bob)")
    assert classify_action_set(busy, frozenset({GREET}), pol, dom) == ComplianceClass("weak")
    assert classify_action_set(busy, frozenset({"wait"}), pol, dom) == ComplianceClass("strong")
    c = policy("example_c")
    assert classify_action_set(busy, frozenset({GREET}), c, dom).authorization == "non-compliant"
    assert combine([]) == ComplianceClass()
    assert combine([ComplianceClass("weak"), ComplianceClass("strong", "non-compliant")]) == \
        ComplianceClass("weak", "non-compliant")


def test_trajectory_classes_for_examples_a_and_b():
    dom = office()
    start = at("in_room(alice,r1)", "in_room(bob,r4)")
    moves = [frozenset({f"move_through(alice,{d})"}) for d in ("d12", "d23", "d34")]
    walk = moves + [frozenset({GREET})]
    assert classify_trajectory(start, walk, policy("example_a"), dom) == ComplianceClass()
    busy_walk = moves[:2] + [moves[2] | {"begin_working(bob)"}, frozenset({GREET})]
    assert classify_trajectory(start, busy_walk, policy("example_b"), dom).authorization == "weak"
    assert classify_trajectory(start, busy_walk, policy("example_b"), dom, now=10) == ComplianceClass()


# independent stable-model oracle ---------------------------------------------


def oracle(pol, state, actions):
    """Guess-and-check stable models of the ground program; ``None`` when there are none."""
    true = state.true_atoms

    def holds(cond):
        return all((lit.atom in (actions if lit.kind == "action" else true)) == lit.positive for lit in cond)

    live = [r for r in pol.rules if holds(r.condition)]
    ab = set()
    for winner, loser in pol.prefer:
        if any(r.label == winner for r in live):
            ab.add(loser)
    facts = {r.head for r in live if not r.defeasible}
    soft = [r for r in live if r.defeasible and r.label not in ab]
    candidates = sorted({r.head for r in soft} - facts)

    def violated(model):
        for lit in model:
            if contrary(lit) in model:
                return True
            subject = lit[lit.index("(") + 1:-1]
            if lit.startswith("obl(") and not lit.startswith("obl(neg("):
                if f"-permitted({subject})" in model:
                    return True
            if lit.startswith("obl(neg("):
                if f"permitted({subject[4:-1]})" in model:
                    return True
        return False

    if violated(facts):
        return None
    models = []
    for k in range(len(candidates) + 1):
        for chosen in itertools.combinations(candidates, k):
            model = facts | set(chosen)
            # reduct: keep rule d iff neither contrary nor blocker is in the guess
            least = facts | {r.head for r in soft
                             if contrary(r.head) not in model and blocker(r.head, r.action) not in model}
            if least == model and not violated(model):
                models.append(frozenset(model))
    if not models:
        return None
    return frozenset.intersection(*models), len(set(models)) > 1


def test_verdicts_match_stable_model_oracle():
    rng = random.Random(1234)
    compared = 0
    for _ in range(150):
        dom = parse_domain(random_domain_text(rng, 3, 3))
        pol = parse_policy(random_policy_text(rng, 3, 3, 8), dom)
        for bits in itertools.product([False, True], repeat=3):
            state = make_state(dom, [f for f, b in zip(dom.inertial_fluents, bits) if b])
            expected = oracle(pol, state, frozenset())
            if expected is None:
                with pytest.raises(PolicyInconsistency):
                    derive_verdicts(state, frozenset(), pol)
                continue
            got = derive_verdicts(state, frozenset(), pol)
            assert got.derived == expected[0]
            assert bool(got.warnings) == expected[1]
            compared += 1
            # blocking symmetry
            for a in dom.agent_actions:
                assert not (got.obl(a) is True and got.permitted(a) is False)
                assert not (got.obl(a, negated=True) is True and got.permitted(a) is True)
            # defeat soundness: a defeated rule never is the only source of its head
            for r in pol.rules:
                if r.label in got.defeated and r.head in got.derived:
                    assert any(o.head == r.head and o.label not in got.defeated for o in pol.rules)
    assert compared > 500
