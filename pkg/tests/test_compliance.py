import itertools

import pytest

from helpers import SCENARIOS, office

from apia.compliance import (
    AUTH_MODES,
    COMPLIANCE_FLUENTS,
    DO,
    OBL_MODES,
    REFRAIN,
    STRONG,
    WEAK,
    ModeConfig,
    compile_policy_dynamics,
    cost_of,
    rank,
    waive_semantics,
)
from apia.domain import Step, ignore_action
from apia.dsl import parse_policy
from apia.errors import DanglingWaiver
from apia.transition import close_defined

GREET = "greet(alice,bob)"
BUSY_ROOM = ["in_room(alice,r4)", "in_room(bob,r4)", "busy_working(bob)"]


def compiled(policy_name, mode=ModeConfig("best-effort", "best-effort")):
    dom = office()
    pol = parse_policy((SCENARIOS / f"{policy_name}.pol").read_text(), dom)
    return compile_policy_dynamics(dom, pol, mode)


def test_policy_compliant_truth_table():
    for auth, obl in itertools.product(AUTH_MODES, OBL_MODES):
        mode = ModeConfig(auth, obl)
        c = compiled("example_a", mode)
        need = set(mode.required_fluents)
        for bits in itertools.product([False, True], repeat=4):
            flags = {f for f, b in zip(COMPLIANCE_FLUENTS, bits) if b}
            for base in (True, False):
                phys = ["in_room(alice,r1)"] + (["greeted_by(alice,bob)"] if base else [])
                defined = close_defined(frozenset(phys) | flags, c.domain)
                want = base and need <= flags
                assert ("policy_compliant(greeted_by(alice,bob))" in defined) == want, (mode, flags, base)


def test_mode_table_shape():
    assert ModeConfig("paranoid", "subordinate").allowed == frozenset()
    assert ModeConfig("cautious", "subordinate").allowed == {"not_permitted"}
    assert ModeConfig("best-effort", "best-effort").forbidden == frozenset()
    assert ModeConfig("subordinate", "utilitarian").required_fluents == (WEAK,)
    assert ModeConfig("paranoid", "subordinate").required_fluents == (STRONG, WEAK, DO, REFRAIN)
    assert ModeConfig().required_fluents == ()
    with pytest.raises(ValueError):
        ModeConfig("reckless", "utilitarian")


def test_weak_action_degrades_and_persists():
    c = compiled("example_b")
    s = c.initial_state(BUSY_ROOM)
    s = c.step(s, frozenset({GREET}))
    assert STRONG not in s.inertial and WEAK in s.inertial
    for _ in range(3):
        s = c.step(s, frozenset({"wait"}))
        assert STRONG not in s.inertial


def test_example_c_both_waivers_keep_compliance():
    c = compiled("example_c")
    s = c.initial_state(BUSY_ROOM)
    plain = c.step(s, frozenset({GREET}))
    assert STRONG not in plain.inertial and WEAK not in plain.inertial
    step = Step(GREET, ("ignore_neg_permitted(greet(alice,bob))", "ignore_not_permitted(greet(alice,bob))"))
    assert c.executable(s, step.actions)[0]
    waived = c.step(s, step.actions)
    assert set(COMPLIANCE_FLUENTS) <= waived.inertial
    assert waived.holds("policy_compliant(greeted_by(alice,bob))")


def test_forbidden_waivers_are_not_executable():
    c = compiled("example_c", ModeConfig("paranoid", "subordinate"))
    s = c.initial_state(BUSY_ROOM)
    ok, reasons = c.executable(s, frozenset({GREET, "ignore_not_permitted(greet(alice,bob))"}))
    assert not ok and reasons


def test_obligation_fluents():
    dom = office()
    pol = parse_policy("obl(knock_on_door(alice, d34))\nobl(neg(greet(alice, bob)))\n"
                       "permitted(knock_on_door(alice, d34))\n", dom)
    c = compile_policy_dynamics(dom, pol, ModeConfig("utilitarian", "best-effort"))
    s = c.initial_state(BUSY_ROOM)
    after = c.step(s, frozenset({GREET}))
    assert DO not in after.inertial and REFRAIN not in after.inertial
    waived = c.step(s, frozenset({GREET, ignore_action("obl_refrain", GREET),
                                  ignore_action("obl_do", "knock_on_door(alice,d34)")}))
    assert {DO, REFRAIN} <= waived.inertial
    kept = c.step(s, frozenset({"knock_on_door(alice,d34)"}))
    assert {DO, REFRAIN} <= kept.inertial


def test_dangling_waiver():
    c = compiled("example_c")
    s = c.initial_state(BUSY_ROOM)
    verdicts = c.verdicts(s)
    with pytest.raises(DanglingWaiver):
        waive_semantics(s, frozenset({"ignore_not_permitted(greet(alice,bob))"}), verdicts, c.domain)
    with pytest.raises(DanglingWaiver):
        waive_semantics(s, frozenset({GREET, ignore_action("obl_do", GREET)}), verdicts, c.domain)


def test_cost_and_rank():
    steps = [Step("a", ("ignore_not_permitted(a)",)), Step("b", ("ignore_neg_permitted(b)", "ignore_not_permitted(b)")),
             Step("c", (ignore_action("obl_refrain", "c"),)), Step("d")]
    assert cost_of(steps) == (1, 2, 1, 4)
    assert rank((1, 2, 1, 4)) == (2, 2, 4)
    # a single non-compliance waiver outranks any number of weak ones
    assert rank((0, 5, 0, 9)) < rank((1, 0, 0, 1))


def test_policy_off_compiles_layer_out():
    dom = office()
    c = compile_policy_dynamics(dom, None, ModeConfig())
    s = c.initial_state(BUSY_ROOM)
    assert not (set(COMPLIANCE_FLUENTS) & s.inertial)
    assert s.holds("policy_compliant(in_room(alice,r4))")
    assert not c.executable(s, frozenset({GREET, "ignore_not_permitted(greet(alice,bob))"}))[0]
