"""Shared fixtures data, random domain generators and brute-force oracles for the tests."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

from apia.compliance import COMPLIANCE_FLUENTS, ModeConfig, compile_policy_dynamics, cost_of, rank
from apia.domain import Step, ignore_action
from apia.dsl import parse_domain, parse_policy, parse_scenario
from apia.errors import InconsistentEffects
from apia.loop import Simulation

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"

MODES = {
    "paranoid": ModeConfig("paranoid", "subordinate"),
    "best-effort": ModeConfig("best-effort", "best-effort"),
    "utilitarian": ModeConfig("utilitarian", "utilitarian"),
}


def office():
    return parse_domain((SCENARIOS / "office.dom").read_text(), "office.dom")


def load(example: str, domain_file: str = "office.dom", policy: str | None = None):
    domain = parse_domain((SCENARIOS / domain_file).read_text(), domain_file)
    pol = parse_policy((SCENARIOS / (policy or f"{example}.pol")).read_text(), domain)
    scn = parse_scenario((SCENARIOS / f"{example}.scn").read_text(), domain)
    return domain, pol, scn


def run_example(example: str, mode: ModeConfig | None, policy_on: bool = True, domain_file: str = "office.dom",
                max_steps: int = 40) -> Simulation:
    domain, pol, scn = load(example, domain_file)
    sim = Simulation(domain, pol if policy_on else None, scn, mode)
    sim.run(max_steps)
    return sim


def intended(sim: Simulation) -> list[tuple[int, str]]:
    return [(r.step, r.intended) for r in sim.trace]


# random toy domains ---------------------------------------------------------


def random_domain_text(rng: random.Random, n_fluents: int, n_actions: int, defined: bool = False) -> str:
    fl = [f"f{i}" for i in range(n_fluents)]
    lines = [f"fluent inertial {f}" for f in fl]
    lines += [f"action physical agent a{i}" for i in range(n_actions)]
    if defined:
        lines.append("fluent defined g")

    def lit(f):
        return f if rng.random() < 0.5 else f"-{f}"

    for i in range(n_actions):
        # distinct head fluents, so one action never has contradictory effects
        for target in rng.sample(fl, min(len(fl), rng.randint(1, 2))):
            head = lit(target)
            cond = ""
            if rng.random() < 0.5:
                other = rng.choice([f for f in fl if f.lstrip("-") != head.lstrip("-")] or fl)
                cond = f" if {lit(other)}"
            lines.append(f"a{i} causes {head}{cond}")
        if rng.random() < 0.3:
            lines.append(f"impossible a{i} if {lit(rng.choice(fl))}")
    if defined:
        for _ in range(rng.randint(1, 2)):
            body = ", ".join(lit(f) for f in rng.sample(fl, min(2, len(fl))))
            lines.append(f"g if {body}")
    return "\n".join(lines) + "\n"


def random_policy_text(rng: random.Random, n_fluents: int, n_actions: int, max_rules: int,
                       with_obligations: bool = True, defeasible: bool = True) -> str:
    """Random policy; retried by callers until it is consistent."""
    fl = [f"f{i}" for i in range(n_fluents)]
    lines = []
    labels = []
    heads = ["permitted({a})", "-permitted({a})"]
    if with_obligations:
        heads += ["obl({a})", "obl(neg({a}))", "-obl({a})"]
    for k in range(rng.randint(0, max_rules)):
        a = f"a{rng.randrange(n_actions)}"
        head = rng.choice(heads).format(a=a)
        cond = ""
        if rng.random() < 0.6:
            picks = rng.sample(fl, rng.randint(1, min(2, len(fl))))
            cond = " if " + ", ".join(f if rng.random() < 0.5 else f"-{f}" for f in picks)
        if defeasible and rng.random() < 0.5:
            label = f"r{k}"
            labels.append(label)
            lines.append(f"{label}: normally {head}{cond}")
        else:
            lines.append(f"{head}{cond}")
    if len(labels) >= 2 and rng.random() < 0.5:
        x, y = rng.sample(labels, 2)
        lines.append(f"prefer({x}, {y})")
    return "\n".join(lines) + "\n"


def all_states(compiled, fluents):
    for bits in itertools.product([False, True], repeat=len(fluents)):
        yield compiled.initial_state([f for f, b in zip(fluents, bits) if b])


# brute-force planning oracle ------------------------------------------------


def _step_options(compiled, state, action):
    """Every step built from ``action`` and any non-dangling set of ignore actions."""
    agent = compiled.base.agent_actions
    own = [ignore_action(k, action) for k in ("not_permitted", "neg_permitted", "obl_refrain")]
    others = [ignore_action("obl_do", b) for b in agent if b != action]
    pool = own + others
    for size in range(len(pool) + 1):
        for extra in itertools.combinations(pool, size):
            yield Step(action, tuple(sorted(extra)))


def brute_force_plan(compiled, start, goal, horizon):
    """Minimum rank over every action sequence of length <= horizon, or ``None`` when nothing works.

    For a fixed sequence of physical actions the physical trajectory and the
    policy verdicts are fixed, and ignore actions touch only the compliance
    fluents at their own step, so the cheapest waiver set is chosen per step
    after trying every subset.
    """
    required = [f for f in COMPLIANCE_FLUENTS if f in compiled.mode.required_fluents]
    fresh = compiled.fresh(start)
    best_step: dict = {}

    def cheapest(state, action):
        key = (state.inertial, action)
        if key not in best_step:
            found = None
            for step in _step_options(compiled, state, action):
                ok, _ = compiled.executable(state, step.actions)
                if not ok:
                    continue
                try:
                    nxt = compiled.step(state, step.actions)
                except InconsistentEffects:
                    continue
                if any(f not in nxt.inertial for f in required):
                    continue
                cost = cost_of([step])
                if found is None or rank(cost) < rank(found[0]):
                    found = (cost, nxt)
            best_step[key] = found
        return best_step[key]

    if fresh.holds(goal):
        return (0, 0, 0)
    best = None
    actions = compiled.base.agent_actions
    for length in range(1, horizon + 1):
        for seq in itertools.product(actions, repeat=length):
            state, total = fresh, (0, 0, 0, 0)
            for action in seq:
                found = cheapest(state, action)
                if found is None:
                    break
                cost, state = found
                total = tuple(x + y for x, y in zip(total, cost))
            else:
                if state.holds(goal) and (best is None or rank(total) < best):
                    best = rank(total)
    return best


def compile_random(rng, n_fluents, n_actions, max_rules, mode):
    from apia.errors import PolicyInconsistency
    from apia.policy import check_policy_consistency

    while True:
        domain = parse_domain(random_domain_text(rng, n_fluents, n_actions))
        policy = parse_policy(random_policy_text(rng, n_fluents, n_actions, max_rules), domain)
        compiled = compile_policy_dynamics(domain, policy, mode)
        fluents = list(domain.inertial_fluents)
        try:
            report = check_policy_consistency(policy, compiled.domain, list(all_states(compiled, fluents)))
        except PolicyInconsistency:
            continue
        if report.consistent:
            return domain, policy, compiled
