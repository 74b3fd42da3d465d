"""Command-line front end: automatic runs, a manual stepping REPL and policy checks.

Exit codes: 0 success, 1 usage or input error, 2 policy inconsistency,
3 diagnosis failure.
"""

from __future__ import annotations

import argparse
import cmd
import itertools
import json
import random
import sys
from pathlib import Path
from typing import TextIO

from .compliance import AUTH_MODES, OBL_MODES, ModeConfig, cost_of
from .domain import DomainDescription
from .dsl import parse_domain, parse_policy, parse_scenario
from .errors import ApiaError, DiagnosisFailure, DslError, PolicyInconsistency
from .loop import Simulation
from .planner import plan
from .policy import Policy, check_policy_consistency, derive_verdicts
from .transition import State, make_state

EXIT_OK, EXIT_USAGE, EXIT_POLICY, EXIT_DIAGNOSIS = 0, 1, 2, 3
EXHAUSTIVE_LIMIT = 12
SAMPLE_SIZE = 4096


def _mode_name(text: str) -> str:
    return text.strip().lower().replace("_", "-").replace(" ", "-")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="apia",
        description="Run a policy-aware intentional agent over a scripted scenario.",
    )
    p.add_argument("domain", help="domain description (.dom)")
    p.add_argument("policy", help="policy file (.pol)")
    p.add_argument("scenario", nargs="?", help="scenario file (.scn); optional with --check-policy")
    p.add_argument("--auth-mode", type=_mode_name, choices=list(AUTH_MODES),
                   help="authorization behavior mode (default: from the scenario)")
    p.add_argument("--obl-mode", type=_mode_name, choices=list(OBL_MODES),
                   help="obligation behavior mode (default: from the scenario)")
    p.add_argument("--horizon", type=int, help="maximum plan length (default: from the scenario, else 10)")
    p.add_argument("--max-steps", type=int, default=50, help="stop after this many loop iterations (default: 50)")
    p.add_argument("--manual", action="store_true", help="step through the run interactively")
    p.add_argument("--records", action="store_true", help="emit one JSON record per iteration instead of text")
    p.add_argument("--no-policy", action="store_true", help="compile the policy layer out entirely")
    p.add_argument("--check-policy", action="store_true",
                   help="check the policy for consistency over the domain's states and exit")
    return p


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def policy_states(domain: DomainDescription, policy: Policy) -> tuple[list[State], bool]:
    """States over the inertial fluents the policy conditions mention; ``True`` if the list is exhaustive."""
    mentioned = sorted({lit.atom for r in policy.rules for lit in r.condition if lit.kind == "fluent"})
    relevant = set()
    inertial = set(domain.inertial_fluents)
    for atom in mentioned:
        if atom in inertial:
            relevant.add(atom)
        else:
            # a defined fluent depends on whatever its constraints read
            for law in domain.laws:
                if law.kind == "state-constraint" and law.head.atom == atom:
                    relevant |= {lit.atom for lit in law.body if lit.atom in inertial}
    relevant = sorted(relevant)
    if len(relevant) <= EXHAUSTIVE_LIMIT:
        subsets = itertools.chain.from_iterable(
            itertools.combinations(relevant, k) for k in range(len(relevant) + 1)
        )
        return [make_state(domain, s) for s in subsets], True
    rng = random.Random(0)
    picks = {frozenset(a for a in relevant if rng.random() < 0.5) for _ in range(SAMPLE_SIZE)}
    return [make_state(domain, s) for s in sorted(picks, key=sorted)], False


def _load(args):
    domain = parse_domain(_read(args.domain), args.domain)
    policy = parse_policy(_read(args.policy), domain, args.policy)
    scenario = parse_scenario(_read(args.scenario), domain, args.scenario) if args.scenario else None
    return domain, policy, scenario


def _mode(args, scenario) -> ModeConfig:
    base = scenario.mode if scenario is not None else ModeConfig()
    return ModeConfig(args.auth_mode or base.auth, args.obl_mode or base.obl)


def main(argv: list[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None,
         stdin: TextIO | None = None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.scenario is None and not args.check_policy:
        parser.print_usage(err)
        print("apia: error: a scenario file is required unless --check-policy is given", file=err)
        return EXIT_USAGE
    if args.horizon is not None and args.horizon < 1 or args.max_steps < 0:
        print("apia: error: --horizon must be at least 1 and --max-steps non-negative", file=err)
        return EXIT_USAGE
    try:
        domain, policy, scenario = _load(args)
    except OSError as exc:
        parser.print_usage(err)
        print(f"apia: error: {exc.strerror}: {exc.filename}", file=err)
        return EXIT_USAGE
    except DslError as exc:
        print(str(exc), file=err)
        return EXIT_USAGE

    if args.check_policy:
        states, exhaustive = policy_states(domain, policy)
        report = check_policy_consistency(policy, domain, states)
        scope = "all" if exhaustive else "a sample of"
        print(f"checked {scope} {len(states)} state(s) over the fluents the policy reads", file=out)
        print(report, file=out)
        return EXIT_OK if report.consistent else EXIT_POLICY

    sim = Simulation(domain, None if args.no_policy else policy, scenario, _mode(args, scenario), args.horizon)
    if not args.no_policy:
        report = check_policy_consistency(policy, sim.compiled.domain, [sim.world])
        if not report.consistent:
            print(report, file=out)
            return EXIT_POLICY

    if args.manual:
        shell = ManualShell(sim, args.max_steps, stdin=stdin, stdout=out)
        shell.cmdloop()
        return shell.exit_code

    if not args.records:
        print(f"mode: {sim.mode}  horizon: {sim.horizon}  policy: {'off' if args.no_policy else 'on'}", file=out)
    try:
        while not sim.done() and sim.step_index < args.max_steps:
            record = sim.run_iteration()
            print(json.dumps(record.as_dict(), sort_keys=True) if args.records else record.line(), file=out)
    except PolicyInconsistency as exc:
        print(f"policy inconsistency: {exc}", file=out)
        return EXIT_POLICY
    except DiagnosisFailure as exc:
        print(f"diagnosis failure at step {sim.step_index}: {exc}", file=out)
        return EXIT_DIAGNOSIS
    except ApiaError as exc:
        print(f"apia: error at step {sim.step_index}: {exc}", file=err)
        return EXIT_USAGE
    if not args.records:
        print(f"result: {sim.outcome()} after {sim.step_index} step(s)", file=out)
        print(f"final state: {_physical(sim.world, sim)}", file=out)
    return EXIT_OK


def _physical(state: State, sim: Simulation) -> str:
    physical = set(sim.compiled.base.physical_fluents)
    return ", ".join(sorted(a for a in state.true_atoms if a in physical)) or "-"


def _verdict_lines(state: State, sim: Simulation) -> list[str]:
    if sim.compiled.policy is None:
        return ["policy layer is off"]
    verdicts = derive_verdicts(state, frozenset(), sim.compiled.policy)
    lines = [f"  {atom}" for atom in sorted(verdicts.derived)] or ["  (no policy atom holds)"]
    lines += [f"  defeated: {label}" for label in sorted(verdicts.defeated)]
    lines += [f"  warning: {w}" for w in verdicts.warnings]
    return lines


class ManualShell(cmd.Cmd):
    """Step through a run one loop iteration at a time."""

    intro = "manual mode: type help for commands"
    prompt = "apia> "

    def __init__(self, sim: Simulation, max_steps: int, stdin=None, stdout=None):
        super().__init__(stdin=stdin, stdout=stdout)
        if stdin is not None:
            self.use_rawinput = False
        self.sim = sim
        self.max_steps = max_steps
        self.exit_code = EXIT_OK

    def say(self, text: str = "") -> None:
        print(text, file=self.stdout)

    def emptyline(self) -> bool:
        return False

    def default(self, line: str) -> bool:
        self.say(f"unknown command: {line.split()[0]}")
        self.do_help("")
        return False

    def do_step(self, arg: str) -> bool:
        """step [N]: run N loop iterations (default 1)."""
        try:
            count = int(arg) if arg.strip() else 1
        except ValueError:
            self.say("usage: step [N]")
            return False
        for _ in range(count):
            if self.sim.done() or self.sim.step_index >= self.max_steps:
                self.say("scenario complete")
                return False
            try:
                self.say(self.sim.run_iteration().line())
            except PolicyInconsistency as exc:
                self.say(f"policy inconsistency: {exc}")
                self.exit_code = EXIT_POLICY
                return True
            except DiagnosisFailure as exc:
                self.say(f"diagnosis failure: {exc}")
                self.exit_code = EXIT_DIAGNOSIS
                return True
        return False

    def do_state(self, arg: str) -> bool:
        """state: full valuation of the world at the current step."""
        state = self.sim.world
        self.say(f"state at step {self.sim.step_index}:")
        for atom, value in sorted(state.valuation(self.sim.compiled.domain).items()):
            self.say(f"  {atom} = {'true' if value else 'false'}")
        return False

    def do_diff(self, arg: str) -> bool:
        """diff: fluents and policy atoms that changed since the previous step."""
        states = self.sim.world_states
        if len(states) < 2:
            self.say("nothing to compare yet")
            return False
        before, after = states[-2], states[-1]
        domain = self.sim.compiled.domain
        old, new = before.valuation(domain), after.valuation(domain)
        changed = [a for a in sorted(new) if old.get(a) != new[a] and not a.startswith("policy_compliant(")]
        self.say(f"changes from step {len(states) - 2} to {len(states) - 1}:")
        for atom in changed:
            self.say(f"  {atom}: {str(old.get(atom, False)).lower()} -> {str(new[atom]).lower()}")
        if self.sim.compiled.policy is not None:
            va = derive_verdicts(before, frozenset(), self.sim.compiled.policy)
            vb = derive_verdicts(after, frozenset(), self.sim.compiled.policy)
            for action in sorted(self.sim.compiled.policy.by_action):
                a, b = va.permitted(action), vb.permitted(action)
                if a != b:
                    self.say(f"  permitted({action}): {_tri(a)} -> {_tri(b)}")
        if not changed:
            self.say("  (no fluent changed)")
        return False

    def do_verdicts(self, arg: str) -> bool:
        """verdicts: policy atoms that hold in the current state."""
        self.say(f"policy verdicts at step {self.sim.step_index}:")
        for line in _verdict_lines(self.sim.world, self.sim):
            self.say(line)
        return False

    def do_plan(self, arg: str) -> bool:
        """plan: the intended activity and its cost, or what planning would produce now."""
        sim = self.sim
        mental = sim.mental
        if mental.activity is not None:
            activity = next(a for a in sim.activities if a.id == mental.activity)
            self.say(f"{activity}  (next component {mental.progress + 1}, cost {cost_of(activity.components)})")
            return False
        if mental.active_goal is None:
            self.say("no active goal")
            return False
        state = sim.belief.current if sim.belief is not None else sim.world
        found = plan(state, mental.active_goal, sim.compiled, sim.horizon)
        self.say(str(found))
        return False

    def do_validity(self, arg: str) -> bool:
        """validity: input checks and warnings about the domain and policy."""
        domain = self.sim.compiled.base
        policy = self.sim.compiled.policy
        self.say("every action is classified as physical, mental or policy: ok")
        self.say("every policy statement describes a declared agent action: ok")
        if policy is None:
            self.say("policy layer is off")
            return False
        silent = [a for a in domain.agent_actions if a not in policy.by_action]
        for action in silent:
            self.say(f"warning: no policy statement describes {action}; it is only weakly compliant")
        affected = {law.head.atom for law in domain.laws if law.head is not None}
        for fluent in domain.inertial_fluents:
            if fluent not in affected:
                self.say(f"warning: no law changes {fluent}")
        for line in _verdict_lines(self.sim.world, self.sim):
            if "warning" in line:
                self.say(line.strip())
        return False

    def do_quit(self, arg: str) -> bool:
        """quit: leave manual mode."""
        return True

    do_EOF = do_quit


def _tri(value: bool | None) -> str:
    return "undetermined" if value is None else str(value).lower()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
