"""Readers for ``.dom``, ``.pol`` and ``.scn`` files.

All three formats are line oriented: one statement per line, ``%`` starts a
comment.  Rules may use variables (capitalised names); they are instantiated
over the declared sorts while reading, and static atoms in conditions are
decided at that point, so everything handed to the engine is ground.
See ``docs/grammar.md`` for the full grammar.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .compliance import ModeConfig
from .domain import (
    ACTORS,
    AGENT_MENTAL,
    EXOGENOUS_MENTAL,
    IGNORE_ACTIONS,
    SELECT_ALIASES,
    WAIT,
    ActionDecl,
    Activity,
    DomainDescription,
    FluentDecl,
    Law,
    Lit,
    StaticDecl,
    Step,
    atom_name,
)
from .errors import Diagnostic, DslError
from .policy import Policy, PolicyRule
from .terms import DslSyntaxError, Fn, LineParser, RawLiteral, Term, Var, render, substitute, variables

RESERVED = {
    "sort", "fluent", "static", "fact", "action", "impossible", "causes", "if", "activity",
    "goal", "do", "normally", "prefer", "permitted", "obl", "neg", "not", "policy_compliant",
    "auth_compliance", "obl_compliant", "initially", "observe", "event", "mode", "horizon",
    "hidden", WAIT, *AGENT_MENTAL, *EXOGENOUS_MENTAL, *SELECT_ALIASES, *IGNORE_ACTIONS,
}


def _lines(text: str) -> Iterator[tuple[int, str]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("%", 1)[0].rstrip()
        if stripped.strip():
            yield number, stripped


class _Collector:
    def __init__(self, source: str):
        self.source = source
        self.diagnostics: list[Diagnostic] = []

    def run(self, number: int, func: Callable[[], None]) -> None:
        try:
            func()
        except DslSyntaxError as exc:
            self.diagnostics.append(Diagnostic(number, exc.col, exc.message, self.source))

    def add(self, number: int, col: int, message: str) -> None:
        self.diagnostics.append(Diagnostic(number, col, message, self.source))

    def raise_if_any(self) -> None:
        if self.diagnostics:
            raise DslError(sorted(self.diagnostics, key=lambda d: (d.line, d.col)))


class _Grounder:
    """Variable instantiation against declared sorts and signatures."""

    def __init__(self, sorts, fluents, actions, statics, facts):
        self.sorts = sorts
        self.fluents = fluents
        self.actions = actions
        self.statics = statics
        self.facts = facts

    def category(self, name: str) -> str | None:
        if name in self.fluents:
            return "fluent"
        if name in self.statics:
            return "static"
        if name in self.actions:
            return "action"
        return None

    def signature(self, name: str) -> tuple[str, ...]:
        for table in (self.fluents, self.statics, self.actions):
            if name in table:
                return table[name].sorts
        raise KeyError(name)

    def check_shape(self, term: Term, col: int) -> None:
        if not isinstance(term, Fn):
            raise DslSyntaxError(col, f"expected an atom, found variable {term}")
        sorts = self.signature(term.name)
        if len(term.args) != len(sorts):
            raise DslSyntaxError(col, f"{term.name} expects {len(sorts)} argument(s), got {len(term.args)}")
        for arg, sort in zip(term.args, sorts):
            if isinstance(arg, Fn):
                if arg.args:
                    raise DslSyntaxError(col, f"nested term {render(arg)} in {term.name}")
                if arg.name not in self.sorts[sort]:
                    raise DslSyntaxError(col, f"{arg.name} is not of sort {sort}")

    def bindings(self, typed: list[tuple[Fn, int]], comparisons: list[RawLiteral],
                 static_lits: list[RawLiteral], extra: Iterable[Term] = ()) -> Iterator[dict[str, str]]:
        domains: dict[str, tuple[str, ...]] = {}
        for term, col in typed:
            self.check_shape(term, col)
            for arg, sort in zip(term.args, self.signature(term.name)):
                if isinstance(arg, Var):
                    pool = self.sorts[sort]
                    if arg.name in domains:
                        keep = set(pool)
                        domains[arg.name] = tuple(c for c in domains[arg.name] if c in keep)
                    else:
                        domains[arg.name] = pool
        for lit in static_lits:
            self.check_shape(lit.term, lit.col)
            for arg, sort in zip(lit.term.args, self.signature(lit.term.name)):
                if isinstance(arg, Var) and arg.name not in domains:
                    domains[arg.name] = self.sorts[sort]
        mentioned = set()
        for lit in comparisons:
            mentioned |= set(variables(lit.term)) | set(variables(lit.rhs))
        for term in extra:
            mentioned |= set(variables(term))
        unsafe = sorted(mentioned - domains.keys())
        if unsafe:
            raise DslSyntaxError(comparisons[0].col if comparisons else 1, f"unsafe variable(s): {', '.join(unsafe)}")
        names = sorted(domains)
        for combo in itertools.product(*(domains[n] for n in names)):
            binding = dict(zip(names, combo))
            if all(_compare(lit, binding) for lit in comparisons) and all(
                (render(substitute(lit.term, binding)) in self.facts) == (lit.negation != "-")
                for lit in static_lits
            ):
                yield binding


def _compare(lit: RawLiteral, binding: dict[str, str]) -> bool:
    left = render(substitute(lit.term, binding))
    right = render(substitute(lit.rhs, binding))
    return (left == right) == (lit.op == "=")


@dataclass
class _Body:
    typed: list[tuple[Fn, int]] = field(default_factory=list)
    comparisons: list[RawLiteral] = field(default_factory=list)
    statics: list[RawLiteral] = field(default_factory=list)
    lits: list[tuple[RawLiteral, str]] = field(default_factory=list)  # (literal, kind)

    def ground(self, binding: dict[str, str]) -> tuple[Lit, ...]:
        out = []
        for raw, kind in self.lits:
            atom = render(substitute(raw.term, binding))
            if kind == "policy":
                if raw.negation == "-":
                    out.append(Lit(f"-{atom}", True, "policy"))
                else:
                    out.append(Lit(atom, raw.negation != "not", "policy"))
            else:
                out.append(Lit(atom, raw.negation != "-", kind))
        return tuple(out)


def _classify_body(grounder: _Grounder, lits: list[RawLiteral], allow_actions: bool = True,
                   allow_policy: bool = False) -> _Body:
    body = _Body()
    for lit in lits:
        if lit.op is not None:
            body.comparisons.append(lit)
            continue
        term = lit.term
        if not isinstance(term, Fn):
            raise DslSyntaxError(lit.col, f"expected an atom, found variable {term}")
        if term.name in ("permitted", "obl"):
            if not allow_policy:
                raise DslSyntaxError(lit.col, "policy literals are not allowed here")
            subject = term.args[0] if len(term.args) == 1 else None
            if isinstance(subject, Fn) and subject.name == "neg" and len(subject.args) == 1:
                subject = subject.args[0]
            if not isinstance(subject, Fn) or grounder.category(subject.name) != "action":
                raise DslSyntaxError(lit.col, f"malformed policy literal {render(term)}")
            body.typed.append((subject, lit.col))
            body.lits.append((lit, "policy"))
            continue
        kind = grounder.category(term.name)
        if kind is None:
            raise DslSyntaxError(lit.col, f"undeclared fluent, static or action {term.name!r}")
        if lit.negation == "not":
            raise DslSyntaxError(lit.col, "default negation applies to policy literals only; use '-'")
        if kind == "static":
            body.statics.append(lit)
            continue
        if kind == "action" and not allow_actions:
            raise DslSyntaxError(lit.col, f"action {term.name} cannot appear in this condition")
        body.typed.append((term, lit.col))
        body.lits.append((lit, kind))
    return body


def _sorts_list(parser: LineParser) -> tuple[str, ...]:
    if not parser.accept("("):
        return ()
    names = [parser.ident("sort name").text]
    while parser.accept(","):
        names.append(parser.ident("sort name").text)
    parser.expect(")")
    return tuple(names)


# --------------------------------------------------------------------------- domain


def parse_domain(text: str, source: str = "") -> DomainDescription:
    """Read a ``.dom`` file; raises :class:`DslError` with every diagnostic found."""
    out = _Collector(source)
    sorts: dict[str, tuple[str, ...]] = {}
    fluents: dict[str, FluentDecl] = {}
    actions: dict[str, ActionDecl] = {}
    statics: dict[str, StaticDecl] = {}
    facts: set[str] = set()
    laws: list[Law] = []
    activities: list[Activity] = []
    declared_at: dict[str, int] = {}
    lines = list(_lines(text))

    def declare(name: str, number: int, col: int) -> None:
        if name in RESERVED:
            raise DslSyntaxError(col, f"{name!r} is reserved")
        if name in declared_at:
            raise DslSyntaxError(col, f"{name!r} already declared on line {declared_at[name]}")
        declared_at[name] = number

    def check_sorts(names: tuple[str, ...], col: int) -> None:
        for name in names:
            if name not in sorts:
                raise DslSyntaxError(col, f"undeclared sort {name!r}")

    def sort_stmt(p: LineParser, number: int) -> None:
        tok = p.ident("sort name")
        if tok.text in sorts:
            raise DslSyntaxError(tok.col, f"sort {tok.text!r} already declared")
        p.expect(":")
        members = [p.ident("constant").text]
        while p.accept(","):
            members.append(p.ident("constant").text)
        p.expect_end()
        sorts[tok.text] = tuple(dict.fromkeys(members))

    def fluent_stmt(p: LineParser, number: int) -> None:
        kind = p.ident("fluent kind")
        if kind.text not in ("inertial", "defined"):
            raise DslSyntaxError(kind.col, f"fluent kind must be inertial or defined, not {kind.text!r}")
        tok = p.ident("fluent name")
        arg_sorts = _sorts_list(p)
        p.expect_end()
        declare(tok.text, number, tok.col)
        check_sorts(arg_sorts, tok.col)
        fluents[tok.text] = FluentDecl(tok.text, arg_sorts, kind.text)

    def static_stmt(p: LineParser, number: int) -> None:
        tok = p.ident("static name")
        arg_sorts = _sorts_list(p)
        p.expect_end()
        declare(tok.text, number, tok.col)
        check_sorts(arg_sorts, tok.col)
        statics[tok.text] = StaticDecl(tok.text, arg_sorts)

    def action_stmt(p: LineParser, number: int) -> None:
        words = []
        while p.tok.kind == "ident" and p.peek().text != "(" and p.peek().kind != "end":
            words.append(p.advance())
        tok = p.ident("action name")
        arg_sorts = _sorts_list(p)
        p.expect_end()
        classes = [w for w in words if w.text in ("physical", "mental", "policy")]
        actors = [w for w in words if w.text in ACTORS]
        for w in words:
            if w not in classes and w not in actors:
                raise DslSyntaxError(w.col, f"unknown action attribute {w.text!r}")
        if not classes:
            raise DslSyntaxError(tok.col, f"action {tok.text} is neither a physical, mental, nor policy action")
        if not actors:
            raise DslSyntaxError(tok.col, f"action {tok.text} is neither an agent nor an exogenous action")
        if len(classes) > 1 or len(actors) > 1:
            raise DslSyntaxError(tok.col, f"action {tok.text} has conflicting classifications")
        if classes[0].text != "physical":
            raise DslSyntaxError(classes[0].col, f"{classes[0].text} actions are built in and cannot be declared")
        declare(tok.text, number, tok.col)
        check_sorts(arg_sorts, tok.col)
        actions[tok.text] = ActionDecl(tok.text, arg_sorts, "physical", actors[0].text)

    for number, line in lines:
        head = line.split(None, 1)[0]
        handler = {"sort": sort_stmt, "fluent": fluent_stmt, "static": static_stmt, "action": action_stmt}.get(head)
        if handler is None:
            continue

        def run(handler=handler, line=line, number=number):
            p = LineParser(line)
            p.advance()
            handler(p, number)

        out.run(number, run)

    grounder = _Grounder(sorts, fluents, actions, statics, facts)

    def fact_stmt(p: LineParser) -> None:
        col = p.tok.col
        term = p.term()
        p.expect_end()
        if not isinstance(term, Fn) or term.name not in statics:
            raise DslSyntaxError(col, f"{render(term)} is not a declared static")
        if any(isinstance(a, Var) for a in term.args):
            raise DslSyntaxError(col, "facts must be ground")
        grounder.check_shape(term, col)
        facts.add(render(term))

    for number, line in lines:
        if line.split(None, 1)[0] == "fact":
            def run(line=line):
                p = LineParser(line)
                p.advance()
                fact_stmt(p)

            out.run(number, run)

    def action_term(p: LineParser) -> tuple[Fn, int]:
        col = p.tok.col
        term = p.term()
        if not isinstance(term, Fn) or grounder.category(term.name) != "action":
            raise DslSyntaxError(col, f"{render(term)} is not a declared action")
        return term, col

    def law_stmt(p: LineParser) -> None:
        if p.accept("impossible"):
            trigger, tcol = action_term(p)
            lits = p.literals() if p.accept("if") else []
            p.expect_end()
            body = _classify_body(grounder, lits, allow_policy=True)
            for b in grounder.bindings([(trigger, tcol), *body.typed], body.comparisons, body.statics):
                laws.append(Law("executability", None, render(substitute(trigger, b)), body.ground(b)))
            return
        causes = any(t.text == "causes" for t in p.tokens)
        if causes:
            trigger, tcol = action_term(p)
            p.expect("causes")
        head = p.literal()
        if head.op is not None or head.negation == "not" or not isinstance(head.term, Fn):
            raise DslSyntaxError(head.col, "law head must be a fluent literal")
        if grounder.category(head.term.name) != "fluent":
            raise DslSyntaxError(head.col, f"{head.term.name!r} is not a declared fluent")
        kind = fluents[head.term.name].kind
        lits = p.literals() if p.accept("if") else []
        p.expect_end()
        if causes:
            if kind != "inertial":
                raise DslSyntaxError(head.col, f"dynamic law head {head.term.name} must be an inertial fluent")
            body = _classify_body(grounder, lits, allow_policy=True)
            typed = [(trigger, tcol), (head.term, head.col), *body.typed]
            for b in grounder.bindings(typed, body.comparisons, body.statics):
                hd = Lit(render(substitute(head.term, b)), head.negation != "-")
                laws.append(Law("dynamic-causal", hd, render(substitute(trigger, b)), body.ground(b)))
            return
        if kind != "defined" or head.negation:
            raise DslSyntaxError(head.col, "state constraints must define a positive defined fluent")
        body = _classify_body(grounder, lits, allow_actions=False)
        for b in grounder.bindings([(head.term, head.col), *body.typed], body.comparisons, body.statics):
            laws.append(Law("state-constraint", Lit(render(substitute(head.term, b))), None, body.ground(b)))

    def activity_stmt(p: LineParser) -> None:
        tok = p.ident("activity id")
        if not tok.text.isdigit():
            raise DslSyntaxError(tok.col, "activity ids are non-negative integers")
        ident = int(tok.text)
        if any(a.id == ident for a in activities):
            raise DslSyntaxError(tok.col, f"activity {ident} declared twice")
        p.expect("goal")
        gcol = p.tok.col
        goal = _goal(p.term(), fluents, gcol)
        p.expect("do")
        steps = [_step(p, actions)]
        while p.accept(";"):
            steps.append(_step(p, actions))
        p.expect_end()
        activities.append(Activity(ident, goal, tuple(steps)))

    for number, line in lines:
        head = line.split(None, 1)[0]
        if head in ("sort", "fluent", "static", "action", "fact"):
            continue

        def run(line=line, head=head):
            p = LineParser(line)
            if head == "activity":
                p.advance()
                activity_stmt(p)
            else:
                law_stmt(p)

        out.run(number, run)

    domain = DomainDescription(
        sorts=sorts, fluents=fluents, actions=actions, statics=statics,
        facts=frozenset(facts), laws=tuple(dict.fromkeys(laws)), activities=tuple(activities),
    )
    if not out.diagnostics:
        try:
            domain.constraint_strata
        except ValueError as exc:
            out.add(1, 1, f"defined fluents are not stratified: {exc}")
    out.raise_if_any()
    return domain


def _goal(term: Term, fluents, col: int) -> str:
    inner = term
    if isinstance(term, Fn) and term.name == "policy_compliant" and len(term.args) == 1:
        inner = term.args[0]
    if not isinstance(inner, Fn) or inner.name not in fluents:
        raise DslSyntaxError(col, f"goal {render(term)} is not a declared fluent or policy_compliant(fluent)")
    decl = fluents[inner.name]
    if len(inner.args) != len(decl.sorts) or any(not isinstance(a, Fn) or a.args for a in inner.args):
        raise DslSyntaxError(col, f"goal {render(term)} is not a ground fluent")
    return render(term)


def _step(p: LineParser, actions) -> Step:
    col = p.tok.col
    main = p.term()
    if not isinstance(main, Fn) or main.name not in actions or actions[main.name].actor != "agent":
        raise DslSyntaxError(col, f"activity component {render(main)} is not a declared agent action")
    extras = []
    while p.accept("+"):
        pcol = p.tok.col
        extra = p.term()
        if not isinstance(extra, Fn) or extra.name not in IGNORE_ACTIONS or len(extra.args) != 1:
            raise DslSyntaxError(pcol, f"{render(extra)} is not a policy action")
        extras.append(render(extra))
    return Step(render(main), tuple(extras))


def format_domain(domain: DomainDescription) -> str:
    """Pretty-print a domain; parsing the result yields an equal value."""
    out = ["% sorts"]
    out += [f"sort {name}: {', '.join(members)}" for name, members in domain.sorts.items()]
    out.append("% statics")
    for decl in domain.statics.values():
        args = f"({', '.join(decl.sorts)})" if decl.sorts else ""
        out.append(f"static {decl.name}{args}")
    out += [f"fact {atom}" for atom in sorted(domain.facts)]
    out.append("% fluents")
    for decl in domain.fluents.values():
        args = f"({', '.join(decl.sorts)})" if decl.sorts else ""
        out.append(f"fluent {decl.kind} {decl.name}{args}")
    out.append("% actions")
    for decl in domain.actions.values():
        args = f"({', '.join(decl.sorts)})" if decl.sorts else ""
        out.append(f"action {decl.cls} {decl.actor} {decl.name}{args}")
    out.append("% laws")
    out += [str(law) for law in domain.laws if law.trigger is not None or law.kind == "state-constraint"]
    if domain.activities:
        out.append("% activities")
        out += [str(a) for a in domain.activities]
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------- policy


def parse_policy(text: str, domain: DomainDescription, source: str = "") -> Policy:
    """Read a ``.pol`` file against an already validated domain."""
    out = _Collector(source)
    grounder = _Grounder(domain.sorts, domain.fluents, domain.actions, domain.statics, domain.facts)
    rules: list[PolicyRule] = []
    labels_seen: dict[str, int] = {}
    ground_owner: dict[str, tuple[str, int]] = {}
    prefers: list[tuple[int, Term, Term, int]] = []

    def head_stmt(p: LineParser, number: int) -> None:
        label_term = None
        if p.tok.kind == "ident" and p.tok.text not in ("normally", "permitted", "obl"):
            label_term = p.term()
            p.expect(":")
        elif p.tok.kind == "ident" and p.tok.text in ("permitted", "obl"):
            save = p.pos
            term = p.term()
            if p.at(":"):
                label_term = term
                p.advance()
            else:
                p.pos = save
        defeasible = p.accept("normally")
        hcol = p.tok.col
        negative = p.accept("-")
        name = p.ident("permitted or obl")
        if name.text not in ("permitted", "obl"):
            raise DslSyntaxError(name.col, f"policy statements use permitted or obl, not {name.text!r}")
        p.expect("(")
        negated = p.accept("-")
        scol = p.tok.col
        subject = p.term()
        if isinstance(subject, Fn) and subject.name == "neg" and len(subject.args) == 1:
            if negated:
                raise DslSyntaxError(scol, "obligation subject malformed")
            negated, subject = True, subject.args[0]
        p.expect(")")
        lits = p.literals() if p.accept("if") else []
        p.expect_end()
        if negated and name.text != "obl":
            raise DslSyntaxError(scol, "only obligations may name a negated happening")
        if not isinstance(subject, Fn) or grounder.category(subject.name) != "action":
            if isinstance(subject, Fn) and subject.name in (WAIT, *AGENT_MENTAL, *EXOGENOUS_MENTAL):
                raise DslSyntaxError(scol, f"policy statements over built-in action {subject.name} are not supported")
            what = render(subject)
            if name.text == "obl" and isinstance(subject, Fn) and subject.name in domain.fluents:
                raise DslSyntaxError(scol, f"obligation subject malformed: {what} is a fluent")
            raise DslSyntaxError(scol, f"policy statement describes an object that is not declared as an action: {what}")
        if domain.actions[subject.name].actor != "agent":
            raise DslSyntaxError(scol, f"policy statements may describe only agent actions; {subject.name} is exogenous")
        if defeasible and label_term is None:
            names = list(variables(subject))
            for lit in lits:
                names += variables(lit.term)
                if lit.rhs is not None:
                    names += variables(lit.rhs)
            label_term = Fn(f"d{number}", tuple(Var(n) for n in dict.fromkeys(names)))
        if not defeasible and label_term is not None:
            raise DslSyntaxError(hcol, "only defeasible statements carry labels")
        if label_term is not None:
            if not isinstance(label_term, Fn):
                raise DslSyntaxError(hcol, "label must be a name")
            labels_seen.setdefault(label_term.name, number)
        body = _classify_body(grounder, lits)
        extra = [label_term] if label_term is not None else []
        modality = ("-" if negative else "") + name.text
        for b in grounder.bindings([(subject, scol), *body.typed], body.comparisons, body.statics, extra):
            label = render(substitute(label_term, b)) if label_term is not None else None
            rule = PolicyRule(
                modality=modality,
                action=render(substitute(subject, b)),
                negated=negated,
                condition=body.ground(b),
                defeasible=defeasible,
                label=label,
            )
            if label is not None:
                # instances of one rule may share a label; different rules may not
                head, line = ground_owner.setdefault(label, (rule.head, number))
                if head != rule.head:
                    raise DslSyntaxError(hcol, f"label {label} already used on line {line}")
            rules.append(rule)

    def prefer_stmt(p: LineParser, number: int) -> None:
        p.expect("prefer")
        p.expect("(")
        col = p.tok.col
        first = p.term()
        p.expect(",")
        second = p.term()
        p.expect(")")
        p.expect_end()
        prefers.append((number, first, second, col))

    for number, line in _lines(text):
        def run(line=line, number=number):
            p = LineParser(line)
            if p.at("prefer") and p.peek().text == "(":
                prefer_stmt(p, number)
            else:
                head_stmt(p, number)

        out.run(number, run)

    ground_labels = {r.label for r in rules if r.label is not None}
    edges: set[tuple[str, str]] = set()
    for number, first, second, col in prefers:
        def run(first=first, second=second, col=col):
            for term in (first, second):
                if not isinstance(term, Fn) or term.name not in labels_seen:
                    raise DslSyntaxError(col, f"prefer references unknown label {render(term)}")
            for label in sorted(ground_labels):
                binding = _match(first, _parse_label(label), {})
                if binding is None:
                    continue
                for target in sorted(ground_labels):
                    if _match(second, _parse_label(target), dict(binding)) is not None:
                        edges.add((label, target))

        out.run(number, run)
    out.raise_if_any()
    return Policy(tuple(dict.fromkeys(rules)), frozenset(edges))


def _parse_label(label: str) -> Fn:
    p = LineParser(label)
    return p.term()  # type: ignore[return-value]


def _match(pattern: Term, ground: Fn, binding: dict[str, str]) -> dict[str, str] | None:
    if isinstance(pattern, Var):
        value = render(ground)
        if binding.setdefault(pattern.name, value) != value:
            return None
        return binding
    if pattern.name != ground.name or len(pattern.args) != len(ground.args):
        return None
    for sub, g in zip(pattern.args, ground.args):
        if _match(sub, g, binding) is None:
            return None
    return binding


def format_policy(policy: Policy) -> str:
    return str(policy) + "\n"


# --------------------------------------------------------------------------- scenario


@dataclass(frozen=True)
class Event:
    step: int
    action: str
    hidden: bool = False


@dataclass(frozen=True)
class Observation:
    step: int
    lit: Lit


@dataclass(frozen=True)
class Scenario:
    initial: tuple[Lit, ...] = ()
    events: tuple[Event, ...] = ()
    observations: tuple[Observation, ...] = ()
    mode: ModeConfig = ModeConfig()
    horizon: int = 10

    def events_at(self, step: int, include_hidden: bool = True) -> list[Event]:
        return [e for e in self.events if e.step == step and (include_hidden or not e.hidden)]

    def observations_at(self, step: int) -> list[Lit]:
        return [o.lit for o in self.observations if o.step == step]

    @property
    def last_input_step(self) -> int:
        steps = [e.step for e in self.events] + [o.step for o in self.observations]
        return max(steps, default=-1)


def normalize_mental(atom: str) -> str:
    name = atom_name(atom)
    if name in SELECT_ALIASES:
        return SELECT_ALIASES[name] + atom[len(name):]
    return atom


def parse_scenario(text: str, domain: DomainDescription, source: str = "") -> Scenario:
    """Read a ``.scn`` file: initial observations, scripted events and observations, mode, horizon."""
    out = _Collector(source)
    initial: list[Lit] = []
    events: list[Event] = []
    observations: list[Observation] = []
    settings: dict = {}

    def fluent_lit(p: LineParser) -> Lit:
        raw = p.literal()
        if raw.op is not None or raw.negation == "not":
            raise DslSyntaxError(raw.col, "expected a fluent literal")
        atom = render(raw.term)
        if not isinstance(raw.term, Fn) or not _ground(raw.term):
            raise DslSyntaxError(raw.col, f"{atom} is not ground")
        if atom in domain.fluent_table:
            if domain.fluent_table[atom] != "inertial":
                raise DslSyntaxError(raw.col, f"{atom} is a defined fluent; observe inertial fluents")
            return Lit(atom, raw.negation != "-")
        if raw.term.name in domain.statics:
            return Lit(atom, raw.negation != "-", "static")
        raise DslSyntaxError(raw.col, f"observation of undeclared fluent {atom}")

    def number(p: LineParser, what: str) -> int:
        tok = p.ident(what)
        if not tok.text.isdigit():
            raise DslSyntaxError(tok.col, f"{what} must be a non-negative integer")
        return int(tok.text)

    def statement(p: LineParser) -> None:
        kw = p.ident("statement keyword")
        if kw.text == "initially":
            initial.append(fluent_lit(p))
        elif kw.text == "observe":
            step = number(p, "step")
            observations.append(Observation(step, fluent_lit(p)))
        elif kw.text == "event":
            step = number(p, "step")
            col = p.tok.col
            term = p.term()
            hidden = p.accept("hidden")
            atom = normalize_mental(render(term))
            if not isinstance(term, Fn) or not _ground(term):
                raise DslSyntaxError(col, f"event {atom} is not ground")
            info = domain.classify_action(atom)
            if info is None:
                raise DslSyntaxError(col, f"event {atom} is not a declared action")
            if info[1] == "agent" or info[0] == "policy":
                raise DslSyntaxError(col, f"{atom} is an agent action; agent actions are chosen by the control loop")
            if info[0] == "mental":
                _goal(term.args[0] if len(term.args) == 1 else term, domain.fluents, col)
                if hidden:
                    raise DslSyntaxError(col, "goal selection is always observed")
            events.append(Event(step, atom, hidden))
        elif kw.text == "mode":
            auth = _mode_word(p)
            obl = _mode_word(p)
            try:
                settings["mode"] = ModeConfig(auth, obl)
            except ValueError as exc:
                raise DslSyntaxError(kw.col, str(exc)) from None
        elif kw.text == "horizon":
            value = number(p, "horizon")
            if value < 1:
                raise DslSyntaxError(kw.col, "horizon must be at least 1")
            settings["horizon"] = value
        else:
            raise DslSyntaxError(kw.col, f"unknown scenario statement {kw.text!r}")
        p.expect_end()

    for num, line in _lines(text):
        out.run(num, lambda line=line: statement(LineParser(line)))
    out.raise_if_any()
    return Scenario(tuple(initial), tuple(events), tuple(observations), **settings)


def _mode_word(p: LineParser) -> str:
    parts = [p.ident("mode name").text]
    while p.at("-") and p.peek().kind == "ident":
        p.advance()
        parts.append(p.advance().text)
    return "-".join(parts)


def _ground(term: Term) -> bool:
    return next(variables(term), None) is None
