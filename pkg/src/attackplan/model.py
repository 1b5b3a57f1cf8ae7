"""Symbolic vocabulary shared by every other module.

Terms, atoms, states, action schemas, grounded actions and goals. All values
are immutable after construction and safe to share across threads; state
transitions build new ``State`` objects.

Facts are positive ground atoms. Preconditions are positive conjunctions
(STRIPS subset); an action's effect is either a deterministic add/delete pair
or the non-deterministic marker, in which case its outcome is supplied by a
perceptor after execution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .errors import (
    SortMismatchError,
    UnboundVariableError,
    UnknownPredicateError,
)


@dataclass(frozen=True, order=True)
class Term:
    """A constant or a variable. Variables carry a leading ``?``."""

    name: str
    sort: str

    @property
    def is_variable(self) -> bool:
        return self.name.startswith("?")

    def __str__(self) -> str:
        return self.name


def var(name: str, sort: str) -> Term:
    if not name.startswith("?"):
        raise ValueError(f"variable name must start with '?': {name!r}")
    return Term(name, sort)


def const(name: str, sort: str) -> Term:
    if name.startswith("?"):
        raise ValueError(f"constant name must not start with '?': {name!r}")
    return Term(name, sort)


@dataclass(frozen=True, order=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    @property
    def is_ground(self) -> bool:
        return all(not t.is_variable for t in self.args)

    def variables(self) -> tuple[Term, ...]:
        return tuple(t for t in self.args if t.is_variable)

    def __str__(self) -> str:
        if not self.args:
            return f"({self.predicate})"
        return f"({self.predicate} {' '.join(t.name for t in self.args)})"


@dataclass(frozen=True)
class PredicateDecl:
    """Declared predicate signature: name plus the sort of each position."""

    name: str
    sorts: tuple[str, ...] = ()
    argnames: tuple[str, ...] = ()  # declared variable spellings, for printing

    @property
    def arity(self) -> int:
        return len(self.sorts)

    def __str__(self) -> str:
        if not self.sorts:
            return f"({self.name})"
        names = self.argnames or tuple(f"?a{i}" for i in range(1, len(self.sorts) + 1))
        parts = " ".join(f"{n} - {s}" for n, s in zip(names, self.sorts))
        return f"({self.name} {parts})"


class Category(str, Enum):
    RECON = "recon"
    ENUMERATION = "enumeration"
    ANALYSIS = "analysis"
    EXPLOIT = "exploit"
    POST = "post"


@dataclass(frozen=True)
class Deterministic:
    adds: tuple[Atom, ...] = ()
    deletes: tuple[Atom, ...] = ()


@dataclass(frozen=True)
class NonDeterministic:
    """Effect unknown until the action is executed and its output perceived."""


Effect = Deterministic | NonDeterministic


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[Term, ...]
    precondition: tuple[Atom, ...]
    effect: Effect
    prompt_template: str
    category: Category
    repeatable: bool = False
    parser: str | None = None  # structured-output tag for the rule perceptor

    @property
    def is_deterministic(self) -> bool:
        return isinstance(self.effect, Deterministic)

    def param_binding(self, args: tuple[str, ...]) -> dict[str, Term]:
        """Positional args -> {variable name: constant term} in param order."""
        if len(args) != len(self.params):
            raise ValueError(
                f"action {self.name} expects {len(self.params)} args, got {len(args)}"
            )
        return {p.name: const(a, p.sort) for p, a in zip(self.params, args)}


@dataclass(frozen=True, order=True)
class GroundAction:
    """Identity of one concrete action: schema name plus positional constants.

    The pair is the unit of the no-repeat rule and of scenario step lookup.
    """

    schema: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return f"({self.schema})"
        return f"({self.schema} {' '.join(self.args)})"


@dataclass(frozen=True)
class Goal:
    """Existentially quantified positive conjunction."""

    atoms: tuple[Atom, ...]

    def __str__(self) -> str:
        return f"(and {' '.join(str(a) for a in self.atoms)})"


@dataclass(frozen=True)
class State:
    """The monotone-growing set of known facts about the target.

    ``objects`` maps every constant seen so far to its sort; a constant has
    exactly one sort for the whole engagement. ``executed`` records ground
    action identities for the no-repeat rule.
    """

    facts: frozenset[Atom] = frozenset()
    objects: Mapping[str, str] = field(default_factory=dict)
    executed: frozenset[GroundAction] = frozenset()

    def constants_of(self, sort: str) -> list[str]:
        return sorted(c for c, s in self.objects.items() if s == sort)

    def register(self, new_objects: Iterable[tuple[str, str]]) -> "State":
        """Add constants to the object universe, rejecting sort conflicts."""
        merged = dict(self.objects)
        for name, sort in new_objects:
            known = merged.get(name)
            if known is not None and known != sort:
                raise SortMismatchError(
                    f"constant {name!r} already registered with sort "
                    f"{known!r}, cannot re-register as {sort!r}"
                )
            merged[name] = sort
        return State(self.facts, merged, self.executed)

    def with_facts(
        self, added: Iterable[Atom] = (), removed: Iterable[Atom] = ()
    ) -> "State":
        facts = (self.facts | frozenset(added)) - frozenset(removed)
        return State(facts, self.objects, self.executed)

    def with_executed(self, action: GroundAction) -> "State":
        return State(self.facts, self.objects, self.executed | {action})


def initial_state(facts: Iterable[Atom], objects: Iterable[tuple[str, str]] = ()) -> State:
    """Build a starting state, registering every constant in ``facts``."""
    state = State().register(objects)
    atoms = tuple(facts)
    for atom in atoms:
        if not atom.is_ground:
            raise UnboundVariableError(f"initial fact is not ground: {atom}")
        state = state.register((t.name, t.sort) for t in atom.args)
    return state.with_facts(atoms)


def substitute(atom: Atom, binding: Mapping[str, Term]) -> Atom:
    """Replace variables in ``atom`` using ``binding``; identity when ground."""
    if atom.is_ground:
        return atom
    args = []
    for term in atom.args:
        if not term.is_variable:
            args.append(term)
            continue
        value = binding.get(term.name)
        if value is None:
            raise UnboundVariableError(f"no binding for {term.name} in {atom}")
        if value.sort != term.sort:
            raise SortMismatchError(
                f"binding {term.name} -> {value.name} has sort "
                f"{value.sort!r}, expected {term.sort!r}"
            )
        args.append(value)
    return Atom(atom.predicate, tuple(args))


def holds(
    state: State,
    goal: Goal,
    predicates: Mapping[str, PredicateDecl] | None = None,
) -> bool:
    """True iff some sort-correct substitution embeds all goal atoms in facts.

    ``predicates`` is the domain signature; when given, unknown predicates in
    the goal raise instead of silently failing.
    """
    if predicates is not None:
        for atom in goal.atoms:
            if atom.predicate not in predicates:
                raise UnknownPredicateError(f"goal references undeclared predicate {atom.predicate!r}")

    by_predicate: dict[str, list[Atom]] = {}
    for fact in sorted(state.facts):
        by_predicate.setdefault(fact.predicate, []).append(fact)

    def match(i: int, binding: dict[str, Term]) -> bool:
        if i == len(goal.atoms):
            return True
        pattern = goal.atoms[i]
        for fact in by_predicate.get(pattern.predicate, ()):
            if len(fact.args) != len(pattern.args):
                continue
            trial = dict(binding)
            ok = True
            for want, got in zip(pattern.args, fact.args):
                if not want.is_variable:
                    if want.name != got.name:
                        ok = False
                        break
                    continue
                bound = trial.get(want.name)
                if bound is None:
                    if want.sort != got.sort:
                        ok = False
                        break
                    trial[want.name] = got
                elif bound.name != got.name:
                    ok = False
                    break
            if ok and match(i + 1, trial):
                return True
        return False

    return match(0, {})


def ground_all(schema: ActionSchema, state: State) -> list[GroundAction]:
    """Every sort-correct total binding of ``schema`` over ``state.objects``.

    Deterministic order: lexicographic by positional constants.
    """
    pools = [state.constants_of(p.sort) for p in schema.params]
    return [GroundAction(schema.name, combo) for combo in itertools.product(*pools)]


def action_precondition(schema: ActionSchema, action: GroundAction) -> tuple[Atom, ...]:
    binding = schema.param_binding(action.args)
    return tuple(substitute(a, binding) for a in schema.precondition)


def applicable(schema: ActionSchema, action: GroundAction, state: State) -> bool:
    return all(a in state.facts for a in action_precondition(schema, action))
