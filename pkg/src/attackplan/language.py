"""Textual front end: domain (.dom) and problem (.prb) files.

The concrete syntax is an s-expression dialect close to common planning
languages, extended with action fields the engine needs:

    (define (domain pentest)
      (:types host port)
      (:predicates (port-open ?h - host ?p - port) ...)
      (:action full-port-scan
        :parameters (?h - host)
        :precondition (and (host-known ?h))
        :effect :non-deterministic          ; or (and (p ?h) (not (q ?h)))
        :prompt "Run `nmap ... {h}`"
        :category recon
        :repeatable false                   ; optional, defaults to false
        :parser port-scan))                 ; optional rule-perceptor tag

    (define (problem lab)
      (:domain pentest)
      (:objects backup - host)              ; optional extras
      (:init (host-known target))
      (:goal (and (shell-obtained ?h root))))

Identifiers are case-insensitive and normalized to lowercase. Sorts are flat.
Object sorts are inferred from predicate signature positions; a constant keeps
one sort for its whole life, so sort errors surface only on conflicting use.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from . import sexpr
from .errors import (
    ParseError,
    SortMismatchError,
    UnknownPredicateError,
    ValidationError,
)
from .model import (
    ActionSchema,
    Atom,
    Category,
    Deterministic,
    Effect,
    Goal,
    NonDeterministic,
    PredicateDecl,
    State,
    Term,
    const,
    initial_state,
    var,
)

_NAME_RE = re.compile(r"^[a-z][a-z0-9_-]*$")
_PLACEHOLDER_RE = re.compile(r"\{([a-z0-9_-]+)\}")
RULE_PARSER_TAGS = ("module-search", "port-scan")


@dataclass(frozen=True)
class DomainFile:
    name: str
    types: tuple[str, ...]
    predicates: tuple[PredicateDecl, ...]
    actions: tuple[ActionSchema, ...]
    predicate_map: dict[str, PredicateDecl] = field(compare=False, repr=False, default_factory=dict)
    action_map: dict[str, ActionSchema] = field(compare=False, repr=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "predicate_map", {p.name: p for p in self.predicates})
        object.__setattr__(self, "action_map", {a.name: a for a in self.actions})


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    init: State
    goal: Goal


def _err(node, message: str, path: str | None) -> ParseError:
    return ParseError(message, node.line, node.col, path)


def _as_list(node, what: str, path) -> sexpr.SList:
    if not isinstance(node, sexpr.SList):
        raise _err(node, f"expected {what}", path)
    return node


def _as_sym(node, what: str, path) -> str:
    if not isinstance(node, sexpr.Sym):
        raise _err(node, f"expected {what}", path)
    return node.text


def _as_name(node, what: str, path) -> str:
    text = _as_sym(node, what, path)
    if not _NAME_RE.match(text):
        raise _err(node, f"invalid {what}: {text!r}", path)
    return text


def _as_str(node, what: str, path) -> str:
    if not isinstance(node, sexpr.Str):
        raise _err(node, f"expected {what} (a string)", path)
    return node.text


def _parse_typed_terms(node: sexpr.SList, *, want_vars: bool, path) -> list[tuple[str, str, object]]:
    """Parse ``?a ?b - host ?c - port`` style typed lists.

    Returns (name, sort, node) triples; ``want_vars`` selects whether names
    must be variables (parameters) or constants (:objects sections).
    """
    out: list[tuple[str, str, object]] = []
    pending: list[tuple[str, object]] = []
    items = list(node.items)
    i = 0
    while i < len(items):
        tok = items[i]
        text = _as_sym(tok, "identifier", path)
        if text == "-":
            if not pending:
                raise _err(tok, "dangling '-' in typed list", path)
            if i + 1 >= len(items):
                raise _err(tok, "missing sort after '-'", path)
            sort = _as_name(items[i + 1], "sort name", path)
            out.extend((name, sort, n) for name, n in pending)
            pending = []
            i += 2
            continue
        if want_vars and not text.startswith("?"):
            raise _err(tok, f"expected variable, got {text!r}", path)
        if not want_vars and text.startswith("?"):
            raise _err(tok, f"expected constant, got {text!r}", path)
        pending.append((text, tok))
        i += 1
    if pending:
        raise _err(pending[0][1], "missing '- sort' in typed list", path)
    return out


class _ConstantSorts:
    """Tracks the single sort of each constant; conflicts are hard errors."""

    def __init__(self):
        self.sorts: dict[str, str] = {}

    def register(self, name: str, sort: str) -> None:
        known = self.sorts.get(name)
        if known is not None and known != sort:
            raise SortMismatchError(
                f"constant {name!r} used with sort {sort!r} but already has sort {known!r}"
            )
        self.sorts[name] = sort


def parse_atom(
    node,
    predicates: dict[str, PredicateDecl],
    *,
    param_sorts: dict[str, str] | None = None,
    constants: _ConstantSorts | None = None,
    allow_variables: bool = True,
    path=None,
) -> Atom:
    """Parse and validate one atom against the domain signature.

    Variables take their sort from the signature position; when
    ``param_sorts`` is given they must instead be declared parameters with
    matching sorts. Constants register their positional sort in
    ``constants``.
    """
    lst = _as_list(node, "atom", path)
    if len(lst) == 0:
        raise _err(lst, "empty atom", path)
    pred_name = _as_name(lst[0], "predicate name", path)
    decl = predicates.get(pred_name)
    if decl is None:
        raise UnknownPredicateError(f"undeclared predicate {pred_name!r}", path)
    args = lst.items[1:]
    if len(args) != decl.arity:
        raise ValidationError(
            f"predicate {pred_name!r} expects {decl.arity} arguments, got {len(args)}",
            path,
        )
    terms: list[Term] = []
    seen_vars: dict[str, str] = {}
    for arg, sort in zip(args, decl.sorts):
        text = _as_sym(arg, "term", path)
        if text.startswith("?"):
            if not allow_variables:
                raise ValidationError(
                    f"variable {text} not allowed in ground atom {pred_name!r}", path
                )
            if param_sorts is not None:
                declared = param_sorts.get(text)
                if declared is None:
                    raise ValidationError(
                        f"variable {text} in {pred_name!r} is not a declared parameter", path
                    )
                if declared != sort:
                    raise SortMismatchError(
                        f"variable {text} has sort {declared!r} but position in "
                        f"{pred_name!r} requires {sort!r}"
                    )
            else:
                before = seen_vars.get(text)
                if before is not None and before != sort:
                    raise SortMismatchError(
                        f"variable {text} used with sorts {before!r} and {sort!r}"
                    )
                seen_vars[text] = sort
            terms.append(var(text, sort))
        else:
            if constants is not None:
                constants.register(text, sort)
            terms.append(const(text, sort))
    return Atom(pred_name, tuple(terms))


def _parse_conjunction(node, what: str, path) -> list:
    """``(and a b c)``, a bare atom, or ``(and)`` -> list of atom nodes."""
    lst = _as_list(node, what, path)
    if len(lst) > 0 and isinstance(lst[0], sexpr.Sym) and lst[0].text == "and":
        return list(lst.items[1:])
    return [lst]


def _split_keyword_fields(items, start: int, path) -> list[tuple[str, object, object]]:
    """Alternating ``:keyword value`` pairs -> (keyword, value node, key node)."""
    fields = []
    i = start
    while i < len(items):
        key_node = items[i]
        key = _as_sym(key_node, "keyword", path)
        if not key.startswith(":"):
            raise _err(key_node, f"expected :keyword, got {key!r}", path)
        if i + 1 >= len(items):
            # bare marker keywords are not used in action bodies
            raise _err(key_node, f"missing value for {key}", path)
        fields.append((key, items[i + 1], key_node))
        i += 2
    return fields


def _parse_action(
    node: sexpr.SList,
    types: set[str],
    predicates: dict[str, PredicateDecl],
    constants: _ConstantSorts,
    path,
) -> ActionSchema:
    name = _as_name(node[1], "action name", path)
    fields = {key: (value, key_node) for key, value, key_node in _split_keyword_fields(node.items, 2, path)}

    def require(key: str):
        if key not in fields:
            raise ValidationError(f"action {name!r} is missing {key}", path)
        return fields[key][0]

    params_node = _as_list(require(":parameters"), ":parameters list", path)
    params: list[Term] = []
    param_sorts: dict[str, str] = {}
    for pname, sort, pnode in _parse_typed_terms(params_node, want_vars=True, path=path):
        if sort not in types:
            raise ValidationError(f"action {name!r}: undeclared sort {sort!r}", path)
        if pname in param_sorts:
            raise ValidationError(f"action {name!r}: duplicate parameter {pname}", path)
        param_sorts[pname] = sort
        params.append(var(pname, sort))

    precondition = tuple(
        parse_atom(n, predicates, param_sorts=param_sorts, constants=constants, path=path)
        for n in _parse_conjunction(require(":precondition"), ":precondition", path)
    )

    effect_node = require(":effect")
    effect: Effect
    if isinstance(effect_node, sexpr.Sym):
        if effect_node.text != ":non-deterministic":
            raise _err(effect_node, f"unknown effect {effect_node.text!r}", path)
        effect = NonDeterministic()
    else:
        adds: list[Atom] = []
        deletes: list[Atom] = []
        for eff in _parse_conjunction(effect_node, ":effect", path):
            lst = _as_list(eff, "effect atom", path)
            negated = len(lst) > 0 and isinstance(lst[0], sexpr.Sym) and lst[0].text == "not"
            if negated:
                if len(lst) != 2:
                    raise _err(lst, "(not ...) takes exactly one atom", path)
                lst = _as_list(lst[1], "effect atom", path)
            atom = parse_atom(lst, predicates, param_sorts=param_sorts, constants=constants, path=path)
            (deletes if negated else adds).append(atom)
        effect = Deterministic(tuple(adds), tuple(deletes))

    prompt = _as_str(require(":prompt"), ":prompt", path)
    category_name = _as_sym(require(":category"), ":category", path)
    try:
        category = Category(category_name)
    except ValueError:
        raise ValidationError(
            f"action {name!r}: unknown category {category_name!r} "
            f"(expected one of {', '.join(c.value for c in Category)})",
            path,
        ) from None

    repeatable = False
    if ":repeatable" in fields:
        flag = _as_sym(fields[":repeatable"][0], ":repeatable", path)
        if flag not in ("true", "false"):
            raise ValidationError(f"action {name!r}: :repeatable must be true or false", path)
        repeatable = flag == "true"

    parser = None
    if ":parser" in fields:
        parser = _as_sym(fields[":parser"][0], ":parser", path)
        if parser not in RULE_PARSER_TAGS:
            raise ValidationError(
                f"action {name!r}: unknown parser tag {parser!r} "
                f"(expected one of {', '.join(RULE_PARSER_TAGS)})",
                path,
            )

    unknown = {k for k in fields if k not in (
        ":parameters", ":precondition", ":effect", ":prompt", ":category", ":repeatable", ":parser",
    )}
    if unknown:
        raise ValidationError(f"action {name!r}: unknown field {sorted(unknown)[0]}", path)

    # Every parameter must be constrained by the precondition; this is what
    # keeps grounding finite over the known object universe.
    used = {t.name for a in precondition for t in a.args if t.is_variable}
    for p in params:
        if p.name not in used:
            raise ValidationError(
                f"action {name!r}: parameter {p.name} does not occur in the precondition", path
            )
    if isinstance(effect, Deterministic):
        for atom in effect.adds + effect.deletes:
            for t in atom.args:
                if t.is_variable and t.name not in param_sorts:
                    raise ValidationError(
                        f"action {name!r}: effect variable {t.name} is not a parameter", path
                    )

    placeholders = set(_PLACEHOLDER_RE.findall(prompt))
    expected = {p.name[1:] for p in params}
    if placeholders != expected:
        detail = []
        if expected - placeholders:
            detail.append(f"missing: {', '.join(sorted(expected - placeholders))}")
        if placeholders - expected:
            detail.append(f"not a parameter: {', '.join(sorted(placeholders - expected))}")
        raise ValidationError(
            f"action {name!r}: prompt placeholders must match parameters ({'; '.join(detail)})",
            path,
        )

    return ActionSchema(
        name=name,
        params=tuple(params),
        precondition=precondition,
        effect=effect,
        prompt_template=prompt,
        category=category,
        repeatable=repeatable,
        parser=parser,
    )


def _parse_define(text: str, kind: str, path) -> tuple[str, list]:
    forms = sexpr.read_all(text, path)
    if len(forms) != 1:
        where = forms[1] if len(forms) > 1 else sexpr.Sym("", 1, 1)
        raise ParseError("expected exactly one (define ...) form", where.line, where.col, path)
    top = _as_list(forms[0], "(define ...)", path)
    if len(top) < 2 or _as_sym(top[0], "define", path) != "define":
        raise _err(top, f"expected (define ({kind} ...) ...)", path)
    head = _as_list(top[1], f"({kind} name)", path)
    if len(head) != 2 or _as_sym(head[0], kind, path) != kind:
        raise _err(head, f"expected ({kind} name)", path)
    name = _as_name(head[1], f"{kind} name", path)
    return name, list(top.items[2:])


def parse_domain(text: str, path: str | None = None) -> DomainFile:
    """Parse and validate a domain file."""
    name, sections = _parse_define(text, "domain", path)
    types: list[str] = []
    predicates: dict[str, PredicateDecl] = {}
    actions: list[ActionSchema] = []
    constants = _ConstantSorts()
    seen_sections: set[str] = set()

    for section in sections:
        lst = _as_list(section, "domain section", path)
        if len(lst) == 0:
            raise _err(lst, "empty section", path)
        tag = _as_sym(lst[0], "section tag", path)
        if tag == ":types":
            if ":types" in seen_sections:
                raise _err(lst, "duplicate :types section", path)
            seen_sections.add(":types")
            for item in lst.items[1:]:
                sort = _as_name(item, "sort name", path)
                if sort in types:
                    raise ValidationError(f"duplicate sort {sort!r}", path)
                types.append(sort)
        elif tag == ":predicates":
            if ":predicates" in seen_sections:
                raise _err(lst, "duplicate :predicates section", path)
            seen_sections.add(":predicates")
            for decl_node in lst.items[1:]:
                decl_list = _as_list(decl_node, "predicate declaration", path)
                if len(decl_list) == 0:
                    raise _err(decl_list, "empty predicate declaration", path)
                pred = _as_name(decl_list[0], "predicate name", path)
                if pred in predicates:
                    raise ValidationError(f"duplicate predicate {pred!r}", path)
                typed = _parse_typed_terms(
                    sexpr.SList(decl_list.items[1:], decl_list.line, decl_list.col),
                    want_vars=True,
                    path=path,
                )
                for _, sort, node in typed:
                    if sort not in types:
                        raise ValidationError(
                            f"predicate {pred!r}: undeclared sort {sort!r}", path
                        )
                predicates[pred] = PredicateDecl(
                    pred,
                    tuple(sort for _, sort, _ in typed),
                    tuple(v for v, _, _ in typed),
                )
        elif tag == ":action":
            if len(lst) < 2:
                raise _err(lst, "action needs a name", path)
            schema = _parse_action(lst, set(types), predicates, constants, path)
            if any(a.name == schema.name for a in actions):
                raise ValidationError(f"duplicate action {schema.name!r}", path)
            actions.append(schema)
        else:
            raise _err(lst, f"unknown domain section {tag!r}", path)

    return DomainFile(name, tuple(types), tuple(predicates.values()), tuple(actions))


def _format_atom(atom: Atom) -> str:
    return str(atom)


def print_domain(domain: DomainFile) -> str:
    """Canonical text form; parse(print_domain(d)) is structurally equal to d."""
    out: list[str] = [f"(define (domain {domain.name})"]
    if domain.types:
        out.append(f"  (:types {' '.join(domain.types)})")
    if domain.predicates:
        out.append("  (:predicates")
        for decl in domain.predicates:
            out.append(f"    {decl}")
        out[-1] += ")"
    for schema in domain.actions:
        out.append(f"  (:action {schema.name}")
        params = " ".join(f"{p.name} - {p.sort}" for p in schema.params)
        out.append(f"    :parameters ({params})")
        out.append(f"    :precondition (and {' '.join(map(_format_atom, schema.precondition))})")
        if isinstance(schema.effect, NonDeterministic):
            out.append("    :effect :non-deterministic")
        else:
            parts = [_format_atom(a) for a in schema.effect.adds]
            parts += [f"(not {_format_atom(a)})" for a in schema.effect.deletes]
            out.append(f"    :effect (and {' '.join(parts)})")
        prompt = schema.prompt_template.replace("\\", "\\\\").replace('"', '\\"')
        out.append(f'    :prompt "{prompt}"')
        out.append(f"    :category {schema.category.value}")
        out.append(f"    :repeatable {'true' if schema.repeatable else 'false'}")
        if schema.parser is not None:
            out.append(f"    :parser {schema.parser}")
        out[-1] += ")"
    out[-1] += ")"
    return "\n".join(out) + "\n"


def domain_hash(domain: DomainFile) -> str:
    return hashlib.sha256(print_domain(domain).encode("utf-8")).hexdigest()


def _parse_init_section(
    lst: sexpr.SList, domain: DomainFile, objects: _ConstantSorts, path
) -> list[Atom]:
    atoms = []
    for node in lst.items[1:]:
        atoms.append(
            parse_atom(
                node,
                domain.predicate_map,
                constants=objects,
                allow_variables=False,
                path=path,
            )
        )
    return atoms


def _parse_goal_section(lst: sexpr.SList, domain: DomainFile, path) -> Goal:
    if len(lst) != 2:
        raise _err(lst, ":goal takes exactly one formula", path)
    atoms = tuple(
        parse_atom(node, domain.predicate_map, path=path)
        for node in _parse_conjunction(lst[1], ":goal", path)
    )
    if not atoms:
        raise ValidationError("goal must contain at least one atom", path)
    return Goal(atoms)


def parse_state(text: str, domain: DomainFile, path: str | None = None) -> State:
    """Parse a bare ``(:init ...)`` form into an initial state."""
    lst = _as_list(sexpr.read_one(text, path), "(:init ...)", path)
    if len(lst) == 0 or _as_sym(lst[0], ":init", path) != ":init":
        raise _err(lst, "expected (:init ...)", path)
    objects = _ConstantSorts()
    atoms = _parse_init_section(lst, domain, objects, path)
    return initial_state(atoms, objects.sorts.items())


def parse_goal(text: str, domain: DomainFile, path: str | None = None) -> Goal:
    """Parse a bare ``(:goal ...)`` form."""
    lst = _as_list(sexpr.read_one(text, path), "(:goal ...)", path)
    if len(lst) == 0 or _as_sym(lst[0], ":goal", path) != ":goal":
        raise _err(lst, "expected (:goal ...)", path)
    return _parse_goal_section(lst, domain, path)


def parse_problem(text: str, domain: DomainFile, path: str | None = None) -> Problem:
    name, sections = _parse_define(text, "problem", path)
    domain_name: str | None = None
    objects = _ConstantSorts()
    init_atoms: list[Atom] | None = None
    goal: Goal | None = None

    for section in sections:
        lst = _as_list(section, "problem section", path)
        if len(lst) == 0:
            raise _err(lst, "empty section", path)
        tag = _as_sym(lst[0], "section tag", path)
        if tag == ":domain":
            if len(lst) != 2:
                raise _err(lst, ":domain takes one name", path)
            domain_name = _as_name(lst[1], "domain name", path)
            if domain_name != domain.name:
                raise ValidationError(
                    f"problem targets domain {domain_name!r} but {domain.name!r} was loaded", path
                )
        elif tag == ":objects":
            typed = _parse_typed_terms(
                sexpr.SList(lst.items[1:], lst.line, lst.col), want_vars=False, path=path
            )
            for cname, sort, node in typed:
                if sort not in domain.types:
                    raise ValidationError(f"object {cname!r}: undeclared sort {sort!r}", path)
                objects.register(cname, sort)
        elif tag == ":init":
            if init_atoms is not None:
                raise _err(lst, "duplicate :init section", path)
            init_atoms = _parse_init_section(lst, domain, objects, path)
        elif tag == ":goal":
            if goal is not None:
                raise _err(lst, "duplicate :goal section", path)
            goal = _parse_goal_section(lst, domain, path)
        else:
            raise _err(lst, f"unknown problem section {tag!r}", path)

    if domain_name is None:
        raise ValidationError("problem is missing (:domain ...)", path)
    if init_atoms is None:
        raise ValidationError("problem is missing (:init ...)", path)
    if goal is None:
        raise ValidationError("problem is missing (:goal ...)", path)
    return Problem(name, domain_name, initial_state(init_atoms, objects.sorts.items()), goal)
