"""The contract language: a small LL(1) keyword grammar with a canonical
printer, so that every agreement has exactly one machine interpretation.

Grammar (authoritative):

    contract    = recognition | degree | sanction ;
    recognition = "RECOGNITION" "BETWEEN" ORG "AND" ORG "WHERE" predicate
                  "MAP" "FACTOR" NUMBER { "TOPIC" TAG "->" TAG } ;
    degree      = "DEGREE" STRING "BY" ORG "REQUIRES" requirement ;
    sanction    = "SANCTION" "THRESHOLD" INT "WINDOW" INT ;
    requirement = "ALL" "(" reqlist ")" | "ANY" "(" reqlist ")"
                | "ATLEAST" INT "OF" "(" reqlist ")"
                | "CREDITS" ">=" NUMBER "IN" TAG
                | "COURSE" STRING [ "FROM" ORG ] ;
    reqlist     = requirement { "," requirement } ;
    predicate   = atom { "AND" atom } ;
    atom        = "ISSUER" "=" ORG | "TOPIC" "CONTAINS" TAG
                | "CREDITS" ">=" NUMBER | "PASSED"
                | "SOURCE" "IN" "(" kind { "," kind } ")" ;
    kind        = "EXAM" | "MOOC" | "BADGE" ;

ORG is a lowercase slug naming a registered organization, or its 64-char hex
org id. Contracts never reference grades: grade scales are not harmonized
between organizations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import TYPE_CHECKING, Optional, Union

from .errors import ContractSyntaxError, IssuerMismatch, SemanticError, UnknownOrg
from .identity import is_hex_digest
from .payloads import SourceKind

if TYPE_CHECKING:
    from .store import ChainStore

MAX_FACTOR = Decimal(2)

KIND_NAMES = {"EXAM": SourceKind.UNIVERSITY_EXAM, "MOOC": SourceKind.MOOC, "BADGE": SourceKind.OPEN_BADGE}
KIND_TOKENS = {v: k for k, v in KIND_NAMES.items()}


# -- AST -----------------------------------------------------------------------

@dataclass(frozen=True)
class IssuerIs:
    org: str


@dataclass(frozen=True)
class TopicContains:
    tag: str


@dataclass(frozen=True)
class CreditsGe:
    amount: Decimal


@dataclass(frozen=True)
class IsPassed:
    pass


@dataclass(frozen=True)
class SourceIn:
    kinds: tuple[SourceKind, ...]


Atom = Union[IssuerIs, TopicContains, CreditsGe, IsPassed, SourceIn]


@dataclass(frozen=True)
class Predicate:
    atoms: tuple[Atom, ...]


@dataclass(frozen=True)
class CreditsAtLeast:
    amount: Decimal
    topic: str


@dataclass(frozen=True)
class Course:
    course_id: str
    issuer: Optional[str] = None


@dataclass(frozen=True)
class AllOf:
    children: tuple["Requirement", ...]


@dataclass(frozen=True)
class AnyOf:
    children: tuple["Requirement", ...]


@dataclass(frozen=True)
class AtLeastNOf:
    n: int
    children: tuple["Requirement", ...]


Requirement = Union[CreditsAtLeast, Course, AllOf, AnyOf, AtLeastNOf]


@dataclass(frozen=True)
class Recognition:
    home: str
    foreign: str
    predicate: Predicate
    factor: Decimal
    topic_map: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Degree:
    issuer: str
    degree_name: str
    requirement: Requirement


@dataclass(frozen=True)
class Sanction:
    threshold: int
    window: int


ContractAst = Union[Recognition, Degree, Sanction]


# -- Lexer ---------------------------------------------------------------------

_KEYWORDS = {
    "RECOGNITION", "BETWEEN", "AND", "WHERE", "MAP", "FACTOR", "TOPIC",
    "DEGREE", "BY", "REQUIRES", "ALL", "ANY", "ATLEAST", "OF",
    "CREDITS", "IN", "COURSE", "FROM", "SANCTION", "THRESHOLD", "WINDOW",
    "ISSUER", "CONTAINS", "PASSED", "SOURCE", "EXAM", "MOOC", "BADGE",
}

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r]+)
    | (?P<nl>\n)
    | (?P<arrow>->)
    | (?P<ge>>=)
    | (?P<sym>[(),=])
    | (?P<string>"(?:[^"\\\n]|\\[\\"])*")
    | (?P<keyword>[A-Z]+)
    | (?P<number>[0-9]+(?:\.[0-9]+)?(?![a-z0-9_.-]))
    | (?P<ident>[a-z0-9][a-z0-9_-]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # keyword name, or IDENT / NUMBER / STRING / symbol / EOF
    value: str
    line: int
    col: int


def _unescape(raw: str) -> str:
    return raw.replace('\\"', '"').replace("\\\\", "\\")


def _tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        if m is None:
            what = "closing quote" if source[i] == '"' else f"a token (got {source[i]!r})"
            raise ContractSyntaxError(line, col, what)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            col = 1
            i = m.end()
            continue
        if kind != "ws":
            if kind == "string":
                tokens.append(Token("STRING", _unescape(text[1:-1]), line, col))
            elif kind == "number":
                tokens.append(Token("NUMBER", text, line, col))
            elif kind == "ident":
                tokens.append(Token("IDENT", text, line, col))
            elif kind == "keyword":
                if text not in _KEYWORDS:
                    raise ContractSyntaxError(line, col, f"a keyword (got {text!r})")
                tokens.append(Token(text, text, line, col))
            else:
                tokens.append(Token(text, text, line, col))
        col += len(text)
        i = m.end()
    tokens.append(Token("EOF", "", line, col))
    return tokens


# -- Parser ----------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        if self.cur.kind != kind:
            raise ContractSyntaxError(self.cur.line, self.cur.col, kind)
        return self.advance()

    def fail(self, expected: str):
        raise ContractSyntaxError(self.cur.line, self.cur.col, expected)

    # numbers

    def number(self) -> Decimal:
        return Decimal(self.expect("NUMBER").value)

    def integer(self) -> int:
        tok = self.expect("NUMBER")
        if "." in tok.value:
            raise ContractSyntaxError(tok.line, tok.col, "an integer")
        return int(tok.value)

    def org_ref(self) -> str:
        return self.expect("IDENT").value

    def tag(self) -> str:
        return self.expect("IDENT").value

    # contract = recognition | degree | sanction

    def contract(self) -> ContractAst:
        if self.cur.kind == "RECOGNITION":
            ast = self.recognition()
        elif self.cur.kind == "DEGREE":
            ast = self.degree()
        elif self.cur.kind == "SANCTION":
            ast = self.sanction()
        else:
            self.fail("RECOGNITION, DEGREE or SANCTION")
        self.expect("EOF")
        return ast

    def recognition(self) -> Recognition:
        self.expect("RECOGNITION")
        self.expect("BETWEEN")
        home = self.org_ref()
        self.expect("AND")
        foreign = self.org_ref()
        self.expect("WHERE")
        predicate = self.predicate()
        self.expect("MAP")
        self.expect("FACTOR")
        factor = self.number()
        topic_map = []
        seen_sources = set()
        while self.cur.kind == "TOPIC":
            self.advance()
            src = self.tag()
            self.expect("->")
            dst = self.tag()
            if src in seen_sources:
                raise SemanticError(f"duplicate topic mapping for {src!r}")
            seen_sources.add(src)
            topic_map.append((src, dst))
        if home == foreign:
            raise SemanticError("recognition requires two distinct organizations")
        if not (0 < factor <= MAX_FACTOR):
            raise SemanticError("factor must lie in (0, 2]")
        return Recognition(
            home=home, foreign=foreign, predicate=predicate,
            factor=factor, topic_map=tuple(topic_map),
        )

    def degree(self) -> Degree:
        self.expect("DEGREE")
        name_tok = self.expect("STRING")
        if not name_tok.value:
            raise SemanticError("degree name must be non-empty")
        self.expect("BY")
        issuer = self.org_ref()
        self.expect("REQUIRES")
        requirement = self.requirement()
        return Degree(issuer=issuer, degree_name=name_tok.value, requirement=requirement)

    def sanction(self) -> Sanction:
        self.expect("SANCTION")
        self.expect("THRESHOLD")
        threshold = self.integer()
        self.expect("WINDOW")
        window = self.integer()
        if threshold < 1:
            raise SemanticError("sanction threshold must be >= 1")
        if window < 1:
            raise SemanticError("sanction window must be >= 1")
        return Sanction(threshold=threshold, window=window)

    # predicate = atom { AND atom }

    def predicate(self) -> Predicate:
        atoms = [self.atom()]
        while self.cur.kind == "AND":
            self.advance()
            atoms.append(self.atom())
        seen = set()
        for atom in atoms:
            kind = type(atom)
            if kind in seen:
                raise SemanticError(f"duplicate predicate atom on {kind.__name__}")
            seen.add(kind)
        return Predicate(atoms=tuple(atoms))

    def atom(self) -> Atom:
        kind = self.cur.kind
        if kind == "ISSUER":
            self.advance()
            self.expect("=")
            return IssuerIs(self.org_ref())
        if kind == "TOPIC":
            self.advance()
            self.expect("CONTAINS")
            return TopicContains(self.tag())
        if kind == "CREDITS":
            self.advance()
            self.expect(">=")
            return CreditsGe(self.number())
        if kind == "PASSED":
            self.advance()
            return IsPassed()
        if kind == "SOURCE":
            self.advance()
            self.expect("IN")
            self.expect("(")
            kinds = [self.source_kind()]
            while self.cur.kind == ",":
                self.advance()
                kinds.append(self.source_kind())
            self.expect(")")
            if len(set(kinds)) != len(kinds):
                raise SemanticError("duplicate source kind in SOURCE IN")
            return SourceIn(kinds=tuple(kinds))
        self.fail("ISSUER, TOPIC, CREDITS, PASSED or SOURCE")

    def source_kind(self) -> SourceKind:
        if self.cur.kind in KIND_NAMES:
            return KIND_NAMES[self.advance().kind]
        self.fail("EXAM, MOOC or BADGE")

    # requirement

    def requirement(self) -> Requirement:
        kind = self.cur.kind
        if kind == "ALL":
            self.advance()
            return AllOf(children=self.reqlist())
        if kind == "ANY":
            self.advance()
            return AnyOf(children=self.reqlist())
        if kind == "ATLEAST":
            self.advance()
            n = self.integer()
            self.expect("OF")
            children = self.reqlist()
            if n < 1:
                raise SemanticError("ATLEAST requires n >= 1")
            if n > len(children):
                raise SemanticError("ATLEAST n exceeds the number of alternatives")
            return AtLeastNOf(n=n, children=children)
        if kind == "CREDITS":
            self.advance()
            self.expect(">=")
            amount = self.number()
            self.expect("IN")
            return CreditsAtLeast(amount=amount, topic=self.tag())
        if kind == "COURSE":
            self.advance()
            course_tok = self.expect("STRING")
            if not course_tok.value:
                raise SemanticError("course id must be non-empty")
            issuer = None
            if self.cur.kind == "FROM":
                self.advance()
                issuer = self.org_ref()
            return Course(course_id=course_tok.value, issuer=issuer)
        self.fail("ALL, ANY, ATLEAST, CREDITS or COURSE")

    def reqlist(self) -> tuple[Requirement, ...]:
        self.expect("(")
        children = [self.requirement()]
        while self.cur.kind == ",":
            self.advance()
            children.append(self.requirement())
        self.expect(")")
        return tuple(children)


def parse(source: str) -> ContractAst:
    """Parse contract source text; raises ContractSyntaxError with line and
    column on grammar violations and SemanticError on structural ones."""
    return _Parser(_tokenize(source)).contract()


# -- Printer ----------------------------------------------------------------------

def _number_text(value: Decimal) -> str:
    if value == 0:
        return "0"
    return format(value.normalize(), "f")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _print_atom(atom: Atom) -> str:
    if isinstance(atom, IssuerIs):
        return f"ISSUER = {atom.org}"
    if isinstance(atom, TopicContains):
        return f"TOPIC CONTAINS {atom.tag}"
    if isinstance(atom, CreditsGe):
        return f"CREDITS >= {_number_text(atom.amount)}"
    if isinstance(atom, IsPassed):
        return "PASSED"
    if isinstance(atom, SourceIn):
        return "SOURCE IN (" + ", ".join(KIND_TOKENS[k] for k in atom.kinds) + ")"
    raise TypeError(f"unknown atom {atom!r}")


def print_requirement(req: Requirement) -> str:
    if isinstance(req, AllOf):
        return "ALL (" + ", ".join(print_requirement(c) for c in req.children) + ")"
    if isinstance(req, AnyOf):
        return "ANY (" + ", ".join(print_requirement(c) for c in req.children) + ")"
    if isinstance(req, AtLeastNOf):
        inner = ", ".join(print_requirement(c) for c in req.children)
        return f"ATLEAST {req.n} OF ({inner})"
    if isinstance(req, CreditsAtLeast):
        return f"CREDITS >= {_number_text(req.amount)} IN {req.topic}"
    if isinstance(req, Course):
        text = f"COURSE {_quote(req.course_id)}"
        if req.issuer is not None:
            text += f" FROM {req.issuer}"
        return text
    raise TypeError(f"unknown requirement {req!r}")


def print_contract(ast: ContractAst) -> str:
    """Canonical source text; parse(print_contract(ast)) equals ast."""
    if isinstance(ast, Sanction):
        return f"SANCTION THRESHOLD {ast.threshold} WINDOW {ast.window}\n"
    if isinstance(ast, Degree):
        return (
            f"DEGREE {_quote(ast.degree_name)} BY {ast.issuer}"
            f" REQUIRES {print_requirement(ast.requirement)}\n"
        )
    if isinstance(ast, Recognition):
        atoms = " AND ".join(_print_atom(a) for a in ast.predicate.atoms)
        text = (
            f"RECOGNITION BETWEEN {ast.home} AND {ast.foreign}"
            f" WHERE {atoms} MAP FACTOR {_number_text(ast.factor)}"
        )
        for src, dst in ast.topic_map:
            text += f" TOPIC {src} -> {dst}"
        return text + "\n"
    raise TypeError(f"unknown contract {ast!r}")


# -- Static checking and org resolution ------------------------------------------

def resolve_org(store: "ChainStore", ref: str) -> str:
    """Map an org reference (display-name slug or hex id) to a registered
    org id; raises UnknownOrg when nothing matches."""
    if is_hex_digest(ref) and store.org(ref) is not None:
        return ref
    org_id = store.org_id_by_name(ref)
    if org_id is None:
        raise UnknownOrg(f"no registered organization matches {ref!r}")
    return org_id


def _org_refs(ast: ContractAst) -> list[str]:
    refs: list[str] = []
    if isinstance(ast, Recognition):
        refs.extend([ast.home, ast.foreign])
        for atom in ast.predicate.atoms:
            if isinstance(atom, IssuerIs):
                refs.append(atom.org)
    elif isinstance(ast, Degree):
        refs.append(ast.issuer)
        refs.extend(_requirement_org_refs(ast.requirement))
    return refs


def _requirement_org_refs(req: Requirement) -> list[str]:
    if isinstance(req, Course):
        return [req.issuer] if req.issuer is not None else []
    if isinstance(req, (AllOf, AnyOf, AtLeastNOf)):
        out: list[str] = []
        for child in req.children:
            out.extend(_requirement_org_refs(child))
        return out
    return []


def static_check(ast: ContractAst, store: "ChainStore", publishing_issuer: Optional[str] = None) -> None:
    """Every referenced org must be registered; a degree contract may only be
    published by the issuing org itself (checked when the publisher is known)."""
    for ref in _org_refs(ast):
        resolve_org(store, ref)
    if isinstance(ast, Recognition):
        if resolve_org(store, ast.home) == resolve_org(store, ast.foreign):
            raise SemanticError("recognition home and foreign resolve to the same org")
    if isinstance(ast, Degree) and publishing_issuer is not None:
        if resolve_org(store, ast.issuer) != publishing_issuer:
            raise IssuerMismatch("degree contract must be published by its issuing org")


def _resolve_requirement(req: Requirement, store: "ChainStore") -> Requirement:
    if isinstance(req, Course) and req.issuer is not None:
        return Course(course_id=req.course_id, issuer=resolve_org(store, req.issuer))
    if isinstance(req, AllOf):
        return AllOf(tuple(_resolve_requirement(c, store) for c in req.children))
    if isinstance(req, AnyOf):
        return AnyOf(tuple(_resolve_requirement(c, store) for c in req.children))
    if isinstance(req, AtLeastNOf):
        return AtLeastNOf(req.n, tuple(_resolve_requirement(c, store) for c in req.children))
    return req


def resolve_contract(ast: ContractAst, store: "ChainStore") -> ContractAst:
    """Replace every org reference by the registered hex org id. The engine
    evaluates only resolved contracts."""
    if isinstance(ast, Sanction):
        return ast
    if isinstance(ast, Degree):
        return Degree(
            issuer=resolve_org(store, ast.issuer),
            degree_name=ast.degree_name,
            requirement=_resolve_requirement(ast.requirement, store),
        )
    atoms = tuple(
        IssuerIs(resolve_org(store, a.org)) if isinstance(a, IssuerIs) else a
        for a in ast.predicate.atoms
    )
    return Recognition(
        home=resolve_org(store, ast.home),
        foreign=resolve_org(store, ast.foreign),
        predicate=Predicate(atoms=atoms),
        factor=ast.factor,
        topic_map=ast.topic_map,
    )
