"""Surface syntax: tokenizer, parser, elaborator, and printer.

The surface language uses named variables.  Elaboration resolves names to
the sort-indexed de Bruijn representation of `syntax`, splitting
constructor and eliminator spines using the data signatures declared
earlier in the module.  The printer emits surface text that reparses to
the same kernel declarations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ERROR_CLASSES, ParseError, UnboundVariable
from .interval import (
    F0, F1, FAnd, FEq, FOr, I0, I1, IJoin, IMeet, INeg, IVar,
)
from .syntax import (
    App, BCon, BHComp, BRec, CApp, CLam, ClockElim, Comp, Con, Constructor,
    DFix, Diamond, ElimCase, ForceApp, Forall, HComp, Hit, HitSignature,
    Lam, Later, PApp, PFix, PLam, PathT, Pi, System, Telescope, TickApp,
    TickLam, TickVar, Tirr, TopRef, Trans, U, Var,
    CLOCK, IVAL, TERM, TICK,
)

RESERVED = {
    "Path", "forall", "tick", "tirr", "dfix", "pfix", "comp", "hcomp",
    "trans", "data", "where", "def", "clockelim", "into", "with", "I",
}

_UNIVERSE = re.compile(r"U([0-9]+)$")

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<pragma>--expect-(?:not-conv|pass|fail|conv))
    | (?P<comment>--[^\n]*)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    | (?P<num>[0-9]+)
    | (?P<sym>->|:=|=>|/\\|\\/|\|>|<>|[()\[\]{}<>,.:=|^@~\\])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "pragma" | "ident" | "num" | "sym" | "eof"
    value: str
    line: int
    col: int


def tokenize(text):
    toks = []
    pos, line, bol = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"{line}:{pos - bol + 1}: unexpected character {text[pos]!r}"
            )
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            toks.append(Token(kind, value, line, pos - bol + 1))
        line += value.count("\n")
        if "\n" in value:
            bol = pos + value.rindex("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", line, len(text) - bol + 1))
    return toks


# --------------------------------------------------------------------------
# Surface terms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SVar:
    name: str


@dataclass(frozen=True)
class SU:
    level: int


@dataclass(frozen=True)
class SNum:
    value: int


@dataclass(frozen=True)
class SPi:
    name: str | None
    dom: object
    cod: object


@dataclass(frozen=True)
class SLam:
    name: str
    body: object


@dataclass(frozen=True)
class SPLam:
    name: str
    body: object


@dataclass(frozen=True)
class SCLam:
    name: str
    body: object


@dataclass(frozen=True)
class SForall:
    name: str
    body: object


@dataclass(frozen=True)
class SLater:
    tick: str
    clock: str
    body: object


@dataclass(frozen=True)
class STickLam:
    tick: str
    clock: str
    body: object


@dataclass(frozen=True)
class SApp:
    fn: object
    arg: object


@dataclass(frozen=True)
class SAt:
    fn: object
    arg: object


@dataclass(frozen=True)
class SCApp:
    fn: object
    clock: str


@dataclass(frozen=True)
class STickApp:
    fn: object
    tick: object


@dataclass(frozen=True)
class SForce:
    bind: str | None
    fn: object
    clock: str
    tick: object


@dataclass(frozen=True)
class SPath:
    ty: object
    left: object
    right: object


@dataclass(frozen=True)
class SDFix:
    clock: str
    fn: object


@dataclass(frozen=True)
class SPFix:
    clock: str
    fn: object


@dataclass(frozen=True)
class SComp:
    ivar: str
    ty: object | None
    parts: tuple
    base: object


@dataclass(frozen=True)
class SHComp:
    ivar: str
    ty: object | None
    parts: tuple
    base: object


@dataclass(frozen=True)
class STrans:
    ivar: str
    ty: object
    face: object | None
    base: object


@dataclass(frozen=True)
class SSystem:
    parts: tuple


@dataclass(frozen=True)
class SMeet:
    left: object
    right: object


@dataclass(frozen=True)
class SJoin:
    left: object
    right: object


@dataclass(frozen=True)
class SNeg:
    arg: object


@dataclass(frozen=True)
class SFEq:
    name: str
    end: int


@dataclass(frozen=True)
class SDiamond:
    pass


@dataclass(frozen=True)
class STirr:
    left: object
    right: object
    at: object


@dataclass(frozen=True)
class SClockBind:
    name: str
    body: object


@dataclass(frozen=True)
class SCase:
    label: str
    names: tuple
    body: object


@dataclass(frozen=True)
class SClockElim:
    hit: str
    n: int
    params: tuple
    scrut: object
    hvar: str
    motive: object
    cases: tuple


# --------------------------------------------------------------------------
# Surface declarations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SDefD:
    name: str
    binders: tuple  # ((name, surface type), ...)
    ty: object
    body: object
    expect: tuple | None
    line: int


@dataclass(frozen=True)
class SCtorD:
    label: str
    binders: tuple
    boundary: tuple  # ((surface face, surface term | None), ...)


@dataclass(frozen=True)
class SDataD:
    name: str
    params: tuple
    level: int
    ctors: tuple
    expect: tuple | None
    line: int


@dataclass(frozen=True)
class SConvD:
    lhs: object
    rhs: object
    ty: object
    want_equal: bool
    line: int


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self, k=0):
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, kind, value=None):
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def expect(self, kind, value=None):
        if not self.at(kind, value):
            want = value if value is not None else kind
            self.fail(f"expected {want!r}")
        return self.advance()

    def fail(self, msg):
        tok = self.peek()
        got = tok.value or "end of input"
        raise ParseError(f"{tok.line}:{tok.col}: {msg}, found {got!r}")

    # -- names -------------------------------------------------------------

    def name(self):
        tok = self.peek()
        if tok.kind != "ident" or tok.value in RESERVED:
            self.fail("expected a name")
        return self.advance().value

    def names1(self):
        out = [self.name()]
        while self.peek().kind == "ident" and self.peek().value not in RESERVED:
            out.append(self.advance().value)
        return out

    # -- terms -------------------------------------------------------------

    def term(self):
        tok = self.peek()
        if tok.kind == "sym" and tok.value == "\\":
            self.advance()
            names = self.names1()
            self.expect("sym", ".")
            body = self.term()
            for nm in reversed(names):
                body = SLam(nm, body)
            return body
        if tok.kind == "sym" and tok.value == "/\\":
            self.advance()
            names = self.names1()
            self.expect("sym", ".")
            body = self.term()
            for nm in reversed(names):
                body = SCLam(nm, body)
            return body
        if tok.kind == "sym" and tok.value == "<":
            self.advance()
            names = self.names1()
            self.expect("sym", ">")
            body = self.term()
            for nm in reversed(names):
                body = SPLam(nm, body)
            return body
        if tok.kind == "ident" and tok.value == "forall":
            self.advance()
            names = self.names1()
            self.expect("sym", ".")
            body = self.term()
            for nm in reversed(names):
                body = SForall(nm, body)
            return body
        if tok.kind == "ident" and tok.value == "tick":
            self.advance()
            nm = self.name()
            self.expect("sym", ":")
            clock = self.name()
            self.expect("sym", ".")
            return STickLam(nm, clock, self.term())
        return self.arrow()

    def _at_binder_group(self):
        if not self.at("sym", "("):
            return False
        k = 1
        seen = 0
        while (self.peek(k).kind == "ident"
               and self.peek(k).value not in RESERVED):
            k += 1
            seen += 1
        return seen > 0 and self.peek(k).kind == "sym" \
            and self.peek(k).value == ":"

    def binder_groups(self):
        groups = []
        while self._at_binder_group():
            self.expect("sym", "(")
            names = self.names1()
            self.expect("sym", ":")
            ty = self.term()
            self.expect("sym", ")")
            for nm in names:
                groups.append((nm, ty))
        return groups

    def arrow(self):
        if self._at_binder_group():
            groups = self.binder_groups()
            self.expect("sym", "->")
            cod = self.term()
            for nm, ty in reversed(groups):
                cod = SPi(nm, ty, cod)
            return cod
        left = self.join_level()
        if self.at("sym", "->"):
            self.advance()
            return SPi(None, left, self.term())
        return left

    def join_level(self):
        t = self.meet_level()
        while self.at("sym", "\\/"):
            self.advance()
            t = SJoin(t, self.meet_level())
        return t

    def meet_level(self):
        t = self.at_level()
        while self.at("sym", "/\\"):
            self.advance()
            t = SMeet(t, self.at_level())
        return t

    def at_level(self):
        t = self.app()
        while self.at("sym", "@"):
            self.advance()
            t = SAt(t, self.iatom())
        return t

    def _at_arg_atom(self):
        tok = self.peek()
        if tok.kind == "num":
            return True
        if tok.kind == "ident":
            return tok.value not in RESERVED or _UNIVERSE.match(tok.value)
        return tok.kind == "sym" and tok.value in ("(", "~")

    def app(self):
        t = self.atom()
        while True:
            if self._at_arg_atom():
                t = SApp(t, self.atom())
            elif self.at("sym", "{"):
                self.advance()
                clock = self.name()
                self.expect("sym", "}")
                t = SCApp(t, clock)
            elif self.at("sym", "["):
                t = self.tick_suffix(t)
            else:
                return t

    def tick_suffix(self, t):
        self.expect("sym", "[")
        first = self.tick_expr()
        if self.at("sym", ","):
            self.advance()
            if not isinstance(first, SVar):
                self.fail("expected a clock name before ','")
            u = self.tick_expr()
            self.expect("sym", "]")
            if isinstance(t, SClockBind):
                return SForce(t.name, t.body, first.name, u)
            return SForce(None, t, first.name, u)
        self.expect("sym", "]")
        if isinstance(t, SClockBind):
            self.fail("a clock binder must be applied to '[clock, tick]'")
        return STickApp(t, first)

    def tick_expr(self):
        if self.at("sym", "<>"):
            self.advance()
            return SDiamond()
        if self.at("ident", "tirr"):
            self.advance()
            self.expect("sym", "(")
            u = self.tick_expr()
            self.expect("sym", ",")
            v = self.tick_expr()
            self.expect("sym", ",")
            r = self.iexpr()
            self.expect("sym", ")")
            return STirr(u, v, r)
        return SVar(self.name())

    # -- interval expressions ---------------------------------------------

    def iexpr(self):
        t = self.imeet()
        while self.at("sym", "\\/"):
            self.advance()
            t = SJoin(t, self.imeet())
        return t

    def imeet(self):
        t = self.iatom()
        while self.at("sym", "/\\"):
            self.advance()
            t = SMeet(t, self.iatom())
        return t

    def iatom(self):
        if self.at("sym", "~"):
            self.advance()
            return SNeg(self.iatom())
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return SNum(int(tok.value))
        if self.at("sym", "("):
            self.advance()
            t = self.iexpr()
            self.expect("sym", ")")
            return t
        return SVar(self.name())

    # -- faces -------------------------------------------------------------

    def face(self):
        t = self.face_meet()
        while self.at("sym", "\\/"):
            self.advance()
            t = SJoin(t, self.face_meet())
        return t

    def face_meet(self):
        t = self.face_atom()
        while self.at("sym", "/\\"):
            self.advance()
            t = SMeet(t, self.face_atom())
        return t

    def face_atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return SNum(int(tok.value))
        self.expect("sym", "(")
        if (self.peek().kind == "ident"
                and self.peek(1).kind == "sym" and self.peek(1).value == "="):
            nm = self.name()
            self.expect("sym", "=")
            end = int(self.expect("num").value)
            if end not in (0, 1):
                self.fail("a face equation ends in 0 or 1")
            self.expect("sym", ")")
            return SFEq(nm, end)
        t = self.face()
        self.expect("sym", ")")
        return t

    def bracket_parts(self):
        """[phi -> t, ...]; entries without '->' carry face only."""
        self.expect("sym", "[")
        parts = []
        if self.at("sym", "]"):
            self.advance()
            return tuple(parts)
        while True:
            phi = self.face()
            if self.at("sym", "->"):
                self.advance()
                parts.append((phi, self.term()))
            else:
                parts.append((phi, None))
            if self.at("sym", ","):
                self.advance()
                continue
            self.expect("sym", "]")
            return tuple(parts)

    # -- atoms -------------------------------------------------------------

    def atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return SNum(int(tok.value))
        if tok.kind == "sym" and tok.value == "~":
            self.advance()
            return SNeg(self.atom())
        if tok.kind == "sym" and tok.value == "(":
            return self.paren()
        if tok.kind == "sym" and tok.value == "[":
            parts = self.bracket_parts()
            for phi, t in parts:
                if t is None:
                    self.fail("a system component needs '-> term'")
            return SSystem(parts)
        if tok.kind == "sym" and tok.value == "|>":
            self.advance()
            self.expect("sym", "(")
            nm = self.name()
            self.expect("sym", ":")
            clock = self.name()
            self.expect("sym", ")")
            return SLater(nm, clock, self.atom())
        if tok.kind == "ident":
            m = _UNIVERSE.match(tok.value)
            if m:
                self.advance()
                return SU(int(m.group(1)))
            if tok.value == "Path":
                self.advance()
                return SPath(self.atom(), self.atom(), self.atom())
            if tok.value == "tirr":
                self.advance()
                self.expect("sym", "(")
                u = self.tick_expr()
                self.expect("sym", ",")
                v = self.tick_expr()
                self.expect("sym", ",")
                r = self.iexpr()
                self.expect("sym", ")")
                return STirr(u, v, r)
            if tok.value in ("dfix", "pfix"):
                self.advance()
                clock = self.name()
                fn = self.atom()
                cls = SDFix if tok.value == "dfix" else SPFix
                return cls(clock, fn)
            if tok.value in ("comp", "hcomp"):
                self.advance()
                self.expect("sym", "^")
                iv = self.name()
                ty = None if self.at("sym", "[") else self.atom()
                parts = self.bracket_parts()
                base = self.atom()
                cls = SComp if tok.value == "comp" else SHComp
                return cls(iv, ty, parts, base)
            if tok.value == "trans":
                self.advance()
                self.expect("sym", "^")
                iv = self.name()
                ty = self.atom()
                face = None
                if self.at("sym", "["):
                    self.advance()
                    face = self.face()
                    self.expect("sym", "]")
                return STrans(iv, ty, face, self.atom())
            if tok.value == "clockelim":
                return self.clockelim()
            if tok.value == "I":
                self.advance()
                return SVar("I")
            if tok.value in RESERVED:
                self.fail(f"keyword {tok.value!r} cannot start a term here")
            self.advance()
            return SVar(tok.value)
        self.fail("expected a term")

    def paren(self):
        self.expect("sym", "(")
        if (self.peek().kind == "ident"
                and self.peek().value not in RESERVED
                and self.peek(1).kind == "sym" and self.peek(1).value == "."):
            nm = self.name()
            self.expect("sym", ".")
            body = self.term()
            self.expect("sym", ")")
            return SClockBind(nm, body)
        t = self.term()
        if self.at("sym", "="):
            if not isinstance(t, SVar):
                self.fail("a face equation applies to a variable")
            self.advance()
            end = int(self.expect("num").value)
            if end not in (0, 1):
                self.fail("a face equation ends in 0 or 1")
            self.expect("sym", ")")
            return SFEq(t.name, end)
        self.expect("sym", ")")
        return t

    def clockelim(self):
        self.expect("ident", "clockelim")
        self.expect("sym", "^")
        n = int(self.expect("num").value)
        hit = self.name()
        spine = []
        while not self.at("ident", "into"):
            if not self._at_arg_atom():
                self.fail("expected an argument or 'into'")
            spine.append(self.atom())
        if not spine:
            self.fail("clockelim needs a scrutinee")
        self.expect("ident", "into")
        self.expect("sym", "(")
        hvar = self.name()
        self.expect("sym", ".")
        motive = self.term()
        self.expect("sym", ")")
        self.expect("ident", "with")
        cases = []
        while self.at("sym", "|"):
            self.advance()
            label = self.name()
            names = []
            while not self.at("sym", "=>"):
                names.append(self.name())
            self.expect("sym", "=>")
            cases.append(SCase(label, tuple(names), self.term()))
        return SClockElim(hit, n, tuple(spine[:-1]), spine[-1],
                          hvar, motive, tuple(cases))

    # -- declarations ------------------------------------------------------

    def module(self):
        decls = []
        pending = None
        while not self.at("eof"):
            tok = self.peek()
            if tok.kind == "pragma":
                pending = self.pragma(decls, pending)
            elif self.at("ident", "def"):
                decls.append(self.def_decl(pending))
                pending = None
            elif self.at("ident", "data"):
                decls.append(self.data_decl(pending))
                pending = None
            else:
                self.fail("expected a declaration")
        if pending is not None:
            raise ParseError("expectation pragma not attached to a declaration")
        return tuple(decls)

    def pragma(self, decls, pending):
        tok = self.advance()
        if tok.value in ("--expect-conv", "--expect-not-conv"):
            lhs = self.term()
            self.expect("sym", "=")
            rhs = self.term()
            self.expect("sym", ":")
            ty = self.term()
            decls.append(SConvD(lhs, rhs, ty,
                                tok.value == "--expect-conv", tok.line))
            return pending
        if pending is not None:
            self.fail("duplicate expectation pragma")
        if tok.value == "--expect-pass":
            return ("pass",)
        self.expect("sym", "(")
        cls = self.expect("ident").value
        self.expect("sym", ")")
        if cls not in ERROR_CLASSES:
            raise ParseError(
                f"{tok.line}:{tok.col}: unknown error class {cls!r}"
            )
        return ("fail", cls)

    def def_decl(self, expect):
        line = self.expect("ident", "def").line
        name = self.name()
        binders = tuple(self.binder_groups())
        self.expect("sym", ":")
        ty = self.term()
        self.expect("sym", ":=")
        body = self.term()
        return SDefD(name, binders, ty, body, expect, line)

    def data_decl(self, expect):
        line = self.expect("ident", "data").line
        name = self.name()
        params = tuple(self.binder_groups())
        level = 0
        if self.at("sym", ":"):
            self.advance()
            tok = self.expect("ident")
            m = _UNIVERSE.match(tok.value)
            if not m:
                self.fail("expected a universe after ':'")
            level = int(m.group(1))
        self.expect("ident", "where")
        ctors = []
        while self.at("sym", "|"):
            self.advance()
            label = self.name()
            binders = tuple(self.binder_groups())
            boundary = self.bracket_parts() if self.at("sym", "[") else ()
            ctors.append(SCtorD(label, binders, boundary))
        return SDataD(name, params, level, tuple(ctors), expect, line)


# --------------------------------------------------------------------------
# Elaboration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class _Scope:
    entries: tuple  # ((name, sort), ...), innermost last

    def push(self, name, sort):
        return _Scope(self.entries + ((name, sort),))

    def lookup(self, name):
        counts = {}
        for nm, sort in reversed(self.entries):
            if nm == name:
                return sort, counts.get(sort, 0)
            counts[sort] = counts.get(sort, 0) + 1
        return None


def _face_shift1(phi):
    match phi:
        case F0() | F1():
            return phi
        case FEq(ix, end):
            return FEq(ix + 1, end)
        case FAnd(left, right):
            return FAnd(_face_shift1(left), _face_shift1(right))
        case FOr(left, right):
            return FOr(_face_shift1(left), _face_shift1(right))
    raise TypeError(f"not a face: {phi!r}")


def _face_unshift1(phi):
    match phi:
        case F0() | F1():
            return phi
        case FEq(ix, end):
            if ix == 0:
                raise ValueError("face mentions the bound interval variable")
            return FEq(ix - 1, end)
        case FAnd(left, right):
            return FAnd(_face_unshift1(left), _face_unshift1(right))
        case FOr(left, right):
            return FOr(_face_unshift1(left), _face_unshift1(right))
    raise TypeError(f"not a face: {phi!r}")


def _join_faces(faces):
    out = None
    for phi in faces:
        out = phi if out is None else FOr(out, phi)
    return F0() if out is None else out


# Elaborated declarations -------------------------------------------------

@dataclass(frozen=True)
class Definition:
    name: str
    ty: object
    body: object
    expect: tuple | None


@dataclass(frozen=True)
class DataDefinition:
    sig: HitSignature
    expect: tuple | None


@dataclass(frozen=True)
class ConvCheck:
    name: str
    ty: object
    lhs: object
    rhs: object
    want_equal: bool


@dataclass(frozen=True)
class Module:
    decls: tuple


AMBIENT_CLOCK = "k0"


class Elaborator:
    """Resolves one surface declaration at a time, accumulating the names
    of earlier definitions and data signatures."""

    def __init__(self):
        self.defs = set()
        self.sigs = {}
        self.labels = {}  # label -> signature name
        self.conv_count = 0

    def base_scope(self):
        return _Scope(((AMBIENT_CLOCK, CLOCK),))

    def decl(self, d):
        match d:
            case SDefD():
                return self.def_decl(d)
            case SDataD():
                return self.data_decl(d)
            case SConvD():
                return self.conv_decl(d)
        raise TypeError(f"not a declaration: {d!r}")

    def decl_name(self, d):
        match d:
            case SDefD(name=name) | SDataD(name=name):
                return name
            case SConvD():
                return f"conv{self.conv_count + 1}"
        raise TypeError(f"not a declaration: {d!r}")

    def def_decl(self, d):
        if d.name in self.defs or d.name in self.sigs or d.name in self.labels:
            raise ParseError(f"line {d.line}: {d.name!r} is already declared")
        sc = self.base_scope()
        doms = []
        for nm, tyS in d.binders:
            doms.append(self.term(sc, tyS))
            sc = sc.push(nm, TERM)
        ty = self.term(sc, d.ty)
        body = self.term(sc, d.body)
        for dom in reversed(doms):
            ty = Pi(dom, ty)
            body = Lam(body)
        self.defs.add(d.name)
        return Definition(d.name, ty, body, d.expect)

    def conv_decl(self, d):
        sc = self.base_scope()
        self.conv_count += 1
        return ConvCheck(f"conv{self.conv_count}", self.term(sc, d.ty),
                         self.term(sc, d.lhs), self.term(sc, d.rhs),
                         d.want_equal)

    # -- terms -------------------------------------------------------------

    def term(self, sc, s):
        match s:
            case SVar(name):
                hit = sc.lookup(name)
                if hit is not None:
                    sort, ix = hit
                    if sort != TERM:
                        raise ParseError(
                            f"{name!r} is a {sort} variable, not a term"
                        )
                    return Var(ix)
                return self.head(sc, name, [])
            case SU(level):
                return U(level)
            case SPi(name, dom, cod):
                d = self.term(sc, dom)
                return Pi(d, self.term(sc.push(name or "_", TERM), cod))
            case SLam(name, body):
                return Lam(self.term(sc.push(name, TERM), body))
            case SPLam(name, body):
                return PLam(self.term(sc.push(name, IVAL), body))
            case SCLam(name, body):
                return CLam(self.term(sc.push(name, CLOCK), body))
            case SForall(name, body):
                return Forall(self.term(sc.push(name, CLOCK), body))
            case SLater(tick, clock, body):
                k = self.clock(sc, clock)
                return Later(k, self.term(sc.push(tick, TICK), body))
            case STickLam(tick, clock, body):
                k = self.clock(sc, clock)
                return TickLam(k, self.term(sc.push(tick, TICK), body))
            case SApp():
                spine = []
                t = s
                while isinstance(t, SApp):
                    spine.append(t.arg)
                    t = t.fn
                spine.reverse()
                if isinstance(t, SVar) and sc.lookup(t.name) is None:
                    return self.head(sc, t.name, spine)
                out = self.term(sc, t)
                for arg in spine:
                    out = App(out, self.term(sc, arg))
                return out
            case SAt(fn, arg):
                return PApp(self.term(sc, fn), self.ival(sc, arg))
            case SCApp(fn, clock):
                return CApp(self.term(sc, fn), self.clock(sc, clock))
            case STickApp(fn, tick):
                return TickApp(self.term(sc, fn), self.tick(sc, tick))
            case SForce(bind, fn, clock, tick):
                k = self.clock(sc, clock)
                u = self.tick(sc, tick)
                inner = self.term(sc.push(bind or "_", CLOCK), fn)
                return ForceApp(inner, k, u)
            case SPath(ty, left, right):
                return PathT(self.term(sc, ty), self.term(sc, left),
                             self.term(sc, right))
            case SDFix(clock, fn):
                return DFix(self.clock(sc, clock), self.term(sc, fn))
            case SPFix(clock, fn):
                return PFix(self.clock(sc, clock), self.term(sc, fn))
            case SComp(ivar, ty, parts, base):
                if ty is None:
                    raise ParseError("comp needs a type annotation")
                sci = sc.push(ivar, IVAL)
                faces, tube = self.tube_parts(sc, sci, parts)
                return Comp(self.term(sci, ty), _join_faces(faces),
                            System(tube), self.term(sc, base))
            case SHComp(ivar, ty, parts, base):
                if ty is None:
                    raise ParseError("hcomp needs a type annotation")
                sci = sc.push(ivar, IVAL)
                faces, tube = self.tube_parts(sc, sci, parts)
                return HComp(self.term(sc, ty), _join_faces(faces),
                             System(tube), self.term(sc, base))
            case STrans(ivar, ty, face, base):
                phi = F0() if face is None else self.face(sc, face)
                return Trans(self.term(sc.push(ivar, IVAL), ty), phi,
                             self.term(sc, base))
            case SSystem(parts):
                out = []
                for phi, t in parts:
                    out.append((self.face(sc, phi), self.term(sc, t)))
                return System(tuple(out))
            case SClockElim():
                return self.clockelim(sc, s)
            case SClockBind():
                raise ParseError(
                    "a clock binder must be forced with '[clock, tick]'"
                )
            case SNum() | SMeet() | SJoin() | SNeg() | SFEq():
                raise ParseError(
                    "interval or face expression used in term position"
                )
            case SDiamond() | STirr():
                raise ParseError("tick expression used in term position")
        raise TypeError(f"not a surface term: {s!r}")

    def tube_parts(self, sc, sci, parts):
        faces, tube = [], []
        for phi, t in parts:
            if t is None:
                raise ParseError("a tube component needs '-> term'")
            f = self.face(sc, phi)
            faces.append(f)
            tube.append((_face_shift1(f), self.term(sci, t)))
        return faces, tuple(tube)

    def head(self, sc, name, spine):
        if name in self.defs:
            out = TopRef(name)
            for arg in spine:
                out = App(out, self.term(sc, arg))
            return out
        if name in self.sigs:
            sig = self.sigs[name]
            want = len(sig.params.types)
            if len(spine) != want:
                raise ParseError(
                    f"{name} takes {want} parameters, got {len(spine)}"
                )
            return Hit(name, tuple(self.term(sc, a) for a in spine))
        if name in self.labels:
            sig = self.sigs[self.labels[name]]
            ctor = sig.constructor(name)
            p = len(sig.params.types)
            a = len(ctor.args.types)
            r = len(ctor.rec_arities)
            v = ctor.ivar_count
            if len(spine) == p + a + r + v:
                params = tuple(self.term(sc, x) for x in spine[:p])
                rest = spine[p:]
            elif len(spine) == a + r + v:
                params, rest = (), spine
            else:
                # Let the checker report the arity error.
                return Con(sig.name, name,
                           (), tuple(self.term(sc, x) for x in spine), (), ())
            return Con(
                sig.name, name, params,
                tuple(self.term(sc, x) for x in rest[:a]),
                tuple(self.term(sc, x) for x in rest[a:a + r]),
                tuple(self.ival(sc, x) for x in rest[a + r:]),
            )
        raise UnboundVariable(f"unbound name {name!r}", name=name)

    def clockelim(self, sc, s):
        sig = self.sigs.get(s.hit)
        if sig is None:
            raise UnboundVariable(f"unbound name {s.hit!r}", name=s.hit)
        if len(s.params) != len(sig.params.types):
            raise ParseError(
                f"{s.hit} takes {len(sig.params.types)} parameters,"
                f" got {len(s.params)}"
            )
        params = tuple(self.term(sc, x) for x in s.params)
        scrut = self.term(sc, s.scrut)
        motive = self.term(sc.push(s.hvar, TERM), s.motive)
        cases = []
        for c in s.cases:
            try:
                ctor = sig.constructor(c.label)
            except KeyError:
                raise ParseError(
                    f"{s.hit} has no constructor {c.label!r}"
                ) from None
            a = len(ctor.args.types)
            r = len(ctor.rec_arities)
            v = ctor.ivar_count
            if len(c.names) != a + 2 * r + v:
                raise ParseError(
                    f"case for {c.label} binds {a + 2 * r + v} names,"
                    f" got {len(c.names)}"
                )
            sc2 = sc
            for nm in c.names[:a + 2 * r]:
                sc2 = sc2.push(nm, TERM)
            for nm in c.names[a + 2 * r:]:
                sc2 = sc2.push(nm, IVAL)
            cases.append(ElimCase(c.label, a, r, v, self.term(sc2, c.body)))
        return ClockElim(s.hit, s.n, params, motive, tuple(cases), scrut)

    # -- other sorts -------------------------------------------------------

    def clock(self, sc, name):
        hit = sc.lookup(name)
        if hit is None or hit[0] != CLOCK:
            raise ParseError(f"{name!r} is not a clock variable in scope")
        return hit[1]

    def ival(self, sc, s):
        match s:
            case SNum(0):
                return I0()
            case SNum(1):
                return I1()
            case SVar(name):
                hit = sc.lookup(name)
                if hit is None or hit[0] != IVAL:
                    raise ParseError(
                        f"{name!r} is not an interval variable in scope"
                    )
                return IVar(hit[1])
            case SNeg(arg):
                return INeg(self.ival(sc, arg))
            case SMeet(left, right):
                return IMeet(self.ival(sc, left), self.ival(sc, right))
            case SJoin(left, right):
                return IJoin(self.ival(sc, left), self.ival(sc, right))
        raise ParseError(f"expected an interval expression")

    def face(self, sc, s):
        match s:
            case SNum(0):
                return F0()
            case SNum(1):
                return F1()
            case SFEq(name, end):
                hit = sc.lookup(name)
                if hit is None or hit[0] != IVAL:
                    raise ParseError(
                        f"{name!r} is not an interval variable in scope"
                    )
                return FEq(hit[1], end)
            case SMeet(left, right):
                return FAnd(self.face(sc, left), self.face(sc, right))
            case SJoin(left, right):
                return FOr(self.face(sc, left), self.face(sc, right))
        raise ParseError("expected a face formula")

    def tick(self, sc, s):
        match s:
            case SDiamond():
                return Diamond()
            case SVar(name):
                hit = sc.lookup(name)
                if hit is None or hit[0] != TICK:
                    raise ParseError(
                        f"{name!r} is not a tick variable in scope"
                    )
                return TickVar(hit[1])
            case STirr(left, right, at):
                return Tirr(self.tick(sc, left), self.tick(sc, right),
                            self.ival(sc, at))
        raise ParseError("expected a tick expression")

    # -- data declarations -------------------------------------------------

    def data_decl(self, d):
        if d.name in self.defs or d.name in self.sigs or d.name in self.labels:
            raise ParseError(f"line {d.line}: {d.name!r} is already declared")
        sc = self.base_scope()
        ptypes = []
        for nm, tyS in d.params:
            ptypes.append(self.term(sc, tyS))
            sc = sc.push(nm, TERM)
        # Syntactic arities first so boundaries may mention any label.
        arities = {}
        for c in d.ctors:
            if c.label in self.labels or c.label in self.defs \
                    or c.label in self.sigs or c.label in arities:
                raise ParseError(
                    f"line {d.line}: {c.label!r} is already declared"
                )
            arities[c.label] = self._ctor_shape(d.name, c)
        ctors = tuple(self.ctor(d.name, sc, c, arities) for c in d.ctors)
        sig = HitSignature(d.name, Telescope(tuple(ptypes)), d.level, ctors)
        self.sigs[d.name] = sig
        for c in d.ctors:
            self.labels[c.label] = d.name
        return DataDefinition(sig, d.expect)

    @staticmethod
    def _rec_target(name, tyS):
        t = tyS
        while isinstance(t, SPi):
            t = t.cod
        if t == SVar(name):
            return True
        while isinstance(t, SApp):
            t = t.fn
        return t == SVar(name)

    def _ctor_shape(self, name, c):
        a = v = 0
        rec_lens = []
        for nm, tyS in c.binders:
            if tyS == SVar("I"):
                v += 1
            elif self._rec_target(name, tyS):
                depth = 0
                t = tyS
                while isinstance(t, SPi):
                    depth += 1
                    t = t.cod
                rec_lens.append(depth)
            else:
                a += 1
        return a, len(rec_lens), v, tuple(rec_lens)

    def ctor(self, name, sc_params, c, arities):
        atypes, recs = [], []
        recnames, ivnames = [], []
        sc = sc_params
        phase = 0
        for nm, tyS in c.binders:
            if tyS == SVar("I"):
                phase = 2
                ivnames.append(nm)
            elif self._rec_target(name, tyS):
                if phase == 2:
                    raise ParseError(
                        f"{c.label}: recursive argument {nm!r} after an"
                        " interval binder"
                    )
                phase = 1
                doms = []
                sc_r, t = sc, tyS
                while isinstance(t, SPi):
                    doms.append(self.term(sc_r, t.dom))
                    sc_r = sc_r.push(t.name or "_", TERM)
                    t = t.cod
                recs.append(Telescope(tuple(doms)))
                recnames.append(nm)
            else:
                if phase != 0:
                    raise ParseError(
                        f"{c.label}: ordinary argument {nm!r} after a"
                        " recursive or interval binder"
                    )
                atypes.append(self.term(sc, tyS))
                sc = sc.push(nm, TERM)
        sc_b = sc
        for nm in ivnames:
            sc_b = sc_b.push(nm, IVAL)
        recmap = {nm: j for j, nm in enumerate(recnames)}
        arrows, bare = [], None
        afaces = []
        for phiS, bS in c.boundary:
            phi = self.face(sc_b, phiS)
            if bS is None:
                if bare is not None:
                    raise ParseError(
                        f"{c.label}: at most one bare face entry"
                    )
                bare = phi
            else:
                if bare is not None:
                    raise ParseError(
                        f"{c.label}: bare face entries must come last"
                    )
                afaces.append(phi)
                arrows.append((phi, self.bnd(sc_b, recmap, arities, bS)))
        if not arrows and bare is None:
            face = F0()
        elif not arrows:
            face = bare
        else:
            face = _join_faces(afaces)
            if bare is not None:
                face = FOr(face, bare)
        return Constructor(c.label, Telescope(tuple(atypes)), tuple(recs),
                           len(ivnames), face, tuple(arrows))

    def bnd(self, sc, recmap, arities, s):
        match s:
            case SVar(name) if name in recmap:
                return BRec(recmap[name], ())
            case SVar(name) if name in arities:
                return self._bnd_con(sc, recmap, arities, name, [])
            case SApp():
                spine = []
                t = s
                while isinstance(t, SApp):
                    spine.append(t.arg)
                    t = t.fn
                spine.reverse()
                if isinstance(t, SVar) and t.name in recmap:
                    return BRec(recmap[t.name],
                                tuple(self.term(sc, x) for x in spine))
                if isinstance(t, SVar) and t.name in arities:
                    return self._bnd_con(sc, recmap, arities, t.name, spine)
            case SHComp(ivar, ty, parts, base):
                if ty is not None:
                    raise ParseError(
                        "a boundary hcomp carries no type annotation"
                    )
                if len(parts) != 1 or parts[0][1] is None:
                    raise ParseError(
                        "a boundary hcomp has exactly one tube component"
                    )
                phi = self.face(sc, parts[0][0])
                tube = self.bnd(sc.push(ivar, IVAL), recmap, arities,
                                parts[0][1])
                return BHComp(phi, tube, self.bnd(sc, recmap, arities, base))
        raise ParseError(
            "a boundary term is a recursive argument, a constructor, or an"
            " hcomp"
        )

    def _bnd_con(self, sc, recmap, arities, label, spine):
        a, r, v, rec_lens = arities[label]
        if len(spine) != a + r + v:
            raise ParseError(
                f"boundary constructor {label} expects {a + r + v}"
                f" arguments, got {len(spine)}"
            )
        recs = []
        for k, x in enumerate(spine[a:a + r]):
            m = rec_lens[k]
            if m == 0:
                recs.append(self.bnd(sc, recmap, arities, x))
            elif isinstance(x, SVar) and x.name in recmap:
                # A function-valued slot: fill it with the recursive
                # argument applied to the slot's own binders.
                recs.append(BRec(recmap[x.name],
                                 tuple(Var(m - 1 - q) for q in range(m))))
            else:
                raise ParseError(
                    f"argument {k} of {label} in a boundary must be a"
                    " recursive argument name"
                )
        return BCon(
            label,
            tuple(self.term(sc, x) for x in spine[:a]),
            tuple(recs),
            tuple(self.ival(sc, x) for x in spine[a + r:]),
        )


def surface_module(text):
    return _Parser(tokenize(text)).module()


def parse_module(text):
    elab = Elaborator()
    return Module(tuple(elab.decl(d) for d in surface_module(text)))


# --------------------------------------------------------------------------
# Printing
# --------------------------------------------------------------------------

class _Printer:
    def __init__(self, taken):
        self.taken = set(taken)
        self.counters = {}

    def fresh(self, prefix):
        n = self.counters.get(prefix, 0)
        while f"{prefix}{n}" in self.taken:
            n += 1
        self.counters[prefix] = n + 1
        name = f"{prefix}{n}"
        self.taken.add(name)
        return name

    @staticmethod
    def lookup(env, sort, ix):
        return env[sort][-1 - ix]

    @staticmethod
    def push(env, sort, name):
        out = dict(env)
        out[sort] = out[sort] + [name]
        return out

    def atom(self, env, t):
        s = self.term(env, t)
        if isinstance(t, (Var, TopRef, U)):
            return s
        if isinstance(t, Hit) and not t.params:
            return s
        if isinstance(t, Con) and not (t.params or t.args or t.recs
                                       or t.ivals):
            return s
        return f"({s})"

    def term(self, env, t):
        match t:
            case Var(ix):
                return self.lookup(env, TERM, ix)
            case TopRef(name):
                return name
            case U(level):
                return f"U{level}"
            case Pi(dom, cod):
                nm = self.fresh("x")
                env2 = self.push(env, TERM, nm)
                return f"({nm} : {self.term(env, dom)})" \
                    f" -> {self.term(env2, cod)}"
            case Lam(body):
                nm = self.fresh("x")
                return f"\\{nm}. {self.term(self.push(env, TERM, nm), body)}"
            case App():
                spine = []
                while isinstance(t, App):
                    spine.append(t.arg)
                    t = t.fn
                spine.reverse()
                args = " ".join(self.atom(env, a) for a in spine)
                return f"{self.atom(env, t)} {args}"
            case PathT(ty, left, right):
                return f"Path {self.atom(env, ty)} {self.atom(env, left)}" \
                    f" {self.atom(env, right)}"
            case PLam(body):
                nm = self.fresh("i")
                return f"<{nm}> {self.term(self.push(env, IVAL, nm), body)}"
            case PApp(fn, arg):
                return f"{self.atom(env, fn)} @ {self.ival(env, arg)}"
            case Forall(body):
                nm = self.fresh("k")
                return f"forall {nm}." \
                    f" {self.term(self.push(env, CLOCK, nm), body)}"
            case CLam(body):
                nm = self.fresh("k")
                return f"/\\{nm}." \
                    f" {self.term(self.push(env, CLOCK, nm), body)}"
            case CApp(fn, clock):
                return f"{self.atom(env, fn)}" \
                    f" {{{self.lookup(env, CLOCK, clock)}}}"
            case Later(clock, ty):
                nm = self.fresh("a")
                env2 = self.push(env, TICK, nm)
                return f"|> ({nm} : {self.lookup(env, CLOCK, clock)})" \
                    f" {self.atom(env2, ty)}"
            case TickLam(clock, body):
                nm = self.fresh("a")
                env2 = self.push(env, TICK, nm)
                return f"tick {nm} : {self.lookup(env, CLOCK, clock)}." \
                    f" {self.term(env2, body)}"
            case TickApp(fn, tick):
                return f"{self.atom(env, fn)} [{self.tick(env, tick)}]"
            case ForceApp(fn, clock, tick):
                nm = self.fresh("k")
                env2 = self.push(env, CLOCK, nm)
                return f"({nm}. {self.term(env2, fn)})" \
                    f" [{self.lookup(env, CLOCK, clock)}," \
                    f" {self.tick(env, tick)}]"
            case DFix(clock, fn):
                return f"dfix {self.lookup(env, CLOCK, clock)}" \
                    f" {self.atom(env, fn)}"
            case PFix(clock, fn):
                return f"pfix {self.lookup(env, CLOCK, clock)}" \
                    f" {self.atom(env, fn)}"
            case Comp(ty, face, tube, base):
                return self._comp(env, "comp", ty, face, tube, base,
                                  ty_under_ivar=True)
            case HComp(ty, face, tube, base):
                return self._comp(env, "hcomp", ty, face, tube, base,
                                  ty_under_ivar=False)
            case Trans(ty, face, base):
                nm = self.fresh("i")
                env2 = self.push(env, IVAL, nm)
                return f"trans^{nm} {self.atom(env2, ty)}" \
                    f" [{self.face(env, face)}] {self.atom(env, base)}"
            case Hit(name, params):
                if not params:
                    return name
                args = " ".join(self.atom(env, p) for p in params)
                return f"{name} {args}"
            case Con(_, label, params, args, recs, ivals):
                parts = [label]
                parts += [self.atom(env, x) for x in params]
                parts += [self.atom(env, x) for x in args]
                parts += [self.atom(env, x) for x in recs]
                parts += [self.ival_atom(env, x) for x in ivals]
                return " ".join(parts)
            case ClockElim(name, n, params, motive, cases, arg):
                nm = self.fresh("h")
                env2 = self.push(env, TERM, nm)
                out = [f"clockelim^{n} {name}"]
                out += [self.atom(env, p) for p in params]
                out.append(self.atom(env, arg))
                out.append(f"into ({nm}. {self.term(env2, motive)}) with")
                for c in cases:
                    out.append(self._case(env, c))
                return " ".join(out)
            case System(parts):
                inner = ", ".join(
                    f"{self.face(env, phi)} -> {self.term(env, u)}"
                    for phi, u in parts
                )
                return f"[{inner}]"
        raise ValueError(f"no surface syntax for {t!r}")

    def _comp(self, env, kw, ty, face, tube, base, ty_under_ivar):
        nm = self.fresh("i")
        env2 = self.push(env, IVAL, nm)
        if not isinstance(tube, System):
            raise ValueError(f"{kw} tube has no surface syntax")
        entries = []
        outer = []
        for phi, u in tube.parts:
            phi0 = _face_unshift1(phi)
            outer.append(phi0)
            entries.append(f"{self.face(env, phi0)} -> {self.term(env2, u)}")
        if _join_faces(outer) != face:
            raise ValueError(f"{kw} extent has no surface syntax")
        ty_env = env2 if ty_under_ivar else env
        return f"{kw}^{nm} {self.atom(ty_env, ty)}" \
            f" [{', '.join(entries)}] {self.atom(env, base)}"

    def _case(self, env, c):
        names = []
        env2 = env
        for _ in range(c.n_args + 2 * c.n_recs):
            nm = self.fresh("x")
            names.append(nm)
            env2 = self.push(env2, TERM, nm)
        for _ in range(c.n_ivars):
            nm = self.fresh("i")
            names.append(nm)
            env2 = self.push(env2, IVAL, nm)
        binder = " ".join([c.label] + names)
        return f"| {binder} => {self.term(env2, c.body)}"

    def tick(self, env, u):
        match u:
            case TickVar(ix):
                return self.lookup(env, TICK, ix)
            case Diamond():
                return "<>"
            case Tirr(left, right, at):
                return f"tirr({self.tick(env, left)}," \
                    f" {self.tick(env, right)}, {self.ival(env, at)})"
        raise ValueError(f"not a tick: {u!r}")

    def ival(self, env, r):
        match r:
            case I0():
                return "0"
            case I1():
                return "1"
            case IVar(ix):
                return self.lookup(env, IVAL, ix)
            case INeg(arg):
                return f"~{self.ival_atom(env, arg)}"
            case IMeet(left, right):
                return f"({self.ival(env, left)} /\\" \
                    f" {self.ival(env, right)})"
            case IJoin(left, right):
                return f"({self.ival(env, left)} \\/" \
                    f" {self.ival(env, right)})"
        raise ValueError(f"not an interval expression: {r!r}")

    def ival_atom(self, env, r):
        s = self.ival(env, r)
        return s  # meets/joins are already parenthesized

    def face(self, env, phi):
        match phi:
            case F0():
                return "0"
            case F1():
                return "1"
            case FEq(ix, end):
                return f"({self.lookup(env, IVAL, ix)} = {end})"
            case FAnd(left, right):
                return f"({self.face(env, left)} /\\" \
                    f" {self.face(env, right)})"
            case FOr(left, right):
                return f"({self.face(env, left)} \\/" \
                    f" {self.face(env, right)})"
        raise ValueError(f"not a face: {phi!r}")


def _base_env():
    return {TERM: [], CLOCK: [AMBIENT_CLOCK], TICK: [], IVAL: []}


def _expect_line(expect):
    if expect is None:
        return None
    if expect[0] == "pass":
        return "--expect-pass"
    return f"--expect-fail({expect[1]})"


def print_module(module):
    taken = {AMBIENT_CLOCK, "I"} | set(RESERVED)
    for d in module.decls:
        match d:
            case Definition(name=name):
                taken.add(name)
            case DataDefinition(sig=sig):
                taken.add(sig.name)
                taken.update(c.label for c in sig.constructors)
    chunks = []
    for d in module.decls:
        pr = _Printer(taken)
        match d:
            case Definition(name, ty, body, expect):
                lines = []
                if (p := _expect_line(expect)) is not None:
                    lines.append(p)
                env = _base_env()
                lines.append(f"def {name} : {pr.term(env, ty)}"
                             f" := {pr.term(env, body)}")
                chunks.append("\n".join(lines))
            case DataDefinition(sig, expect):
                chunks.append(_print_data(pr, sig, expect))
            case ConvCheck(_, ty, lhs, rhs, want):
                env = _base_env()
                kw = "--expect-conv" if want else "--expect-not-conv"
                chunks.append(f"{kw} {pr.term(env, lhs)} ="
                              f" {pr.term(env, rhs)} : {pr.term(env, ty)}")
    return "\n\n".join(chunks) + "\n"


def _print_data(pr, sig, expect):
    lines = []
    if (p := _expect_line(expect)) is not None:
        lines.append(p)
    env = _base_env()
    params = []
    for ty in sig.params.types:
        nm = pr.fresh("p")
        params.append(f"({nm} : {pr.term(env, ty)})")
        env = pr.push(env, TERM, nm)
    head = " ".join(["data", sig.name] + params + [f": U{sig.level}", "where"])
    lines.append(head)
    for ctor in sig.constructors:
        lines.append("  " + _print_ctor(pr, env, sig, ctor))
    return "\n".join(lines)


def _print_ctor(pr, env, sig, ctor):
    parts = ["|", ctor.label]
    for ty in ctor.args.types:
        nm = pr.fresh("x")
        parts.append(f"({nm} : {pr.term(env, ty)})")
        env = pr.push(env, TERM, nm)
    recnames = []
    for arity in ctor.rec_arities:
        nm = pr.fresh("r")
        recnames.append(nm)
        env2 = env
        chain = []
        for ty in arity.types:
            bn = pr.fresh("b")
            chain.append(f"({bn} : {pr.term(env2, ty)}) -> ")
            env2 = pr.push(env2, TERM, bn)
        parts.append(f"({nm} : {''.join(chain)}{sig.name})")
    for _ in range(ctor.ivar_count):
        nm = pr.fresh("i")
        parts.append(f"({nm} : I)")
        env = pr.push(env, IVAL, nm)
    entries = []
    afaces = []
    for phi, b in ctor.boundary:
        afaces.append(phi)
        entries.append(f"{pr.face(env, phi)} ->"
                       f" {_print_bnd(pr, env, recnames, sig, b)}")
    if not ctor.boundary:
        if ctor.face != F0():
            entries.append(pr.face(env, ctor.face))
    else:
        afold = _join_faces(afaces)
        if ctor.face != afold:
            if not (isinstance(ctor.face, FOr) and ctor.face.left == afold):
                raise ValueError("constructor face has no surface syntax")
            entries.append(pr.face(env, ctor.face.right))
    if entries:
        parts.append(f"[{', '.join(entries)}]")
    return " ".join(parts)


def _print_bnd(pr, env, recnames, sig, b, atom=False):
    match b:
        case BRec(rec, args):
            parts = [recnames[rec]] + [pr.atom(env, x) for x in args]
        case BCon(label, args, recs, ivals):
            target = sig.constructor(label)
            parts = [label]
            parts += [pr.atom(env, x) for x in args]
            for k, x in enumerate(recs):
                m = len(target.rec_arities[k].types)
                if m == 0:
                    parts.append(_print_bnd(pr, env, recnames, sig, x,
                                            atom=True))
                else:
                    eta = tuple(Var(m - 1 - q) for q in range(m))
                    if not (isinstance(x, BRec) and x.args == eta):
                        raise ValueError(
                            "boundary term has no surface syntax"
                        )
                    parts.append(recnames[x.rec])
            parts += [pr.ival_atom(env, x) for x in ivals]
        case BHComp(face, tube, base):
            nm = pr.fresh("i")
            env2 = pr.push(env, IVAL, nm)
            parts = [
                f"hcomp^{nm} [{pr.face(env, face)} ->"
                f" {_print_bnd(pr, env2, recnames, sig, tube)}]",
                _print_bnd(pr, env, recnames, sig, base, atom=True),
            ]
        case _:
            raise ValueError(f"not a boundary term: {b!r}")
    s = " ".join(parts)
    if atom and len(parts) > 1:
        return f"({s})"
    return s
