"""Core term language: sorted de Bruijn syntax over five-entry contexts.

Contexts are ordered lists whose entries come in five sorts -- term
variables, clocks, ticks, interval variables, and face restrictions.  A
variable of a given sort is an index counting binders of that same sort
from the inside out, so inserting an entry of one sort never renumbers the
others.  Face entries bind no variables at all; they only restrict.
"""

from dataclasses import dataclass, fields

from .errors import IllFormedRedex, NonProperEntry, TickEscape
from .interval import (
    FaceFormula, IntervalExpr, face_normalize, face_map_vars, IVar,
    iv_map_vars, iv_normalize,
)

# Entry sorts.
TERM, CLOCK, TICK, IVAL, FACE = "term", "clock", "tick", "ival", "face"


# --------------------------------------------------------------------------
# Ticks
# --------------------------------------------------------------------------

class Tick:
    __slots__ = ()


@dataclass(frozen=True)
class TickVar(Tick):
    ix: int

    def __repr__(self):
        return f"a{self.ix}"


@dataclass(frozen=True)
class Diamond(Tick):
    """Only legal inside forcing-tick applications."""

    def __repr__(self):
        return "<>"


@dataclass(frozen=True)
class Tirr(Tick):
    left: Tick
    right: Tick
    at: IntervalExpr

    def __repr__(self):
        return f"tirr({self.left!r}, {self.right!r}, {self.at!r})"


DIAMOND = Diamond()


# --------------------------------------------------------------------------
# Terms
# --------------------------------------------------------------------------

class Term:
    __slots__ = ()

    def __repr__(self):
        parts = ", ".join(repr(getattr(self, f.name)) for f in fields(self))
        return f"{type(self).__name__}({parts})"


def _td(cls):
    return dataclass(frozen=True, repr=False)(cls)


@_td
class Var(Term):
    ix: int

    def __repr__(self):
        return f"x{self.ix}"


@_td
class U(Term):
    level: int

    def __repr__(self):
        return f"U{self.level}"


@_td
class Pi(Term):
    dom: Term
    cod: Term  # binds one term variable


@_td
class Lam(Term):
    body: Term  # binds one term variable


@_td
class App(Term):
    fn: Term
    arg: Term


@_td
class Sigma(Term):
    fst: Term
    snd: Term  # binds one term variable


@_td
class Pair(Term):
    fst: Term
    snd: Term


@_td
class Fst(Term):
    arg: Term


@_td
class Snd(Term):
    arg: Term


@_td
class PathT(Term):
    ty: Term
    left: Term
    right: Term


@_td
class PLam(Term):
    body: Term  # binds one interval variable


@_td
class PApp(Term):
    fn: Term
    arg: IntervalExpr


@_td
class Forall(Term):
    body: Term  # binds one clock


@_td
class CLam(Term):
    body: Term  # binds one clock


@_td
class CApp(Term):
    fn: Term
    clock: int


@_td
class Later(Term):
    clock: int
    ty: Term  # binds one tick on `clock`


@_td
class TickLam(Term):
    clock: int
    body: Term  # binds one tick on `clock`


@_td
class TickApp(Term):
    fn: Term
    tick: Tick


@_td
class ForceApp(Term):
    """Forcing tick application (kappa.fn)[(clock, tick)]; fn binds a clock."""
    fn: Term
    clock: int
    tick: Tick


@_td
class DFix(Term):
    clock: int
    fn: Term


@_td
class PFix(Term):
    clock: int
    fn: Term


@_td
class Comp(Term):
    """comp^i ty [face -> tube] base; ty and tube bind the interval variable."""
    ty: Term
    face: FaceFormula
    tube: Term
    base: Term


@_td
class HComp(Term):
    """Homogeneous composition at a fixed type; tube binds the line variable."""
    ty: Term
    face: FaceFormula
    tube: Term
    base: Term


@_td
class Trans(Term):
    """Transport along a type line (binds the line variable) under a face."""
    ty: Term
    face: FaceFormula
    base: Term


@_td
class Hit(Term):
    name: str
    params: tuple


@_td
class Con(Term):
    name: str
    label: str
    params: tuple  # HIT parameters delta
    args: tuple    # non-recursive arguments
    recs: tuple    # recursive arguments
    ivals: tuple   # interval arguments


@_td
class ElimCase:
    label: str
    n_args: int   # gamma binders (term sort)
    n_recs: int   # x-bar and y-bar binders (term sort, n_recs each)
    n_ivars: int  # interval binders
    body: Term


@_td
class ClockElim(Term):
    """Induction under clocks with an n-ary clock vector (n may be 0)."""
    name: str
    n: int
    params: tuple            # delta, each component clock-abstracted n times
    motive: Term             # binds one term variable h
    cases: tuple             # ElimCase per constructor, declaration order
    arg: Term


@_td
class System(Term):
    parts: tuple  # of (FaceFormula, Term)


@_td
class TopRef(Term):
    name: str


# --------------------------------------------------------------------------
# Contexts
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EVar:
    ty: Term


@dataclass(frozen=True)
class EClock:
    pass


@dataclass(frozen=True)
class ETick:
    clock: int  # clock index relative to the prefix before this entry


@dataclass(frozen=True)
class EIVar:
    pass


@dataclass(frozen=True)
class EFace:
    face: FaceFormula


_ENTRY_SORT = {EVar: TERM, EClock: CLOCK, ETick: TICK, EIVar: IVAL, EFace: FACE}


def entry_sort(entry):
    return _ENTRY_SORT[type(entry)]


@dataclass(frozen=True)
class Context:
    entries: tuple = ()

    def push(self, entry):
        return Context(self.entries + (entry,))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def sorts(self):
        return [entry_sort(e) for e in self.entries]

    def count(self, sort):
        return sum(1 for e in self.entries if entry_sort(e) == sort)

    def pos_of(self, sort, ix):
        """Absolute position (0 = outermost) of the ix-th entry of `sort`
        counted from the inside."""
        seen = 0
        for pos in range(len(self.entries) - 1, -1, -1):
            if entry_sort(self.entries[pos]) == sort:
                if seen == ix:
                    return pos
                seen += 1
        raise IndexError(f"no {sort} entry with index {ix}")

    def index_at(self, pos):
        """Sort-local index, seen from the full context, of the entry at pos."""
        sort = entry_sort(self.entries[pos])
        return sum(
            1 for e in self.entries[pos + 1:] if entry_sort(e) == sort
        )

    def suffix_sorts(self, pos):
        return [entry_sort(e) for e in self.entries[pos + 1:]]

    def term_type(self, ix):
        pos = self.pos_of(TERM, ix)
        # The payload is scoped in the strict prefix: weaken past the entry
        # itself as well as everything bound after it.
        sorts = [entry_sort(e) for e in self.entries[pos:]]
        return weaken(self.entries[pos].ty, sorts)

    def tick_clock(self, ix):
        """Clock index (valid in the full context) of the ix-th tick."""
        pos = self.pos_of(TICK, ix)
        entry = self.entries[pos]
        extra = sum(
            1 for e in self.entries[pos:] if entry_sort(e) == CLOCK
        )
        return entry.clock + extra

    def restriction_faces(self):
        """All face restrictions, each shifted to the full context."""
        out = []
        for pos, e in enumerate(self.entries):
            if entry_sort(e) == FACE:
                shift = sum(
                    1 for x in self.entries[pos + 1:]
                    if entry_sort(x) == IVAL
                )
                out.append(face_map_vars(e.face, lambda ix: IVar(ix + shift)))
        return out


# --------------------------------------------------------------------------
# Generic renaming (weakening / strengthening)
# --------------------------------------------------------------------------

class Renaming:
    """Per-sort index maps; each map takes an index *relative to the outer
    context* (binder-local indices are handled by the traversal)."""

    def __init__(self, term=None, clock=None, tick=None, ival=None):
        ident = lambda ix: ix
        self.maps = {
            TERM: term or ident,
            CLOCK: clock or ident,
            TICK: tick or ident,
            IVAL: ival or ident,
        }

    def apply(self, sort, ix, depth):
        if ix < depth[sort]:
            return ix
        return self.maps[sort](ix - depth[sort]) + depth[sort]


def _shift_map(cut, by):
    def go(ix):
        new = ix + by if ix >= cut else ix
        if new < 0:
            raise TickEscape("variable does not survive strengthening")
        return new
    return go


ZERO_DEPTH = {TERM: 0, CLOCK: 0, TICK: 0, IVAL: 0}


def _bump(depth, *sorts):
    new = dict(depth)
    for s in sorts:
        new[s] += 1
    return new


def rename_iexpr(r, ren, depth):
    return iv_map_vars(r, lambda ix: IVar(ren.apply(IVAL, ix, depth)))


def rename_face(phi, ren, depth):
    return face_map_vars(phi, lambda ix: IVar(ren.apply(IVAL, ix, depth)))


def rename_tick(u, ren, depth):
    match u:
        case TickVar(ix):
            return TickVar(ren.apply(TICK, ix, depth))
        case Diamond():
            return u
        case Tirr(l, r, at):
            return Tirr(
                rename_tick(l, ren, depth),
                rename_tick(r, ren, depth),
                rename_iexpr(at, ren, depth),
            )
    raise IllFormedRedex(f"not a tick: {u!r}")


def rename_term(t, ren, depth=None):
    d = ZERO_DEPTH if depth is None else depth
    go = rename_term

    match t:
        case Var(ix):
            return Var(ren.apply(TERM, ix, d))
        case U(_) | TopRef(_):
            return t
        case Pi(dom, cod):
            return Pi(go(dom, ren, d), go(cod, ren, _bump(d, TERM)))
        case Lam(body):
            return Lam(go(body, ren, _bump(d, TERM)))
        case App(fn, arg):
            return App(go(fn, ren, d), go(arg, ren, d))
        case Sigma(fst, snd):
            return Sigma(go(fst, ren, d), go(snd, ren, _bump(d, TERM)))
        case Pair(fst, snd):
            return Pair(go(fst, ren, d), go(snd, ren, d))
        case Fst(arg):
            return Fst(go(arg, ren, d))
        case Snd(arg):
            return Snd(go(arg, ren, d))
        case PathT(ty, left, right):
            return PathT(go(ty, ren, d), go(left, ren, d), go(right, ren, d))
        case PLam(body):
            return PLam(go(body, ren, _bump(d, IVAL)))
        case PApp(fn, arg):
            return PApp(go(fn, ren, d), rename_iexpr(arg, ren, d))
        case Forall(body):
            return Forall(go(body, ren, _bump(d, CLOCK)))
        case CLam(body):
            return CLam(go(body, ren, _bump(d, CLOCK)))
        case CApp(fn, clock):
            return CApp(go(fn, ren, d), ren.apply(CLOCK, clock, d))
        case Later(clock, ty):
            return Later(ren.apply(CLOCK, clock, d), go(ty, ren, _bump(d, TICK)))
        case TickLam(clock, body):
            return TickLam(
                ren.apply(CLOCK, clock, d), go(body, ren, _bump(d, TICK))
            )
        case TickApp(fn, tick):
            return TickApp(go(fn, ren, d), rename_tick(tick, ren, d))
        case ForceApp(fn, clock, tick):
            return ForceApp(
                go(fn, ren, _bump(d, CLOCK)),
                ren.apply(CLOCK, clock, d),
                rename_tick(tick, ren, d),
            )
        case DFix(clock, fn):
            return DFix(ren.apply(CLOCK, clock, d), go(fn, ren, d))
        case PFix(clock, fn):
            return PFix(ren.apply(CLOCK, clock, d), go(fn, ren, d))
        case Comp(ty, face, tube, base):
            di = _bump(d, IVAL)
            return Comp(
                go(ty, ren, di), rename_face(face, ren, d),
                go(tube, ren, di), go(base, ren, d),
            )
        case HComp(ty, face, tube, base):
            return HComp(
                go(ty, ren, d), rename_face(face, ren, d),
                go(tube, ren, _bump(d, IVAL)), go(base, ren, d),
            )
        case Trans(ty, face, base):
            return Trans(
                go(ty, ren, _bump(d, IVAL)), rename_face(face, ren, d),
                go(base, ren, d),
            )
        case Hit(name, params):
            return Hit(name, tuple(go(p, ren, d) for p in params))
        case Con(name, label, params, args, recs, ivals):
            return Con(
                name, label,
                tuple(go(p, ren, d) for p in params),
                tuple(go(a, ren, d) for a in args),
                tuple(go(a, ren, d) for a in recs),
                tuple(rename_iexpr(r, ren, d) for r in ivals),
            )
        case ClockElim(name, n, params, motive, cases, arg):
            return ClockElim(
                name, n,
                tuple(go(p, ren, d) for p in params),
                go(motive, ren, _bump(d, TERM)),
                tuple(_rename_case(c, ren, d) for c in cases),
                go(arg, ren, d),
            )
        case System(parts):
            return System(tuple(
                (rename_face(phi, ren, d), go(u, ren, d)) for phi, u in parts
            ))
    raise IllFormedRedex(f"not a term: {t!r}")


def _rename_case(case, ren, d):
    inner = dict(d)
    inner[TERM] += case.n_args + 2 * case.n_recs
    inner[IVAL] += case.n_ivars
    return ElimCase(
        case.label, case.n_args, case.n_recs, case.n_ivars,
        rename_term(case.body, ren, inner),
    )


def weaken(t, inserted, cut=None):
    """Shift t's indices to account for entries inserted into its context.

    `inserted` is the sort list of the new entries.  `cut` gives, per sort,
    how many innermost entries sit between the term and the insertion point
    (all zero when inserting at the inner end).
    """
    if not inserted:
        return t
    amounts = {s: 0 for s in (TERM, CLOCK, TICK, IVAL)}
    for s in inserted:
        if s != FACE:
            amounts[s] += 1
    cuts = cut or {}
    ren = Renaming(**{
        {TERM: "term", CLOCK: "clock", TICK: "tick", IVAL: "ival"}[s]:
            _shift_map(cuts.get(s, 0), amounts[s])
        for s in amounts
    })
    return rename_term(t, ren)


def weaken_iexpr(r, inserted, cut=0):
    by = sum(1 for s in inserted if s == IVAL)
    return iv_map_vars(r, lambda ix: IVar(ix + by) if ix >= cut else IVar(ix))


def weaken_face(phi, inserted, cut=0):
    by = sum(1 for s in inserted if s == IVAL)
    return face_map_vars(phi, lambda ix: IVar(ix + by) if ix >= cut else IVar(ix))


def weaken_tick(u, inserted, cut=None):
    if not inserted:
        return u
    amounts = {s: 0 for s in (TERM, CLOCK, TICK, IVAL)}
    for s in inserted:
        if s != FACE:
            amounts[s] += 1
    cuts = cut or {}
    ren = Renaming(**{
        {TERM: "term", CLOCK: "clock", TICK: "tick", IVAL: "ival"}[s]:
            _shift_map(cuts.get(s, 0), amounts[s])
        for s in amounts
    })
    return rename_tick(u, ren, ZERO_DEPTH)


# --------------------------------------------------------------------------
# Structural equality (alpha-equality plus leaf normalization)
# --------------------------------------------------------------------------

class _CanonRenaming(Renaming):
    """Identity renaming used to drive a leaf-normalizing traversal."""


def canonical(t):
    """Normalize every interval and face leaf; indices are untouched."""
    return rename_term(t, _CanonRenaming(), ZERO_DEPTH)


# The renaming traversal rebuilds interval/face leaves through
# rename_iexpr/rename_face; hook normalization in here.
_orig_rename_iexpr = rename_iexpr
_orig_rename_face = rename_face


def rename_iexpr(r, ren, depth):  # noqa: F811
    out = _orig_rename_iexpr(r, ren, depth)
    if isinstance(ren, _CanonRenaming):
        out = iv_normalize(out)
    return out


def rename_face(phi, ren, depth):  # noqa: F811
    out = _orig_rename_face(phi, ren, depth)
    if isinstance(ren, _CanonRenaming):
        out = face_normalize(out)
    return out


def structural_equal(t, u):
    return canonical(t) == canonical(u)


# --------------------------------------------------------------------------
# Telescopes and HIT signatures
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Telescope:
    """Ordered term-variable types; entry k is scoped under entries 0..k-1."""
    types: tuple = ()

    def __len__(self):
        return len(self.types)

    def __iter__(self):
        return iter(self.types)


@dataclass(frozen=True)
class BoundaryTerm:
    pass


@dataclass(frozen=True)
class BRec(BoundaryTerm):
    """Application x_j u-bar of the j-th recursive variable."""
    rec: int
    args: tuple  # Terms; no recursive variables inside


@dataclass(frozen=True)
class BCon(BoundaryTerm):
    label: str
    args: tuple   # Terms
    recs: tuple   # BoundaryTerms, each binding the rec arity's telescope
    ivals: tuple  # IntervalExprs


@dataclass(frozen=True)
class BHComp(BoundaryTerm):
    face: FaceFormula
    tube: BoundaryTerm  # binds one interval variable
    base: BoundaryTerm


@dataclass(frozen=True)
class Constructor:
    label: str
    args: Telescope       # over (ambient, Delta)
    rec_arities: tuple    # Telescopes over (ambient, Delta, args)
    ivar_count: int
    face: FaceFormula     # over the constructor's interval variables
    boundary: tuple       # of (FaceFormula, BoundaryTerm)


@dataclass(frozen=True)
class HitSignature:
    name: str
    params: Telescope
    level: int
    constructors: tuple

    def constructor(self, label):
        for c in self.constructors:
            if c.label == label:
                return c
        raise KeyError(label)

    def index_of(self, label):
        for k, c in enumerate(self.constructors):
            if c.label == label:
                return k
        raise KeyError(label)


def validate_telescope(state, ctx, tel):
    """Check each entry's type in the accumulated prefix (term entries only
    by construction; payloads must be types)."""
    from .checker import check_is_type
    if not isinstance(tel, Telescope):
        raise NonProperEntry("telescopes contain term-variable entries only")
    cur = ctx
    for k, ty in enumerate(tel.types):
        try:
            check_is_type(state, cur, ty)
        except Exception as exc:
            from .errors import IllTypedEntry, CcttError
            if isinstance(exc, CcttError):
                raise IllTypedEntry(
                    f"telescope entry {k} ill-typed: {exc}", position=k
                ) from exc
            raise
        cur = cur.push(EVar(ty))
    return True
