"""Bidirectional type checking.

Introductions check against a type, eliminations infer; the switch happens
at neutral heads via conversion.  Universes are cumulative (U n is a
subtype of U m for n <= m).  Tick applications are typed by strengthening
the head into the maximal residual context; forcing applications by
checking the head under a fresh clock binder over the forcing residual.

Definitions and data signatures live in a CheckState whose ambient prelude
binds one clock constant; `promote` weakens a prelude-scoped body into any
checking context built over it.
"""

from dataclasses import dataclass

from .conversion import (
    CompProblem, comp_eval, conv, conv_tm, conv_under_face, hfill, inst,
    inst_under, subst1, subst_clock1, subst_ival1, subst_tick1, whnf,
    _clam_n, _forall_n, _nlam, _weaken_case,
)
from .errors import (
    ArityMismatch, BaseBoundaryMismatch, BoundaryIncompatible,
    BoundaryNotCovering, CaseBoundaryMismatch, CaseMissing, ClockMismatch,
    DiamondOutsideForcing, EndpointMismatch, ForwardConstructorReference,
    FuelExhausted, IncompatibleOverlap, MotiveMismatch, NonProperEntry,
    NotAFunction, NotALater, TubeMismatch, TypeMismatch, UnboundVariable,
)
from .interval import (
    F0, FBOT, IVar, IZERO, IONE, face_and, face_clauses, face_entails,
    face_is_false, face_map_vars, face_or, face_substitute, face_vars,
    iv_map_vars, iv_normalize, iv_vars,
)
from .syntax import (
    App, BCon, BHComp, BRec, CApp, CLam, CLOCK, ClockElim, Comp, Con,
    Context, DFix, EClock, EFace, EIVar, ETick, EVar, FACE, ForceApp,
    Forall, Fst, HComp, Hit, IVAL, Lam, Later, PApp, PFix, PLam, Pair,
    PathT, Pi, Renaming, Sigma, Snd, System, TERM, TICK, TickApp, TickLam,
    TickVar, TopRef, Trans, U, Var, ZERO_DEPTH, _bump, _shift_map,
    entry_sort, rename_term, weaken, weaken_face, weaken_iexpr,
)
from .ticks import (
    CClock, CForcedTick, CIVal, CTerm, _tick_vars, apply_mask,
    mask_renaming, residual_mask, strengthen_term, weakening_renaming,
)

PRELUDE = Context((EClock(),))

_DUMMY = U(0)


@dataclass(frozen=True)
class Diagnostic:
    error_class: str
    message: str
    span: tuple = None
    expected: object = None
    actual: object = None
    hint: str = None


class CheckState:
    """Mutable per-run state: fuel, definitions, and the append-only table
    of validated data signatures."""

    def __init__(self, max_steps=1_000_000):
        self.max_steps = max_steps
        self.steps = 0
        self.signatures = {}
        self.definitions = {}

    def step(self):
        self.steps += 1
        if self.steps > self.max_steps:
            raise FuelExhausted(
                f"exceeded the step budget of {self.max_steps}"
            )

    def signature(self, name):
        try:
            return self.signatures[name]
        except KeyError:
            raise UnboundVariable(f"no data type named {name}", name=name)

    def definition_body(self, name):
        entry = self.definitions.get(name)
        return entry[1] if entry else None

    def definition_type(self, name):
        entry = self.definitions.get(name)
        return entry[0] if entry else None

    def promote(self, t, ctx):
        """Weaken a prelude-scoped term into a context built over it."""
        sorts = [entry_sort(e) for e in ctx.entries[len(PRELUDE.entries):]]
        return weaken(t, sorts)

    def add_definition(self, name, ty, body):
        check_is_type(self, PRELUDE, ty)
        check(self, PRELUDE, body, ty)
        self.definitions[name] = (ty, body)

    def add_signature(self, sig):
        check_hit_signature(self, sig)
        self.signatures[sig.name] = sig


# --------------------------------------------------------------------------
# Scope checks for interval expressions and faces
# --------------------------------------------------------------------------

def _check_ival(ctx, r):
    bound = ctx.count(IVAL)
    for ix in iv_vars(r):
        if ix >= bound:
            raise UnboundVariable(f"interval variable {ix} is not in scope")


def _check_face(ctx, phi):
    bound = ctx.count(IVAL)
    for ix in face_vars(phi):
        if ix >= bound:
            raise UnboundVariable(f"interval variable {ix} is not in scope")


def _check_clock(ctx, k):
    if not (0 <= k < ctx.count(CLOCK)):
        raise ClockMismatch(f"clock {k} is not in scope")


# --------------------------------------------------------------------------
# Inference
# --------------------------------------------------------------------------

def infer(state, ctx, t):
    match t:
        case Var(ix):
            try:
                return ctx.term_type(ix)
            except IndexError:
                raise UnboundVariable(f"term variable {ix} is not in scope")

        case TopRef(name):
            ty = state.definition_type(name)
            if ty is None:
                raise UnboundVariable(f"no definition named {name}", name=name)
            return state.promote(ty, ctx)

        case U(n):
            return U(n + 1)

        case Pi(dom, cod) | Sigma(dom, cod):
            n1 = check_is_type(state, ctx, dom)
            n2 = check_is_type(state, ctx.push(EVar(dom)), cod)
            return U(max(n1, n2))

        case PathT(a, left, right):
            n = check_is_type(state, ctx, a)
            check(state, ctx, left, a)
            check(state, ctx, right, a)
            return U(n)

        case Forall(body):
            return U(check_is_type(state, ctx.push(EClock()), body))

        case Later(clock, body):
            _check_clock(ctx, clock)
            return U(check_is_type(state, ctx.push(ETick(clock)), body))

        case Hit(name, params):
            sig = state.signature(name)
            _check_hit_params(state, ctx, sig, params)
            return U(sig.level)

        case App(fn, arg):
            fty = whnf(state, ctx, infer(state, ctx, fn))
            if not isinstance(fty, Pi):
                raise NotAFunction(
                    "application head is not a function", actual=fty
                )
            check(state, ctx, arg, fty.dom)
            return subst1(ctx, fty.cod, arg)

        case Fst(p):
            pty = whnf(state, ctx, infer(state, ctx, p))
            if not isinstance(pty, Sigma):
                raise NotAFunction("projection from a non-pair", actual=pty)
            return pty.fst

        case Snd(p):
            pty = whnf(state, ctx, infer(state, ctx, p))
            if not isinstance(pty, Sigma):
                raise NotAFunction("projection from a non-pair", actual=pty)
            return subst1(ctx, pty.snd, Fst(p))

        case PApp(fn, r):
            _check_ival(ctx, r)
            fty = whnf(state, ctx, infer(state, ctx, fn))
            if not isinstance(fty, PathT):
                raise NotAFunction(
                    "path application head is not a path", actual=fty
                )
            return fty.ty

        case CApp(fn, k):
            _check_clock(ctx, k)
            fty = whnf(state, ctx, infer(state, ctx, fn))
            if not isinstance(fty, Forall):
                raise NotAFunction(
                    "clock application head is not clock-quantified",
                    actual=fty,
                )
            return subst_clock1(ctx, fty.body, k)

        case TickApp(fn, u):
            return _infer_tick_app(state, ctx, fn, u)

        case ForceApp(fn, k, u):
            return _infer_force_app(state, ctx, fn, k, u)

        case DFix(k, f):
            later_ty, _ = _fix_premise(state, ctx, k, f)
            return later_ty

        case PFix(k, f):
            _, a = _fix_premise(state, ctx, k, f)
            fw = weaken(f, [TICK])
            d = DFix(k, fw)
            return Later(k, PathT(
                weaken(a, [TICK]), TickApp(d, TickVar(0)), App(fw, d)
            ))

        case Comp(ty, face, tube, base):
            return check_comp(state, ctx,
                              CompProblem(ty, face, tube, base))

        case HComp(ty, face, tube, base):
            return _check_hcomp(state, ctx, ty, face, tube, base)

        case Trans(ty, face, base):
            return _check_trans(state, ctx, ty, face, base)

        case Con(name, label, params, args, recs, ivals):
            sig = state.signature(name)
            return check_constructor_app(state, ctx, sig, label, params,
                                         args, recs, ivals)

        case ClockElim(_, _, _, _, _, _):
            return check_clock_elim(state, ctx, t)

    raise TypeMismatch(
        f"cannot infer a type for {type(t).__name__}; an annotation is "
        "required", actual=t,
    )


def check_is_type(state, ctx, t):
    """Check that t is a type; returns its universe level."""
    ty = whnf(state, ctx, infer(state, ctx, t))
    if isinstance(ty, U):
        return ty.level
    raise TypeMismatch("expected a type", actual=ty)


def _fix_premise(state, ctx, k, f):
    """Shared premise of dfix and pfix: f : (|> A) -> A on clock k.
    Returns the later-type and the clock-stripped result type A."""
    _check_clock(ctx, k)
    fty = whnf(state, ctx, infer(state, ctx, f))
    if not isinstance(fty, Pi):
        raise NotAFunction("fixed point of a non-function", actual=fty)
    dom = whnf(state, ctx, fty.dom)
    if not isinstance(dom, Later):
        raise NotALater("fixed point domain is not a later type",
                        actual=dom)
    if dom.clock != k:
        raise ClockMismatch(
            f"fixed point clock {k} does not match domain clock "
            f"{dom.clock}"
        )
    a = _drop_one(fty.cod, TERM)
    if a is None:
        raise TypeMismatch("fixed point result type may not depend on the "
                           "argument")
    body = _drop_one(dom.ty, TICK)
    if body is None:
        raise TypeMismatch("fixed point domain may not depend on the tick")
    if not conv_tm(state, ctx, body, a):
        raise TypeMismatch("fixed point domain does not match its result",
                           expected=Later(k, weaken(a, [TICK])), actual=dom)
    return dom, a


def _drop_one(t, sort):
    kw = {TERM: "term", TICK: "tick", IVAL: "ival", CLOCK: "clock"}[sort]
    from .errors import TickEscape
    try:
        return rename_term(t, Renaming(**{kw: _shift_map(0, -1)}))
    except TickEscape:
        return None


def _infer_tick_app(state, ctx, fn, u):
    tvs = _tick_vars(u)
    if not tvs:
        raise DiamondOutsideForcing(
            "a simple tick application needs a tick variable"
        )
    some = next(iter(tvs))
    try:
        clock = ctx.tick_clock(some)
    except IndexError:
        raise UnboundVariable(f"tick variable {some} is not in scope")
    mask = residual_mask(ctx, u, clock, forcing=False)
    rctx = apply_mask(ctx, mask)
    fn_res = strengthen_term(ctx, mask, fn)
    lty = whnf(state, rctx, infer(state, rctx, fn_res))
    if not isinstance(lty, Later):
        raise NotALater("tick application head is not a later type",
                        actual=lty)
    k_res = mask_renaming(ctx, mask).apply(CLOCK, clock, ZERO_DEPTH)
    if lty.clock != k_res:
        raise ClockMismatch(
            "tick application head lives on a different clock"
        )
    body = rename_term(lty.ty, weakening_renaming(ctx, mask),
                       _bump(ZERO_DEPTH, TICK))
    return subst_tick1(ctx, clock, body, u)


def _infer_force_app(state, ctx, fn, k, u):
    _check_clock(ctx, k)
    mask = residual_mask(ctx, u, k, forcing=True)
    rctx = apply_mask(ctx, mask)
    fn_res = strengthen_term(ctx.push(EClock()), mask + [True], fn)
    rctx_k = rctx.push(EClock())
    lty = whnf(state, rctx_k, infer(state, rctx_k, fn_res))
    if not isinstance(lty, Later):
        raise NotALater("forcing application head is not a later type",
                        actual=lty)
    if lty.clock != 0:
        raise ClockMismatch(
            "forcing application head is not on the bound clock"
        )
    body = rename_term(lty.ty, weakening_renaming(ctx, mask),
                       _bump(ZERO_DEPTH, CLOCK, TICK))
    return inst(ctx, [EClock(), ETick(0)],
                [CClock(k), CForcedTick(k, u)], body)


# --------------------------------------------------------------------------
# Checking
# --------------------------------------------------------------------------

def check(state, ctx, t, expected):
    ety = whnf(state, ctx, expected)
    match (t, ety):
        case (Lam(body), Pi(dom, cod)):
            check(state, ctx.push(EVar(dom)), body, cod)
            return

        case (Lam(_), _):
            raise TypeMismatch("function against a non-function type",
                               expected=ety, actual=t)

        case (Pair(fst, snd), Sigma(a, b)):
            check(state, ctx, fst, a)
            check(state, ctx, snd, subst1(ctx, b, fst))
            return

        case (Pair(_, _), _):
            raise TypeMismatch("pair against a non-pair type",
                               expected=ety, actual=t)

        case (PLam(body), PathT(a, left, right)):
            _check_path_lam(state, ctx, body, a, left, right)
            return

        case (PLam(_), _):
            raise TypeMismatch("path abstraction against a non-path type",
                               expected=ety, actual=t)

        case (CLam(body), Forall(bty)):
            check(state, ctx.push(EClock()), body, bty)
            return

        case (CLam(_), _):
            raise TypeMismatch(
                "clock abstraction against an unquantified type",
                expected=ety, actual=t,
            )

        case (TickLam(clock, body), Later(clock2, bty)):
            if clock != clock2:
                raise ClockMismatch(
                    f"tick abstraction on clock {clock} against a later "
                    f"type on clock {clock2}"
                )
            check(state, ctx.push(ETick(clock)), body, bty)
            return

        case (TickLam(_, _), _):
            raise TypeMismatch("tick abstraction against a non-later type",
                               expected=ety, actual=t)

        case (System(parts), _):
            check_system(state, ctx, parts, ety)
            return

        case (Con(name, label, params, args, recs, ivals), Hit(n2, ep)):
            if name != n2:
                raise TypeMismatch("constructor of a different data type",
                                   expected=ety, actual=t)
            sig = state.signature(name)
            if not params and sig.params.types:
                params = ep  # elaborate the omitted parameters
            got = check_constructor_app(state, ctx, sig, label, params,
                                        args, recs, ivals)
            if not conv(state, ctx, U(sig.level), got, ety):
                raise TypeMismatch("constructor parameters disagree",
                                   expected=ety, actual=got)
            return

        case _:
            got = infer(state, ctx, t)
            if not _subtype(state, ctx, got, ety):
                raise TypeMismatch("types do not match",
                                   expected=ety, actual=got)
            return


def _check_path_lam(state, ctx, body, a, left, right):
    ictx = ctx.push(EIVar())
    check(state, ictx, body, weaken(a, [IVAL]))
    at0 = subst_ival1(ctx, body, IZERO)
    if not conv(state, ctx, a, at0, left):
        raise EndpointMismatch("left endpoint disagrees",
                               expected=left, actual=at0)
    at1 = subst_ival1(ctx, body, IONE)
    if not conv(state, ctx, a, at1, right):
        raise EndpointMismatch("right endpoint disagrees",
                               expected=right, actual=at1)


def _subtype(state, ctx, a, b):
    """Cumulative subtyping: U n <= U m for n <= m, congruently under the
    usual type formers, conversion elsewhere."""
    a = whnf(state, ctx, a)
    b = whnf(state, ctx, b)
    match (a, b):
        case (U(n), U(m)):
            return n <= m
        case (Pi(d1, c1), Pi(d2, c2)) | (Sigma(d1, c1), Sigma(d2, c2)):
            if not conv(state, ctx, U(0), d1, d2):
                return False
            return _subtype(state, ctx.push(EVar(d1)), c1, c2)
        case (Forall(b1), Forall(b2)):
            return _subtype(state, ctx.push(EClock()), b1, b2)
        case (Later(k1, b1), Later(k2, b2)):
            return k1 == k2 and _subtype(state, ctx.push(ETick(k1)), b1, b2)
        case _:
            return conv(state, ctx, U(0), a, b)


# --------------------------------------------------------------------------
# Systems and composition
# --------------------------------------------------------------------------

def check_system(state, ctx, parts, ty):
    for phi, u in parts:
        _check_face(ctx, phi)
        check(state, ctx.push(EFace(phi)), u, ty)
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            overlap = face_and(parts[i][0], parts[j][0])
            if face_is_false(overlap):
                continue
            if not conv_under_face(state, ctx, overlap, ty,
                                   parts[i][1], parts[j][1]):
                raise IncompatibleOverlap(
                    "system parts disagree on their overlap",
                    i=i, j=j, face=overlap,
                )


def check_comp(state, ctx, p):
    """Validate a composition problem; returns its type (the line at 1)."""
    ictx = ctx.push(EIVar())
    check_is_type(state, ictx, p.ty)
    _check_face(ctx, p.face)
    try:
        _check_tube(state, ictx, p.face, p.tube, p.ty)
    except TypeMismatch as exc:
        raise TubeMismatch(f"tube does not fit the line: {exc}") from exc
    ty0 = subst_ival1(ctx, p.ty, IZERO)
    check(state, ctx, p.base, ty0)
    tube0 = subst_ival1(ctx, p.tube, IZERO)
    if not conv_under_face(state, ctx, p.face, ty0, p.base, tube0):
        raise BaseBoundaryMismatch(
            "base disagrees with the tube at 0 on the extent",
            face=p.face,
        )
    return subst_ival1(ctx, p.ty, IONE)


def _check_tube(state, ictx, face, tube, line):
    face_w = weaken_face(face, [IVAL])
    rctx = ictx.push(EFace(face_w))
    head = whnf(state, rctx, tube) if not face_is_false(face) else tube
    if isinstance(tube, System):
        covering = FBOT
        for phi, _ in tube.parts:
            covering = face_or(covering, phi)
        if not face_entails(face_w, covering):
            raise TubeMismatch("tube system does not cover the extent",
                               face=face)
    if face_is_false(face):
        return  # empty extent: any tube is vacuously fine
    check(state, rctx, tube, line)


def _check_hcomp(state, ctx, ty, face, tube, base):
    check_is_type(state, ctx, ty)
    _check_face(ctx, face)
    ictx = ctx.push(EIVar())
    try:
        _check_tube(state, ictx, face, tube, weaken(ty, [IVAL]))
    except TypeMismatch as exc:
        raise TubeMismatch(f"tube does not fit the type: {exc}") from exc
    check(state, ctx, base, ty)
    tube0 = subst_ival1(ctx, tube, IZERO)
    if not conv_under_face(state, ctx, face, ty, base, tube0):
        raise BaseBoundaryMismatch(
            "base disagrees with the tube at 0 on the extent", face=face,
        )
    return ty


def _check_trans(state, ctx, ty, face, base):
    ictx = ctx.push(EIVar())
    check_is_type(state, ictx, ty)
    _check_face(ctx, face)
    ty0 = subst_ival1(ctx, ty, IZERO)
    # The line must be constant on the extent.
    if not conv_under_face(state, ictx, weaken_face(face, [IVAL]), U(0),
                           ty, weaken(ty0, [IVAL])):
        raise TubeMismatch("transport line is not constant on its extent",
                           face=face)
    check(state, ctx, base, ty0)
    return subst_ival1(ctx, ty, IONE)


# --------------------------------------------------------------------------
# HIT signatures
# --------------------------------------------------------------------------

def _hit_param_type(state, ctx, sig, p, params):
    """Type of the p-th parameter, instantiated at the given earlier
    parameter values (terms in ctx)."""
    outer = ctx.count(CLOCK) - 1
    return inst(
        ctx,
        [EClock()] + [EVar(_DUMMY)] * p,
        [CClock(outer)] + [CTerm(q) for q in params[:p]],
        sig.params.types[p],
    )


def _check_hit_params(state, ctx, sig, params):
    if len(params) != len(sig.params.types):
        raise ArityMismatch(
            f"{sig.name} expects {len(sig.params.types)} parameters, "
            f"got {len(params)}"
        )
    for p in range(len(params)):
        check(state, ctx, params[p],
              _hit_param_type(state, ctx, sig, p, params))


def check_hit_signature(state, sig):
    """Validate a data signature: telescopes, interval counts, faces, and
    per-constructor boundaries (labels, typing, covering, compatibility)."""
    if state.signatures.get(sig.name) is not None:
        raise NonProperEntry(f"data type {sig.name} is already declared")
    bctx = PRELUDE
    for p, ty in enumerate(sig.params.types):
        try:
            check_is_type(state, bctx, ty)
        except FuelExhausted:
            raise
        except Exception as exc:
            raise NonProperEntry(
                f"parameter {p} of {sig.name} is not a type: {exc}"
            ) from exc
        bctx = bctx.push(EVar(ty))
    delta_ctx = bctx

    seen = []
    for idx, ctor in enumerate(sig.constructors):
        cctx = delta_ctx
        for j, ty in enumerate(ctor.args.types):
            try:
                check_is_type(state, cctx, ty)
            except FuelExhausted:
                raise
            except Exception as exc:
                raise NonProperEntry(
                    f"argument {j} of {ctor.label} is not a type: {exc}"
                ) from exc
            cctx = cctx.push(EVar(ty))
        for k, arity in enumerate(ctor.rec_arities):
            acx = cctx
            for q, ty in enumerate(arity.types):
                try:
                    check_is_type(state, acx, ty)
                except FuelExhausted:
                    raise
                except Exception as exc:
                    raise NonProperEntry(
                        f"recursive arity {k}.{q} of {ctor.label} is not a "
                        f"type: {exc}"
                    ) from exc
                acx = acx.push(EVar(ty))
        if ctor.ivar_count < 0:
            raise NonProperEntry("negative interval arity")
        for ix in face_vars(ctor.face):
            if ix >= ctor.ivar_count:
                raise NonProperEntry(
                    f"face of {ctor.label} mentions interval variable {ix} "
                    f"outside its {ctor.ivar_count} binders"
                )
        _check_boundary(state, sig, seen, idx, ctor, cctx)
        seen.append(ctor.label)
    return True


def _check_boundary(state, sig, earlier, idx, ctor, cctx):
    """cctx = prelude, parameters, constructor arguments."""
    v = ctor.ivar_count
    ictx = cctx
    for _ in range(v):
        ictx = ictx.push(EIVar())

    covering = FBOT
    for phi, piece in ctor.boundary:
        for ix in face_vars(phi):
            if ix >= v:
                raise NonProperEntry(
                    f"boundary face of {ctor.label} is out of scope"
                )
        covering = face_or(covering, phi)
        _check_boundary_term(state, sig, earlier, ctor, ictx, piece)
    if ctor.boundary or not face_is_false(ctor.face):
        if not face_entails(ctor.face, covering):
            raise BoundaryNotCovering(
                f"boundary of {ctor.label} does not cover its face",
                face=ctor.face,
            )

    # Pairwise compatibility on overlaps.
    pieces = list(ctor.boundary)
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            overlap = face_and(pieces[i][0], pieces[j][0])
            for clause in face_clauses(overlap):
                left = _bnd_assign(pieces[i][1], v, clause)
                right = _bnd_assign(pieces[j][1], v, clause)
                from .conversion import boundary_equal
                if not boundary_equal(sig, left, right):
                    raise BoundaryIncompatible(
                        f"boundary pieces {i} and {j} of {ctor.label} "
                        "disagree on their overlap",
                        face=overlap,
                    )


def _check_boundary_term(state, sig, earlier, ctor, bctx, M):
    """Type a boundary term in bctx (prelude, parameters, arguments, and
    any binders pushed while descending)."""
    d = len(sig.params.types)
    match M:
        case BRec(j, uargs):
            if not (0 <= j < len(ctor.rec_arities)):
                raise ArityMismatch(
                    f"recursive variable {j} of {ctor.label} out of range"
                )
            arity = ctor.rec_arities[j]
            if len(uargs) != len(arity.types):
                raise ArityMismatch(
                    f"recursive call {j} in {ctor.label} expects "
                    f"{len(arity.types)} arguments"
                )
            # Arity types are scoped over (prelude, parameters, arguments);
            # weaken past everything pushed since, then feed earlier
            # arguments in.
            base_terms = 1 + d + len(ctor.args.types)  # prelude has none
            extra_terms = bctx.count(TERM) - (d + len(ctor.args.types))
            extra_ivals = bctx.count(IVAL)
            for q, ty in enumerate(arity.types):
                ty_w = weaken(ty, [TERM] * extra_terms
                              + [IVAL] * extra_ivals, cut={TERM: q})
                ty_i = inst(bctx, [EVar(_DUMMY)] * q,
                            [CTerm(u) for u in uargs[:q]], ty_w)
                check(state, bctx, uargs[q], ty_i)
            return
        case BCon(label, cargs, crecs, civals):
            try:
                tidx = sig.index_of(label)
            except KeyError:
                raise ForwardConstructorReference(
                    f"boundary of {ctor.label} names unknown constructor "
                    f"{label}"
                )
            if label not in earlier:
                raise ForwardConstructorReference(
                    f"boundary of {ctor.label} refers to {label}, which is "
                    "not declared before it"
                )
            target = sig.constructors[tidx]
            if (len(cargs) != len(target.args.types)
                    or len(crecs) != len(target.rec_arities)
                    or len(civals) != target.ivar_count):
                raise ArityMismatch(
                    f"constructor {label} applied with the wrong arity in "
                    f"the boundary of {ctor.label}"
                )
            extra_terms = bctx.count(TERM) - (d + len(ctor.args.types))
            extra_ivals = bctx.count(IVAL)
            for q, ty in enumerate(target.args.types):
                # Scoped (prelude, parameters, target args<q): splice the
                # binders pushed since the parameters in front of the
                # argument references.
                ty_w = weaken(
                    ty,
                    [TERM] * (len(ctor.args.types) + extra_terms)
                    + [IVAL] * extra_ivals,
                    cut={TERM: q},
                )
                ty_i = inst(bctx, [EVar(_DUMMY)] * q,
                            [CTerm(u) for u in cargs[:q]], ty_w)
                check(state, bctx, cargs[q], ty_i)
            for k, sub in enumerate(crecs):
                arity = target.rec_arities[k]
                inner = bctx
                for q, ty in enumerate(arity.types):
                    ty_w = weaken(
                        ty,
                        [TERM] * (len(ctor.args.types) + extra_terms)
                        + [IVAL] * extra_ivals,
                        cut={TERM: q},
                    )
                    ty_i = _splice_args(inner, ty_w, cargs, q)
                    inner = inner.push(EVar(ty_i))
                _check_boundary_term(state, sig, earlier, ctor, inner, sub)
            for r in civals:
                _check_ival(bctx, r)
            return
        case BHComp(face, tube, base):
            _check_face(bctx, face)
            _check_boundary_term(state, sig, earlier, ctor,
                                 bctx.push(EIVar()), tube)
            _check_boundary_term(state, sig, earlier, ctor, bctx, base)
            return
    raise NonProperEntry(f"not a boundary term: {M!r}")


def _splice_args(bctx, ty_w, cargs, q):
    """Instantiate the first q target-argument references of ty_w."""
    return inst(bctx, [EVar(_DUMMY)] * q,
                [CTerm(u) for u in cargs[:q]], ty_w)


def _bnd_assign(M, v, clause):
    """Substitute an endpoint assignment (over the constructor's interval
    binders) into a boundary term."""
    from .conversion import open_inst

    table = {ix: (IONE if b else IZERO) for ix, b in clause.items()}
    entries = [EIVar()] * v
    comps = []
    for j in range(v):
        ix = v - 1 - j
        comps.append(CIVal(table.get(ix, IVar(ix))))

    def on_iv(e):
        return iv_normalize(iv_map_vars(
            e, lambda ix: table.get(ix, IVar(ix))
        ))

    def on_face(phi):
        return face_substitute(phi, table)

    def on_term(t):
        return open_inst(entries, comps, t) if v else t

    def go(M):
        match M:
            case BRec(j, uargs):
                return BRec(j, tuple(on_term(u) for u in uargs))
            case BCon(label, cargs, crecs, civals):
                return BCon(label, tuple(on_term(a) for a in cargs),
                            tuple(go(m) for m in crecs),
                            tuple(on_iv(e) for e in civals))
            case BHComp(face, tube, base):
                return BHComp(on_face(face), go(tube), go(base))
        raise NonProperEntry(repr(M))

    return go(M)


# --------------------------------------------------------------------------
# Constructor applications
# --------------------------------------------------------------------------

def check_constructor_app(state, ctx, sig, label, params, args, recs,
                          ivals):
    try:
        ctor = sig.constructor(label)
    except KeyError:
        raise UnboundVariable(f"{sig.name} has no constructor {label}")
    d = len(sig.params.types)
    if len(args) != len(ctor.args.types):
        raise ArityMismatch(
            f"{label} expects {len(ctor.args.types)} arguments, got "
            f"{len(args)}"
        )
    if len(recs) != len(ctor.rec_arities):
        raise ArityMismatch(
            f"{label} expects {len(ctor.rec_arities)} recursive arguments, "
            f"got {len(recs)}"
        )
    if len(ivals) != ctor.ivar_count:
        raise ArityMismatch(
            f"{label} expects {ctor.ivar_count} interval arguments, got "
            f"{len(ivals)}"
        )
    _check_hit_params(state, ctx, sig, params)
    outer = ctx.count(CLOCK) - 1
    for j, ty in enumerate(ctor.args.types):
        ty_i = inst(
            ctx,
            [EClock()] + [EVar(_DUMMY)] * (d + j),
            [CClock(outer)] + [CTerm(q) for q in params]
            + [CTerm(a) for a in args[:j]],
            ty,
        )
        check(state, ctx, args[j], ty_i)
    for k, arity in enumerate(ctor.rec_arities):
        rty = _rec_fn_type(state, ctx, sig, arity, params, args)
        check(state, ctx, recs[k], rty)
    for r in ivals:
        _check_ival(ctx, r)
    return Hit(sig.name, tuple(params))


def _rec_fn_type(state, ctx, sig, arity, params, args):
    """The type of a recursive argument: a function from the instantiated
    arity telescope into the data type."""
    d = len(sig.params.types)
    a = len(args)
    m = len(arity.types)
    cur = ctx
    tys = []
    for q in range(m):
        outer = cur.count(CLOCK) - 1
        comps = [CClock(outer)]
        comps += [CTerm(weaken(x, [TERM] * q)) for x in params]
        comps += [CTerm(weaken(x, [TERM] * q)) for x in args]
        comps += [CTerm(Var(q - 1 - s)) for s in range(q)]
        ty_i = inst(cur, [EClock()] + [EVar(_DUMMY)] * (d + a + q), comps,
                    arity.types[q])
        tys.append(ty_i)
        cur = cur.push(EVar(ty_i))
    ret = Hit(sig.name, tuple(weaken(p, [TERM] * m) for p in params))
    for ty_i in reversed(tys):
        ret = Pi(ty_i, ret)
    return ret


# --------------------------------------------------------------------------
# Induction under clocks
# --------------------------------------------------------------------------

def _capp_n(t, n):
    for k in range(n - 1, -1, -1):
        t = CApp(t, k)
    return t


def _push_clocks(ctx, n):
    for _ in range(n):
        ctx = ctx.push(EClock())
    return ctx


def check_clock_elim(state, ctx, elim):
    sig = state.signature(elim.name)
    n = elim.n
    d = len(sig.params.types)
    if len(elim.params) != d:
        raise ArityMismatch(
            f"eliminator of {sig.name} expects {d} parameters"
        )

    # Parameters: each is clock-abstracted n times over its telescope type.
    ctx_n = _push_clocks(ctx, n)
    outer_n = ctx_n.count(CLOCK) - 1
    for p, ty in enumerate(sig.params.types):
        comps = [CClock(outer_n)]
        comps += [
            CTerm(_capp_n(weaken(elim.params[q], [CLOCK] * n), n))
            for q in range(p)
        ]
        body = inst(ctx_n, [EClock()] + [EVar(_DUMMY)] * p, comps, ty)
        check(state, ctx, elim.params[p], _forall_n(n, body))

    hit_params_n = tuple(
        _capp_n(weaken(q, [CLOCK] * n), n) for q in elim.params
    )
    scrut_ty = _forall_n(n, Hit(sig.name, hit_params_n))
    check(state, ctx, elim.arg, scrut_ty)

    try:
        check_is_type(state, ctx.push(EVar(scrut_ty)), elim.motive)
    except FuelExhausted:
        raise
    except Exception as exc:
        raise MotiveMismatch(f"motive is not a type: {exc}") from exc

    labels = {case.label for case in elim.cases}
    for ctor in sig.constructors:
        if ctor.label not in labels:
            raise CaseMissing(f"no case for constructor {ctor.label}")
    for case in elim.cases:
        try:
            ctor = sig.constructor(case.label)
        except KeyError:
            raise CaseMissing(
                f"{sig.name} has no constructor {case.label}"
            )
        if (case.n_args != len(ctor.args.types)
                or case.n_recs != len(ctor.rec_arities)
                or case.n_ivars != ctor.ivar_count):
            raise ArityMismatch(
                f"case for {case.label} binds the wrong number of variables"
            )
        if n > 0 and any(len(a.types) for a in ctor.rec_arities):
            raise MotiveMismatch(
                f"constructor {case.label} takes higher-order recursive "
                "arguments; induction under clocks over it is not supported"
            )
        _check_case(state, ctx, sig, ctor, elim, case)

    return subst1(ctx, elim.motive, elim.arg)


def _check_case(state, ctx, sig, ctor, elim, case):
    n = elim.n
    d = len(sig.params.types)
    a = len(ctor.args.types)
    r = len(ctor.rec_arities)
    v = ctor.ivar_count

    cur = ctx
    # gamma binders.
    for j in range(a):
        cur_n = _push_clocks(cur, n)
        outer_n = cur_n.count(CLOCK) - 1
        comps = [CClock(outer_n)]
        comps += [
            CTerm(_capp_n(weaken(p, [TERM] * j + [CLOCK] * n), n))
            for p in elim.params
        ]
        comps += [CTerm(_capp_n(Var(j - 1 - i), n)) for i in range(j)]
        body = inst(cur_n, [EClock()] + [EVar(_DUMMY)] * (d + j), comps,
                    ctor.args.types[j])
        cur = cur.push(EVar(_forall_n(n, body)))

    # x binders (clock-abstracted recursive values).
    for k in range(r):
        arity = ctor.rec_arities[k]
        m = len(arity.types)
        shift = a + k
        cur_n = _push_clocks(cur, n)
        outer_n = cur_n.count(CLOCK) - 1
        params_n = [
            _capp_n(weaken(p, [TERM] * shift + [CLOCK] * n), n)
            for p in elim.params
        ]
        gammas_n = [_capp_n(Var(a - 1 - j + k), n) for j in range(a)]
        inner = cur_n
        tys = []
        for q in range(m):
            comps = [CClock(outer_n)]
            comps += [CTerm(weaken(p, [TERM] * q)) for p in params_n]
            comps += [CTerm(weaken(g, [TERM] * q)) for g in gammas_n]
            comps += [CTerm(Var(q - 1 - s)) for s in range(q)]
            ty_i = inst(inner, [EClock()] + [EVar(_DUMMY)] * (d + a + q),
                        comps, arity.types[q])
            tys.append(ty_i)
            inner = inner.push(EVar(ty_i))
        ret = Hit(sig.name, tuple(weaken(p, [TERM] * m) for p in params_n))
        for ty_i in reversed(tys):
            ret = Pi(ty_i, ret)
        cur = cur.push(EVar(_forall_n(n, ret)))

    # y binders (induction hypotheses).
    for k in range(r):
        arity = ctor.rec_arities[k]
        m = len(arity.types)
        shift = a + r + k
        outer = cur.count(CLOCK) - 1
        params_w = [weaken(p, [TERM] * shift) for p in elim.params]
        gammas = [Var(a - 1 - j + r + k) for j in range(a)]
        inner = cur
        tys = []
        for q in range(m):
            comps = [CClock(outer)]
            comps += [CTerm(weaken(p, [TERM] * q)) for p in params_w]
            comps += [CTerm(weaken(g, [TERM] * q)) for g in gammas]
            comps += [CTerm(Var(q - 1 - s)) for s in range(q)]
            ty_i = inst(inner, [EClock()] + [EVar(_DUMMY)] * (d + a + q),
                        comps, arity.types[q])
            tys.append(ty_i)
            inner = inner.push(EVar(ty_i))
        if n > 0:
            scrut = Var(r - 1)
        else:
            scrut = Var(r - 1 + m)
            for s in range(m):
                scrut = App(scrut, Var(m - 1 - s))
        motive_w = weaken(elim.motive, [TERM] * (shift + m),
                          cut={TERM: 1})
        ret = inst(inner, [EVar(_DUMMY)], [CTerm(scrut)], motive_w)
        for ty_i in reversed(tys):
            ret = Pi(ty_i, ret)
        cur = cur.push(EVar(ret))

    case_ctx = cur
    for _ in range(v):
        case_ctx = case_ctx.push(EIVar())

    case_sorts = [TERM] * (a + 2 * r) + [IVAL] * v
    scrut_full = _case_scrutinee(elim, sig, ctor, case_ctx, case_sorts)
    motive_w = weaken(elim.motive, case_sorts, cut={TERM: 1})
    expected = inst(case_ctx, [EVar(_DUMMY)], [CTerm(scrut_full)],
                    motive_w)
    check(state, case_ctx, case.body, expected)

    for phi, piece in ctor.boundary:
        interp = _Interp(state, case_ctx, sig, elim, ctor, case_sorts)
        interpreted = interp.interp(piece, 0, 0)
        rctx = case_ctx.push(EFace(phi))
        if not conv(state, rctx, expected, case.body, interpreted):
            raise CaseBoundaryMismatch(
                f"case for {case.label} disagrees with its boundary",
                label=case.label, face=phi,
            )


def _case_scrutinee(elim, sig, ctor, case_ctx, case_sorts):
    n = elim.n
    a = len(ctor.args.types)
    r = len(ctor.rec_arities)
    v = ctor.ivar_count
    params = tuple(
        _capp_n(weaken(p, case_sorts + [CLOCK] * n), n)
        for p in elim.params
    )
    args = tuple(
        _capp_n(Var(2 * r + a - 1 - j), n) for j in range(a)
    )
    recs = tuple(_capp_n(Var(2 * r - 1 - k), n) for k in range(r))
    ivals = tuple(IVar(v - 1 - q) for q in range(v))
    return _clam_n(n, Con(sig.name, ctor.label, params, args, recs, ivals))


class _Interp:
    """Boundary interpretation inside an eliminator case context: maps a
    constructor boundary term to the term the case body must match on the
    corresponding face."""

    def __init__(self, state, case_ctx, sig, elim, ctor, case_sorts):
        self.state = state
        self.case_ctx = case_ctx
        self.sig = sig
        self.elim = elim
        self.ctor = ctor
        self.case_sorts = list(case_sorts)
        self.n = elim.n
        self.d = len(sig.params.types)
        self.a = len(ctor.args.types)
        self.r = len(ctor.rec_arities)
        self.v = ctor.ivar_count

    def _local_ctx(self, nest, ivd):
        ctx = self.case_ctx
        for _ in range(nest):
            ctx = ctx.push(EVar(_DUMMY))
        for _ in range(ivd):
            ctx = ctx.push(EIVar())
        return ctx

    def _params_n(self, nest, ivd):
        """delta applied to the bound clocks, scoped in the case context
        plus nest term binders, ivd interval binders, and n clocks."""
        sorts = (self.case_sorts + [TERM] * nest + [IVAL] * ivd
                 + [CLOCK] * self.n)
        return [
            _capp_n(weaken(p, sorts), self.n) for p in self.elim.params
        ]

    def _mapped(self, t, nest, ivd):
        """A signature-scoped term (prelude clock, parameters, constructor
        arguments, nest inner binders) moved under the case context plus n
        fresh clocks."""
        from .conversion import open_inst
        n, d, a, r = self.n, self.d, self.a, self.r
        outer = (self.case_ctx.count(CLOCK) - 1) + n
        comps = [CClock(outer)]
        comps += [CTerm(p) for p in self._params_n(nest, ivd)]
        comps += [
            CTerm(_capp_n(Var(2 * r + a - 1 - j + nest), n))
            for j in range(a)
        ]
        comps += [CTerm(Var(nest - 1 - s)) for s in range(nest)]
        entries = [EClock()] + [EVar(_DUMMY)] * (d + a + nest)
        return open_inst(entries, comps, t)

    def _embed(self, M, nest, ivd):
        """The raw (uninterpreted) boundary term under the clock binders."""
        n, r = self.n, self.r
        match M:
            case BRec(j, uargs):
                out = _capp_n(Var(2 * r - 1 - j + nest), n)
                for u in uargs:
                    out = App(out, self._mapped(u, nest, ivd))
                return out
            case BCon(label, cargs, crecs, civals):
                target = self.sig.constructor(label)
                recs = []
                for k, sub in enumerate(crecs):
                    m2 = len(target.rec_arities[k].types)
                    recs.append(_nlam(m2, self._embed(sub, nest + m2, ivd)))
                return Con(
                    self.sig.name, label,
                    tuple(self._params_n(nest, ivd)),
                    tuple(self._mapped(s, nest, ivd) for s in cargs),
                    tuple(recs),
                    tuple(civals),
                )
            case BHComp(face, tube, base):
                return HComp(
                    Hit(self.sig.name, tuple(self._params_n(nest, ivd))),
                    face,
                    self._embed(tube, nest, ivd + 1),
                    self._embed(base, nest, ivd),
                )
        raise NonProperEntry(repr(M))

    def interp(self, M, nest, ivd):
        n, r = self.n, self.r
        match M:
            case BRec(j, uargs):
                out = Var(r - 1 - j + nest)
                for u in uargs:
                    out = App(out, self._mapped(u, nest, ivd))
                return out
            case BCon(label, cargs, crecs, civals):
                return self._interp_con(label, cargs, crecs, civals,
                                        nest, ivd)
            case BHComp(face, tube, base):
                return self._interp_hcomp(face, tube, base, nest, ivd)
        raise NonProperEntry(repr(M))

    def _case_for(self, label):
        for case in self.elim.cases:
            if case.label == label:
                return case
        raise CaseMissing(f"no case for constructor {label}")

    def _interp_con(self, label, cargs, crecs, civals, nest, ivd):
        n = self.n
        target = self.sig.constructor(label)
        case2 = self._case_for(label)
        gammas = [_clam_n(n, self._mapped(s, nest, ivd)) for s in cargs]
        xs, ys = [], []
        for k, sub in enumerate(crecs):
            m2 = len(target.rec_arities[k].types)
            xs.append(_clam_n(
                n, _nlam(m2, self._embed(sub, nest + m2, ivd))
            ))
            ys.append(_nlam(m2, self.interp(sub, nest + m2, ivd)))
        sorts = self.case_sorts + [TERM] * nest + [IVAL] * ivd
        case2_w = _weaken_case(case2, sorts)
        entries = ([EVar(_DUMMY)] * (case2.n_args + 2 * case2.n_recs)
                   + [EIVar()] * case2.n_ivars)
        comps = ([CTerm(g) for g in gammas] + [CTerm(x) for x in xs]
                 + [CTerm(y) for y in ys] + [CIVal(e) for e in civals])
        return inst(self._local_ctx(nest, ivd), entries, comps,
                    case2_w.body)

    def _interp_hcomp(self, face, tube, base, nest, ivd):
        n = self.n
        local = self._local_ctx(nest, ivd)
        a_n = _forall_n(n, Hit(self.sig.name,
                               tuple(self._params_n(nest, ivd))))
        raw_tube = _clam_n(n, self._embed(tube, nest, ivd + 1))
        raw_base = _clam_n(n, self._embed(base, nest, ivd))
        v_line = hfill(
            local.push(EIVar()),
            weaken(a_n, [IVAL]),
            weaken_face(face, [IVAL]),
            weaken(raw_tube, [IVAL], cut={IVAL: 1}),
            weaken(raw_base, [IVAL]),
            IVar(0),
        )
        motive_w = weaken(
            self.elim.motive,
            self.case_sorts + [TERM] * nest + [IVAL] * ivd,
            cut={TERM: 1},
        )
        motive_line = inst_under(local, [EVar(_DUMMY)], [EIVar()],
                                 [CTerm(v_line)], motive_w)
        return Comp(motive_line, face,
                    self.interp(tube, nest, ivd + 1),
                    self.interp(base, nest, ivd))


def boundary_interpret(state, case_ctx, sig, elim, ctor, boundary):
    """Interpret a whole boundary system inside an eliminator case
    context; the empty system maps to the empty system."""
    a = len(ctor.args.types)
    r = len(ctor.rec_arities)
    v = ctor.ivar_count
    case_sorts = [TERM] * (a + 2 * r) + [IVAL] * v
    interp = _Interp(state, case_ctx, sig, elim, ctor, case_sorts)
    return System(tuple(
        (phi, interp.interp(piece, 0, 0)) for phi, piece in boundary
    ))
