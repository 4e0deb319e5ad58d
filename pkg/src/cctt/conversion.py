"""Definitional equality.

Weak-head normalization implements the judgemental equalities: beta for
functions, pairs, clocks, ticks and paths; the forcing-tick beta rule; the
diamond-gated unfolding of dfix and pfix; tirr endpoint rules and the
diamond collapse; demotion of diamond-free forcing applications; the
composition rules per type head (with comp at a higher inductive type
decomposed into hcomp over trans); and the reduction rules of the
induction-under-clocks eliminator.

Fixed points unfold ONLY at a syntactic diamond; together with the step
budget this keeps conversion checking terminating in practice (no
normalization theorem is available for the theory).
"""

from dataclasses import dataclass, field

from .errors import ArityMismatch, CaseMissing, IllFormedRedex
from .interval import (
    FAnd, FEq, IVar, IJoin, IMeet, INeg, IZERO, IONE,
    face_and, face_clauses, face_entails, face_is_true,
    face_normalize, face_of_equation, face_or, face_equal, face_substitute,
    iv_equal, iv_is_one, iv_is_zero, iv_map_vars, iv_normalize,
)
from .syntax import (
    App, BCon, BHComp, BRec, CApp, CLam, CLOCK, ClockElim, Comp, Con,
    Context, DFix, Diamond, EClock, EFace, EIVar, ETick, EVar, ElimCase,
    FACE, Fst, ForceApp, Forall, HComp, Hit, IVAL, Lam, Later, PApp, PFix,
    PLam, Pair, PathT, Pi, Renaming, Sigma, Snd, System, TERM, TICK, Term,
    TickApp, TickLam, TickVar, Tirr, TopRef, Trans, U, Var, entry_sort,
    rename_term, structural_equal, weaken, weaken_face, weaken_iexpr,
)
from .ticks import (
    CClock, CForcedTick, CIVal, CTerm, CTick, Substitution, _comp_shift,
    extend, identity_subst, push_binder, subst_apply, subst_face,
    subst_ival,
)


@dataclass(frozen=True)
class WhnfResult:
    term: Term
    context: Context

    @property
    def is_neutral(self):
        return is_neutral(self.term)


@dataclass(frozen=True)
class CompProblem:
    ty: Term          # type line, binds one interval variable
    face: object
    tube: Term        # binds the line variable
    base: Term


def is_neutral(t):
    # Post-whnf approximation: anything that is not a canonical form.
    return not isinstance(t, (
        Lam, Pair, PLam, CLam, TickLam, Pi, Sigma, PathT, Forall, Later,
        U, Hit, Con, DFix, PFix, System,
    ))


# --------------------------------------------------------------------------
# Substitution helpers
# --------------------------------------------------------------------------

_DUMMY = U(0)


def inst(ctx, entries, comps, t):
    """t is scoped in ctx plus `entries`; replace those by `comps`."""
    return subst_apply(extend(ctx, entries, comps), t)


def subst1(ctx, body, arg):
    return inst(ctx, [EVar(_DUMMY)], [CTerm(arg)], body)


def subst_ival1(ctx, body, r):
    return inst(ctx, [EIVar()], [CIVal(r)], body)


def subst_clock1(ctx, body, k):
    return inst(ctx, [EClock()], [CClock(k)], body)


def subst_tick1(ctx, clock, body, u):
    return inst(ctx, [ETick(clock)], [CTick(u)], body)


def inst_under(ctx, old_entries, new_entries, comps, t):
    """t scoped in ctx+old_entries; rebuild it in ctx+new_entries, sending
    the old entries to `comps` (scoped in ctx+new_entries)."""
    base = identity_subst(ctx)
    shift = [entry_sort(e) for e in new_entries if entry_sort(e) != FACE]
    comps0 = tuple(_comp_shift(c, shift) for c in base.comps)
    dom = ctx
    for e in new_entries:
        dom = dom.push(e)
    cod = ctx
    for e in old_entries:
        cod = cod.push(e)
    return subst_apply(Substitution(dom, cod, comps0 + tuple(comps)), t)


def _free_counts(t):
    """Upper bound on the free index range of each sort."""
    counts = {TERM: 0, CLOCK: 0, TICK: 0, IVAL: 0}

    def mk(sort):
        def go(ix):
            counts[sort] = max(counts[sort], ix + 1)
            return ix
        return go

    rename_term(t, Renaming(term=mk(TERM), clock=mk(CLOCK),
                            tick=mk(TICK), ival=mk(IVAL)))
    return counts


def _ambient_for(terms, slack=4):
    counts = {TERM: 0, CLOCK: 1, TICK: 0, IVAL: 0}
    for t in terms:
        for sort, n in _free_counts(t).items():
            counts[sort] = max(counts[sort], n)
    entries = (
        [EClock()] * (counts[CLOCK] + slack)
        + [EIVar()] * (counts[IVAL] + slack)
        + [ETick(0)] * (counts[TICK] + slack)
        + [EVar(_DUMMY)] * (counts[TERM] + slack)
    )
    return Context(tuple(entries))


def open_inst(entries, comps, t):
    """Substitute the innermost `entries` binders of t, treating every
    other free variable as belonging to an opaque ambient scope."""
    probes = [t] + [c.term for c in comps if isinstance(c, CTerm)]
    return inst(_ambient_for(probes), entries, comps, t)


def tube_at(ctx, tube, r):
    return subst_ival1(ctx, tube, r)


# --------------------------------------------------------------------------
# Tick weak-head forms
# --------------------------------------------------------------------------

def tick_whnf(u):
    match u:
        case Tirr(l, r, at):
            left, right = tick_whnf(l), tick_whnf(r)
            if iv_is_zero(at):
                return left
            if iv_is_one(at):
                return right
            if isinstance(left, Diamond) and isinstance(right, Diamond):
                return Diamond()
            return Tirr(left, right, iv_normalize(at))
        case _:
            return u


def tick_has_diamond(u):
    match u:
        case Diamond():
            return True
        case Tirr(l, r, _):
            return tick_has_diamond(l) or tick_has_diamond(r)
        case _:
            return False


# --------------------------------------------------------------------------
# Weak-head normalization
# --------------------------------------------------------------------------

def whnf(state, ctx, t):
    while True:
        state.step()
        match t:
            case TopRef(name):
                body = state.definition_body(name)
                if body is None:
                    return t
                t = state.promote(body, ctx)

            case App(fn, arg):
                fn = whnf(state, ctx, fn)
                if isinstance(fn, Lam):
                    t = subst1(ctx, fn.body, arg)
                else:
                    return App(fn, arg)

            case Fst(p):
                p = whnf(state, ctx, p)
                if isinstance(p, Pair):
                    t = p.fst
                else:
                    return Fst(p)

            case Snd(p):
                p = whnf(state, ctx, p)
                if isinstance(p, Pair):
                    t = p.snd
                else:
                    return Snd(p)

            case PApp(fn, r):
                fn = whnf(state, ctx, fn)
                if isinstance(fn, PLam):
                    t = subst_ival1(ctx, fn.body, r)
                    continue
                unfolded = _pfix_unfold(state, ctx, fn)
                if unfolded is not None:
                    t = unfolded
                    continue
                r = iv_normalize(r)
                if iv_is_zero(r) or iv_is_one(r):
                    endpoint = _path_endpoint(state, ctx, fn, iv_is_one(r))
                    if endpoint is not None:
                        t = endpoint
                        continue
                return PApp(fn, r)

            case CApp(fn, k):
                fn = whnf(state, ctx, fn)
                if isinstance(fn, CLam):
                    t = subst_clock1(ctx, fn.body, k)
                else:
                    return CApp(fn, k)

            case TickApp(fn, u):
                u = tick_whnf(u)
                fn = whnf(state, ctx, fn)
                if isinstance(fn, TickLam):
                    t = subst_tick1(ctx, fn.clock, fn.body, u)
                else:
                    return TickApp(fn, u)

            case ForceApp(fn, k, u):
                u = tick_whnf(u)
                if not tick_has_diamond(u):
                    # Diamond-free forcing demotes to a simple application.
                    t = TickApp(subst_clock1(ctx, fn, k), u)
                    continue
                fn = whnf(state, ctx.push(EClock()), fn)
                match fn:
                    case TickLam(_, body):
                        t = inst(ctx, [EClock(), ETick(0)],
                                 [CClock(k), CForcedTick(k, u)], body)
                    case DFix(0, f) if isinstance(u, Diamond):
                        t = subst_clock1(ctx, App(f, DFix(0, f)), k)
                    case _:
                        return ForceApp(fn, k, u)

            case Comp(ty, face, tube, base):
                reduced = comp_eval(state, ctx,
                                    CompProblem(ty, face, tube, base))
                if reduced is None:
                    return t
                t = reduced

            case HComp(ty, face, tube, base):
                if face_is_true(face):
                    t = tube_at(ctx, tube, IONE)
                    continue
                head = whnf(state, ctx, ty)
                if isinstance(head, (Hit, U)) or is_neutral(head):
                    return HComp(head, face, tube, base)
                # Other type heads: compose along the constant line.
                t = Comp(weaken(head, [IVAL]), face, tube, base)

            case Trans(ty, face, base):
                reduced = _trans_step(state, ctx, ty, face, base)
                if reduced is None:
                    return t
                t = reduced

            case Con(name, label, params, args, recs, ivals):
                sig = state.signature(name)
                ctor = sig.constructor(label)
                if face_is_true(_ctor_face(ctor, ivals)):
                    t = _boundary_fire(state, ctx, sig, ctor, params,
                                       args, recs, ivals)
                else:
                    return t

            case System(parts):
                for phi, u in parts:
                    if face_is_true(phi):
                        t = u
                        break
                else:
                    return t

            case ClockElim(_, _, _, _, _, _):
                reduced = elim_reduce(state, ctx, t)
                if reduced is None:
                    return t
                t = reduced

            case _:
                return t


def whnf_result(state, ctx, t):
    return WhnfResult(whnf(state, ctx, t), ctx)


def _pfix_unfold(state, ctx, fn):
    """(kappa.pfix f)[(k, <>)] applied to any path argument unfolds to
    (f (dfix f))[k/kappa]."""
    if not isinstance(fn, ForceApp) or not isinstance(fn.tick, Diamond):
        return None
    inner = whnf(state, ctx.push(EClock()), fn.fn)
    if isinstance(inner, PFix) and inner.clock == 0:
        f = inner.fn
        return subst_clock1(ctx, App(f, DFix(0, f)), fn.clock)
    return None


def _path_endpoint(state, ctx, fn, right):
    from .checker import infer
    from .errors import CcttError, FuelExhausted
    try:
        ty = whnf(state, ctx, infer(state, ctx, fn))
    except FuelExhausted:
        raise
    except CcttError:
        return None
    if isinstance(ty, PathT):
        return ty.right if right else ty.left
    return None


# --------------------------------------------------------------------------
# Fillers
# --------------------------------------------------------------------------

def _fill_fwd(ctx, line, face, tube, base, r):
    """Filler value at level r: equals base at r=0 and follows tube on
    `face`.  line and tube bind the line variable; face, base, r do not."""
    rj = IMeet(weaken_iexpr(r, [IVAL]), IVar(0))
    line_cut = inst_under(ctx, [EIVar()], [EIVar()], [CIVal(rj)], line)
    tube_cut = inst_under(ctx, [EIVar()], [EIVar()], [CIVal(rj)], tube)
    sys = System((
        (weaken_face(face, [IVAL]), tube_cut),
        (face_of_equation(weaken_iexpr(r, [IVAL]), 0),
         weaken(base, [IVAL])),
    ))
    total = face_or(face, face_of_equation(r, 0))
    return Comp(line_cut, total, sys, base)


def _fill_bwd(ctx, line, face, goal, r):
    """Backward transport: value at level r, equal to `goal` at r=1 and
    constant on `face`."""
    rj = IJoin(weaken_iexpr(r, [IVAL]), INeg(IVar(0)))
    line_cut = inst_under(ctx, [EIVar()], [EIVar()], [CIVal(rj)], line)
    phi = face_or(face, face_of_equation(r, 1))
    return Comp(line_cut, phi, weaken(goal, [IVAL]), goal)


def hfill(ctx, ty, face, tube, base, j):
    """Filling from hcomp by a connection: equal to base at j=0, to the
    full hcomp at j=1, and to the tube on `face`.  tube binds one ivar."""
    tube_cut = inst_under(
        ctx, [EIVar()], [EIVar()],
        [CIVal(IMeet(weaken_iexpr(j, [IVAL]), IVar(0)))],
        tube,
    )
    sys = System((
        (weaken_face(face, [IVAL]), tube_cut),
        (face_of_equation(weaken_iexpr(j, [IVAL]), 0),
         weaken(base, [IVAL])),
    ))
    total = face_or(face, face_of_equation(j, 0))
    return HComp(ty, total, sys, base)


# --------------------------------------------------------------------------
# Composition per type head
# --------------------------------------------------------------------------

def comp_eval(state, ctx, p):
    """One reduction of a comp problem, or None when stuck."""
    if face_is_true(p.face):
        return tube_at(ctx, p.tube, IONE)

    ictx = ctx.push(EIVar())
    head = whnf(state, ictx, p.ty)

    if not _mentions_ival0(head):
        # Constant line: the problem is homogeneous.
        dropped = inst_under(ctx, [EIVar()], [], [CIVal(IZERO)], head)
        return HComp(dropped, p.face, p.tube, p.base)

    match head:
        case Pi(dom, cod):
            # \v. comp^i cod[w(i)/x] [face -> tube (w i)] (base (w 0))
            vctx = ctx.push(EVar(subst_ival1(ctx, dom, IONE)))
            dom_v = weaken(dom, [TERM])                 # (ctx, v, i)
            ivctx = vctx.push(EIVar())
            line_i = weaken(dom, [TERM, IVAL], cut={IVAL: 1})
            w_i = _fill_bwd(ivctx, line_i,
                            weaken_face(p.face, [IVAL]),
                            Var(0), IVar(0))
            cod_line = inst_under(
                vctx, [EIVar(), EVar(_DUMMY)], [EIVar()],
                [CIVal(IVar(0)), CTerm(w_i)],
                weaken(cod, [TERM], cut={TERM: 1}),
            )
            tube_v = App(weaken(p.tube, [TERM]), w_i)
            w_0 = _fill_bwd(vctx, dom_v, p.face, Var(0), IZERO)
            base_v = App(weaken(p.base, [TERM]), w_0)
            return Lam(Comp(cod_line, p.face, tube_v, base_v))

        case Sigma(fst, snd):
            c1 = _fill_fwd(
                ictx,
                weaken(fst, [IVAL], cut={IVAL: 1}),
                weaken_face(p.face, [IVAL]),
                Fst(weaken(p.tube, [IVAL], cut={IVAL: 1})),
                Fst(weaken(p.base, [IVAL])),
                IVar(0),
            )
            first = Comp(fst, p.face, Fst(p.tube), Fst(p.base))
            snd_line = inst_under(
                ctx, [EIVar(), EVar(_DUMMY)], [EIVar()],
                [CIVal(IVar(0)), CTerm(c1)],
                snd,
            )
            second = Comp(snd_line, p.face, Snd(p.tube), Snd(p.base))
            return Pair(first, second)

        case PathT(a, left, right):
            # <k> comp^i a [face -> tube@k, k=0 -> a0, k=1 -> a1] (base@k)
            ln = weaken(a, [IVAL], cut={IVAL: 1})       # (ctx, k, i)
            phi2 = weaken_face(p.face, [IVAL, IVAL])
            sys = System((
                (phi2, PApp(weaken(p.tube, [IVAL], cut={IVAL: 1}), IVar(1))),
                (FEq(1, 0), weaken(left, [IVAL], cut={IVAL: 1})),
                (FEq(1, 1), weaken(right, [IVAL], cut={IVAL: 1})),
            ))
            base = PApp(weaken(p.base, [IVAL]), IVar(0))
            total = face_or(weaken_face(p.face, [IVAL]),
                            face_or(FEq(0, 0), FEq(0, 1)))
            return PLam(Comp(ln, total, sys, base))

        case Later(clock, body_ty):
            line = inst_under(
                ctx, [EIVar(), ETick(clock)], [ETick(clock), EIVar()],
                [CIVal(IVar(0)), CTick(TickVar(0))],
                body_ty,
            )
            tube = TickApp(weaken(p.tube, [TICK]), TickVar(0))
            base = TickApp(weaken(p.base, [TICK]), TickVar(0))
            return TickLam(clock, Comp(line, p.face, tube, base))

        case Forall(body_ty):
            line = inst_under(
                ctx, [EIVar(), EClock()], [EClock(), EIVar()],
                [CIVal(IVar(0)), CClock(0)],
                body_ty,
            )
            tube = CApp(weaken(p.tube, [CLOCK]), 0)
            base = CApp(weaken(p.base, [CLOCK]), 0)
            return CLam(Comp(line, p.face, tube, base))

        case Hit(_, _):
            return hit_comp_decompose(state, ctx, head, p.face, p.tube,
                                      p.base)

        case _:
            return None


def _iv_deps(t):
    found = set()

    def probe(ix):
        found.add(ix)
        return ix

    rename_term(t, Renaming(ival=probe))
    return found


def _mentions_ival0(t):
    return 0 in _iv_deps(t)


# --------------------------------------------------------------------------
# comp / trans / hcomp at higher inductive types
# --------------------------------------------------------------------------

def hit_comp_decompose(state, ctx, hit_line, face, tube, base):
    """comp at H(delta(i)) = hcomp at H(delta(1)) of the transported sides
    over the transported base."""
    line_at_one = subst_ival1(ctx, hit_line, IONE)
    # v, scoped in (ctx, j): trans^k H(delta[j \/ k]) (face \/ j=1) (tube j)
    vk_line = inst_under(
        ctx, [EIVar()], [EIVar(), EIVar()],
        [CIVal(IJoin(IVar(1), IVar(0)))],
        hit_line,
    )
    v = Trans(vk_line, face_or(weaken_face(face, [IVAL]), FEq(0, 1)), tube)
    return HComp(line_at_one, face, v, Trans(hit_line, face, base))


def _trans_step(state, ctx, ty, face, base):
    if face_is_true(face):
        return base
    if not _mentions_ival0(ty):
        # Constant line: transport is the identity.
        return base
    ictx = ctx.push(EIVar())
    head = whnf(state, ictx, ty)
    if not _mentions_ival0(head):
        return base
    match head:
        case Pi(_, _) | Sigma(_, _) | PathT(_, _, _) | Later(_, _) \
                | Forall(_):
            return Comp(head, face, weaken(base, [IVAL]), base)
        case Hit(_, _):
            b = whnf(state, ctx, base)
            if isinstance(b, Con):
                return _trans_con(state, ctx, head, face, b)
            if isinstance(b, HComp):
                return _trans_hcomp(state, ctx, head, face, b)
            return None
        case _:
            return None


def _trans_con(state, ctx, hit_line, face, con):
    """Push transport inside a point constructor.  Path constructors and
    constructors with higher-order recursive arguments stay stuck along
    genuinely varying parameter lines."""
    sig = state.signature(con.name)
    ctor = sig.constructor(con.label)
    if ctor.boundary or any(len(a.types) for a in ctor.rec_arities):
        return None
    params_line = hit_line.params  # scoped (ctx, i)
    new_args = _ctrans_args(state, ctx, ctor, params_line, face, con.args)
    new_recs = tuple(Trans(hit_line, face, r) for r in con.recs)
    params_at_one = tuple(subst_ival1(ctx, q, IONE) for q in params_line)
    return Con(con.name, con.label, params_at_one, tuple(new_args),
               new_recs, con.ivals)


def _ctrans_args(state, ctx, ctor, params_line, face, args):
    """Transport the non-recursive arguments along their telescope lines,
    filling earlier arguments to instantiate the dependencies of later
    ones."""
    ictx = ctx.push(EIVar())
    fills = []    # scoped (ctx, j): the m-th argument's filler at level j
    results = []
    for m, ty in enumerate(ctor.args.types):
        # ty is scoped (prelude clock, Delta, args<m).
        comps = [CClock(ictx.count(CLOCK) - 1)]
        comps += [CTerm(q) for q in params_line]
        comps += [CTerm(a) for a in fills[:m]]
        entries = [EClock()] + [EVar(_DUMMY)] * (len(params_line) + m)
        line = inst(ictx, entries, comps, ty)
        fills.append(_fill_fwd(
            ictx,
            weaken(line, [IVAL], cut={IVAL: 1}),
            weaken_face(face, [IVAL]),
            weaken(args[m], [IVAL, IVAL]),
            weaken(args[m], [IVAL]),
            IVar(0),
        ))
        results.append(Trans(line, face, args[m]))
    return results


def _trans_hcomp(state, ctx, hit_line, face, hc):
    """trans commutes with hcomp."""
    at_one = subst_ival1(ctx, hit_line, IONE)
    tube = Trans(weaken(hit_line, [IVAL], cut={IVAL: 1}),
                 weaken_face(face, [IVAL]), hc.tube)
    return HComp(at_one, hc.face, tube, Trans(hit_line, face, hc.base))


# --------------------------------------------------------------------------
# Constructor boundaries
# --------------------------------------------------------------------------

def _ival_assignment(ivals):
    # Interval arguments are stored in declaration order; index 0 of the
    # constructor's face is the innermost, i.e. the last argument.
    return {k: r for k, r in enumerate(reversed(ivals))}


def _ctor_face(ctor, ivals):
    return face_substitute(ctor.face, _ival_assignment(ivals))


def ctor_instance_subst(ctx, params, args, ivals):
    """Substitution from ctx for signature terms scoped in
    (prelude clock, Delta, constructor args, constructor ivars)."""
    comps = [CClock(ctx.count(CLOCK) - 1)]
    comps += [CTerm(q) for q in params]
    comps += [CTerm(a) for a in args]
    comps += [CIVal(r) for r in ivals]
    entries = ([EClock()] + [EVar(_DUMMY)] * (len(params) + len(args))
               + [EIVar()] * len(ivals))
    return extend(ctx, entries, comps)


def embed_boundary(state, ctx, sig, ctor, bterm, params, args, recs, ivals):
    """Interpret a boundary term as an ordinary term at a constructor
    instance."""
    sigma = ctor_instance_subst(ctx, params, args, ivals)
    return _embed(state, sig, sigma, bterm, params, recs)


def _embed(state, sig, sigma, bterm, params, recs):
    match bterm:
        case BRec(j, uargs):
            call = recs[j]
            for a in uargs:
                call = App(call, subst_apply(sigma, a))
            return call
        case BCon(label, cargs, crecs, civals):
            target = sig.constructor(label)
            new_recs = []
            for k, sub in enumerate(crecs):
                n = len(target.rec_arities[k].types)
                inner_sigma = sigma
                for _ in range(n):
                    inner_sigma = push_binder(inner_sigma, EVar(_DUMMY))
                body = _embed(
                    state, sig, inner_sigma, sub,
                    [weaken(q, [TERM] * n) for q in params],
                    [weaken(r, [TERM] * n) for r in recs],
                )
                new_recs.append(_nlam(n, body))
            return Con(
                sig.name, label,
                tuple(params),
                tuple(subst_apply(sigma, a) for a in cargs),
                tuple(new_recs),
                tuple(subst_ival(sigma, r) for r in civals),
            )
        case BHComp(face, tube, base):
            inner_sigma = push_binder(sigma, EIVar())
            return HComp(
                Hit(sig.name, tuple(params)),
                subst_face(sigma, face),
                _embed(state, sig, inner_sigma, tube,
                       [weaken(q, [IVAL]) for q in params],
                       [weaken(r, [IVAL]) for r in recs]),
                _embed(state, sig, sigma, base, params, recs),
            )
    raise IllFormedRedex(f"not a boundary term: {bterm!r}")


def _nlam(n, body):
    for _ in range(n):
        body = Lam(body)
    return body


def _boundary_fire(state, ctx, sig, ctor, params, args, recs, ivals):
    """The constructor's face is satisfied: reduce to the boundary piece."""
    assignment = _ival_assignment(ivals)
    for phi, bterm in ctor.boundary:
        if face_is_true(face_substitute(phi, assignment)):
            return embed_boundary(state, ctx, sig, ctor, bterm, params,
                                  args, recs, ivals)
    raise IllFormedRedex(
        f"constructor face of {ctor.label} satisfied but no boundary piece "
        "fires"
    )


# --------------------------------------------------------------------------
# Boundary-term calculus
# --------------------------------------------------------------------------

def boundary_subst(sig, target_ctor, N, args, rec_bodies, ivals):
    """Instantiate a constructor application into the boundary term N: its
    term slots get `args` and `ivals` plugged for the target constructor's
    telescope and interval binders, and each recursive variable call is
    replaced by the matching boundary payload."""
    if len(rec_bodies) != len(target_ctor.rec_arities):
        raise ArityMismatch(
            f"expected {len(target_ctor.rec_arities)} recursive payloads"
        )

    entries = [EVar(_DUMMY)] * len(args) + [EIVar()] * len(ivals)
    comps = [CTerm(a) for a in args] + [CIVal(r) for r in ivals]

    def inst_term(t):
        return open_inst(entries, comps, t)

    def go(M):
        match M:
            case BRec(j, uargs):
                arity = target_ctor.rec_arities[j]
                return _bnd_plug(rec_bodies[j],
                                 [inst_term(u) for u in uargs],
                                 len(arity.types))
            case BCon(label, cargs, crecs, civals):
                return BCon(
                    label,
                    tuple(inst_term(a) for a in cargs),
                    tuple(go(m) for m in crecs),
                    tuple(_inst_ival(r, ivals) for r in civals),
                )
            case BHComp(face, tube, base):
                return BHComp(_inst_face(face, ivals), go(tube), go(base))
        raise IllFormedRedex(repr(M))

    return go(N)


def _inst_ival(r, ivals):
    table = _ival_assignment(ivals)
    return iv_normalize(
        iv_map_vars(r, lambda ix: table.get(ix, IVar(ix)))
    )


def _inst_face(phi, ivals):
    return face_substitute(phi, _ival_assignment(ivals))


def _bnd_plug(body, values, arity):
    """Plug term values for the bound telescope variables of a recursive
    boundary payload."""
    if arity != len(values):
        raise ArityMismatch("recursive payload arity mismatch")
    if arity == 0:
        return body

    entries = [EVar(_DUMMY)] * arity
    comps = [CTerm(v) for v in values]

    def go(M):
        match M:
            case BRec(j, uargs):
                return BRec(j, tuple(
                    open_inst(entries, comps, u) for u in uargs
                ))
            case BCon(label, cargs, crecs, civals):
                return BCon(label,
                            tuple(open_inst(entries, comps, a)
                                  for a in cargs),
                            tuple(go(m) for m in crecs), civals)
            case BHComp(face, tube, base):
                return BHComp(face, go(tube), go(base))
        raise IllFormedRedex(repr(M))

    return go(body)


def boundary_reduce(sig, M):
    """One head reduction of a boundary term, or None."""
    match M:
        case BCon(label, cargs, crecs, civals):
            ctor = sig.constructor(label)
            assignment = _ival_assignment(civals)
            if face_is_true(face_substitute(ctor.face, assignment)):
                for phi, piece in ctor.boundary:
                    if face_is_true(face_substitute(phi, assignment)):
                        return boundary_subst(sig, ctor, piece, cargs,
                                              crecs, civals)
        case BHComp(face, tube, base):
            if face_is_true(face):
                return _bnd_ival_subst(tube, IONE)
    return None


def _bnd_ival_subst(M, r):
    """Substitute r for the innermost interval variable of a tube payload."""
    from .interval import face_map_vars

    def on_iv(e):
        return iv_normalize(iv_map_vars(
            e, lambda ix: r if ix == 0 else IVar(ix - 1)
        ))

    def on_face(phi):
        return face_normalize(face_map_vars(
            phi, lambda ix: r if ix == 0 else IVar(ix - 1)
        ))

    def on_term(t):
        return open_inst([EIVar()], [CIVal(r)], t)

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
        raise IllFormedRedex(repr(M))

    return go(M)


def boundary_equal(sig, M, N):
    """Congruence closure of the boundary reduction rules."""
    M2 = boundary_reduce(sig, M)
    if M2 is not None:
        return boundary_equal(sig, M2, N)
    N2 = boundary_reduce(sig, N)
    if N2 is not None:
        return boundary_equal(sig, M, N2)
    match (M, N):
        case (BRec(j1, a1), BRec(j2, a2)):
            return j1 == j2 and len(a1) == len(a2) and all(
                structural_equal(x, y) for x, y in zip(a1, a2)
            )
        case (BCon(l1, a1, r1, v1), BCon(l2, a2, r2, v2)):
            return (
                l1 == l2
                and len(a1) == len(a2) and len(r1) == len(r2)
                and len(v1) == len(v2)
                and all(structural_equal(x, y) for x, y in zip(a1, a2))
                and all(boundary_equal(sig, x, y) for x, y in zip(r1, r2))
                and all(iv_equal(x, y) for x, y in zip(v1, v2))
            )
        case (BHComp(f1, t1, b1), BHComp(f2, t2, b2)):
            return (face_equal(f1, f2)
                    and boundary_equal(sig, t1, t2)
                    and boundary_equal(sig, b1, b2))
    return False


# --------------------------------------------------------------------------
# Induction under clocks: reduction
# --------------------------------------------------------------------------

def elim_reduce(state, ctx, elim):
    """Reduce an eliminator whose scrutinee is a clock-abstracted
    constructor or hcomp; None when neutral."""
    cur, cctx = elim.arg, ctx
    for _ in range(elim.n):
        cur = whnf(state, cctx, cur)
        if not isinstance(cur, CLam):
            return None
        cctx = cctx.push(EClock())
        cur = cur.body
    head = whnf(state, cctx, cur)
    if isinstance(head, Con):
        return _elim_con(state, ctx, elim, head)
    if isinstance(head, HComp) and isinstance(
        whnf(state, cctx, head.ty), Hit
    ):
        return _elim_hcomp(state, ctx, elim, head)
    return None


def _clam_n(n, t):
    for _ in range(n):
        t = CLam(t)
    return t


def _forall_n(n, t):
    for _ in range(n):
        t = Forall(t)
    return t


def _case_for(elim, label):
    for case in elim.cases:
        if case.label == label:
            return case
    raise CaseMissing(f"no case for constructor {label}")


def _weaken_case(case, sorts):
    cut = {TERM: case.n_args + 2 * case.n_recs, IVAL: case.n_ivars}
    return ElimCase(case.label, case.n_args, case.n_recs, case.n_ivars,
                    weaken(case.body, sorts, cut=cut))


def _elim_con(state, ctx, elim, con):
    """Constructor rule: instantiate the matching case with the
    clock-abstracted arguments and the recursively eliminated calls."""
    sig = state.signature(elim.name)
    ctor = sig.constructor(con.label)
    case = _case_for(elim, con.label)
    n = elim.n

    gamma = [_clam_n(n, a) for a in con.args]
    xs = [_clam_n(n, a) for a in con.recs]
    ys = []
    for k, arity in enumerate(ctor.rec_arities):
        m = len(arity.types)
        # y_k = \xi-bar. elim(/\kappa-bar. x_k xi-bar)
        call = weaken(con.recs[k], [TERM] * m)
        for j in range(m):
            call = App(call, Var(m - 1 - j))
        sub = ClockElim(
            elim.name, n,
            tuple(weaken(p, [TERM] * m) for p in elim.params),
            weaken(elim.motive, [TERM] * m, cut={TERM: 1}),
            tuple(_weaken_case(c, [TERM] * m) for c in elim.cases),
            _clam_n(n, call),
        )
        ys.append(_nlam(m, sub))

    comps = ([CTerm(g) for g in gamma] + [CTerm(x) for x in xs]
             + [CTerm(y) for y in ys] + [CIVal(r) for r in con.ivals])
    entries = ([EVar(_DUMMY)] * (len(gamma) + 2 * len(xs))
               + [EIVar()] * len(con.ivals))
    return inst(ctx, entries, comps, case.body)


def _elim_hcomp(state, ctx, elim, hc):
    """hcomp rule: eliminate through the composition by composing in the
    motive over the filling line."""
    n = elim.n
    # The hcomp's fields live under the n peeled clock binders, but its
    # face is clock-free and the others get re-abstracted, so the per-sort
    # indices line up without renumbering.
    big_ty = _forall_n(n, hc.ty)
    tube_abs = _clam_n(n, hc.tube)     # scoped (ctx, i)
    base_abs = _clam_n(n, hc.base)
    v_line = hfill(ctx.push(EIVar()),
                   weaken(big_ty, [IVAL]),
                   weaken_face(hc.face, [IVAL]),
                   weaken(tube_abs, [IVAL], cut={IVAL: 1}),
                   weaken(base_abs, [IVAL]),
                   IVar(0))
    motive_line = inst_under(
        ctx, [EVar(_DUMMY)], [EIVar()], [CTerm(v_line)], elim.motive
    )
    tube = ClockElim(
        elim.name, n,
        tuple(weaken(p, [IVAL]) for p in elim.params),
        weaken(elim.motive, [IVAL]),
        tuple(_weaken_case(c, [IVAL]) for c in elim.cases),
        tube_abs,
    )
    base = ClockElim(elim.name, n, elim.params, elim.motive, elim.cases,
                     base_abs)
    return Comp(motive_line, hc.face, tube, base)


# --------------------------------------------------------------------------
# Conversion
# --------------------------------------------------------------------------

def conv(state, ctx, ty, t, u):
    """Type-directed conversion under the context's face restrictions."""
    faces = ctx.restriction_faces()
    if not faces:
        return _conv_clause(state, ctx, ty, t, u)
    restriction = faces[0]
    for phi in faces[1:]:
        restriction = face_and(restriction, phi)
    return conv_under_face(state, ctx, restriction, ty, t, u,
                           _already_restricted=True)


def conv_under_face(state, ctx, phi, ty, t, u, _already_restricted=False):
    """Split phi into clauses and compare under each endpoint assignment."""
    if not _already_restricted:
        for psi in ctx.restriction_faces():
            phi = face_and(phi, psi)
    if face_is_true(phi):
        return _conv_clause(state, ctx, ty, t, u)
    clauses = face_clauses(phi)
    if not clauses:
        return True  # empty extent: vacuously equal
    for clause in clauses:
        sigma = _clause_subst(ctx, clause)
        rctx = _clause_context(ctx, clause)
        if not _conv_clause(state, rctx,
                            subst_apply(sigma, ty),
                            subst_apply(sigma, t),
                            subst_apply(sigma, u)):
            return False
    return True


def _clause_subst(ctx, clause):
    sigma = identity_subst(ctx)
    comps = list(sigma.comps)
    for pos, entry in enumerate(ctx.entries):
        if entry_sort(entry) == IVAL:
            ix = ctx.index_at(pos)
            if ix in clause:
                comps[pos] = CIVal(IONE if clause[ix] else IZERO)
    return Substitution(ctx, ctx, tuple(comps))


def _clause_context(ctx, clause):
    """Same context with face payloads instantiated at the clause."""
    entries = []
    for pos, entry in enumerate(ctx.entries):
        if entry_sort(entry) == FACE:
            shift = sum(1 for e in ctx.entries[pos + 1:]
                        if entry_sort(e) == IVAL)
            local = {
                ix - shift: (IONE if b else IZERO)
                for ix, b in clause.items() if ix >= shift
            }
            entries.append(EFace(face_substitute(entry.face, local)))
        else:
            entries.append(entry)
    return Context(tuple(entries))


def _conv_clause(state, ctx, ty, t, u):
    head = whnf(state, ctx, ty)
    match head:
        case Pi(dom, cod):
            inner = ctx.push(EVar(dom))
            return _conv_clause(
                state, inner, cod,
                App(weaken(t, [TERM]), Var(0)),
                App(weaken(u, [TERM]), Var(0)),
            )
        case Sigma(fst, snd):
            if not _conv_clause(state, ctx, fst, Fst(t), Fst(u)):
                return False
            return _conv_clause(state, ctx, subst1(ctx, snd, Fst(t)),
                                Snd(t), Snd(u))
        case PathT(a, _, _):
            inner = ctx.push(EIVar())
            return _conv_clause(
                state, inner, weaken(a, [IVAL]),
                PApp(weaken(t, [IVAL]), IVar(0)),
                PApp(weaken(u, [IVAL]), IVar(0)),
            )
        case Forall(body):
            inner = ctx.push(EClock())
            return _conv_clause(
                state, inner, body,
                CApp(weaken(t, [CLOCK]), 0),
                CApp(weaken(u, [CLOCK]), 0),
            )
        case Later(clock, body):
            inner = ctx.push(ETick(clock))
            return _conv_clause(
                state, inner, body,
                TickApp(weaken(t, [TICK]), TickVar(0)),
                TickApp(weaken(u, [TICK]), TickVar(0)),
            )
        case _:
            return conv_tm(state, ctx, t, u)


def conv_tm(state, ctx, t, u):
    """Untyped comparison of weak-head forms with eta-matching."""
    t = whnf(state, ctx, t)
    u = whnf(state, ctx, u)

    if isinstance(t, Lam) or isinstance(u, Lam):
        inner = ctx.push(EVar(_DUMMY))
        return conv_tm(state, inner, _eta_app(t), _eta_app(u))
    if isinstance(t, PLam) or isinstance(u, PLam):
        inner = ctx.push(EIVar())
        return conv_tm(state, inner, _eta_papp(t), _eta_papp(u))
    if isinstance(t, CLam) or isinstance(u, CLam):
        inner = ctx.push(EClock())
        return conv_tm(state, inner, _eta_capp(t), _eta_capp(u))
    if isinstance(t, TickLam) or isinstance(u, TickLam):
        clock = t.clock if isinstance(t, TickLam) else u.clock
        inner = ctx.push(ETick(clock))
        return conv_tm(state, inner, _eta_tapp(t), _eta_tapp(u))
    if isinstance(t, Pair) or isinstance(u, Pair):
        return (conv_tm(state, ctx, Fst(t), Fst(u))
                and conv_tm(state, ctx, Snd(t), Snd(u)))

    match (t, u):
        case (Var(i1), Var(i2)):
            return i1 == i2
        case (U(n1), U(n2)):
            return n1 == n2
        case (TopRef(n1), TopRef(n2)):
            return n1 == n2
        case (Pi(d1, c1), Pi(d2, c2)) | (Sigma(d1, c1), Sigma(d2, c2)):
            return (conv_tm(state, ctx, d1, d2)
                    and conv_tm(state, ctx.push(EVar(d1)), c1, c2))
        case (PathT(a1, l1, r1), PathT(a2, l2, r2)):
            return (conv_tm(state, ctx, a1, a2)
                    and conv_tm(state, ctx, l1, l2)
                    and conv_tm(state, ctx, r1, r2))
        case (Forall(b1), Forall(b2)):
            return conv_tm(state, ctx.push(EClock()), b1, b2)
        case (Later(k1, b1), Later(k2, b2)):
            return k1 == k2 and conv_tm(state, ctx.push(ETick(k1)), b1, b2)
        case (App(f1, a1), App(f2, a2)):
            return (conv_tm(state, ctx, f1, f2)
                    and conv_tm(state, ctx, a1, a2))
        case (Fst(p1), Fst(p2)) | (Snd(p1), Snd(p2)):
            return conv_tm(state, ctx, p1, p2)
        case (PApp(f1, r1), PApp(f2, r2)):
            return conv_tm(state, ctx, f1, f2) and iv_equal(r1, r2)
        case (CApp(f1, k1), CApp(f2, k2)):
            return k1 == k2 and conv_tm(state, ctx, f1, f2)
        case (TickApp(f1, u1), TickApp(f2, u2)):
            return conv_tm(state, ctx, f1, f2) and tick_conv(u1, u2)
        case (ForceApp(f1, k1, u1), ForceApp(f2, k2, u2)):
            return (k1 == k2 and tick_conv(u1, u2)
                    and conv_tm(state, ctx.push(EClock()), f1, f2))
        case (DFix(k1, f1), DFix(k2, f2)) | (PFix(k1, f1), PFix(k2, f2)):
            return k1 == k2 and conv_tm(state, ctx, f1, f2)
        case (Hit(n1, p1), Hit(n2, p2)):
            return n1 == n2 and len(p1) == len(p2) and all(
                conv_tm(state, ctx, a, b) for a, b in zip(p1, p2)
            )
        case (Con(n1, l1, q1, a1, r1, v1), Con(n2, l2, q2, a2, r2, v2)):
            return (
                n1 == n2 and l1 == l2
                and len(a1) == len(a2) and len(r1) == len(r2)
                and len(v1) == len(v2)
                and all(conv_tm(state, ctx, x, y) for x, y in zip(a1, a2))
                and all(conv_tm(state, ctx, x, y) for x, y in zip(r1, r2))
                and all(iv_equal(x, y) for x, y in zip(v1, v2))
            )
        case (Comp(ty1, f1, tu1, b1), Comp(ty2, f2, tu2, b2)):
            return _conv_comp(state, ctx, (ty1, f1, tu1, b1),
                              (ty2, f2, tu2, b2), hom=False)
        case (HComp(ty1, f1, tu1, b1), HComp(ty2, f2, tu2, b2)):
            return _conv_comp(state, ctx, (ty1, f1, tu1, b1),
                              (ty2, f2, tu2, b2), hom=True)
        case (Trans(ty1, f1, b1), Trans(ty2, f2, b2)):
            return (face_equal(f1, f2)
                    and conv_tm(state, ctx.push(EIVar()), ty1, ty2)
                    and conv_tm(state, ctx, b1, b2))
        case (System(p1), System(p2)):
            return (_system_covers(state, ctx, p1, p2)
                    and _system_covers(state, ctx, p2, p1))
        case (ClockElim(n1, k1, q1, m1, c1, a1),
              ClockElim(n2, k2, q2, m2, c2, a2)):
            if n1 != n2 or k1 != k2 or len(c1) != len(c2):
                return False
            if not conv_tm(state, ctx, a1, a2):
                return False
            if len(q1) != len(q2) or not all(
                conv_tm(state, ctx, x, y) for x, y in zip(q1, q2)
            ):
                return False
            if not conv_tm(state, ctx.push(EVar(_DUMMY)), m1, m2):
                return False
            for x, y in zip(c1, c2):
                if (x.label, x.n_args, x.n_recs, x.n_ivars) != \
                        (y.label, y.n_args, y.n_recs, y.n_ivars):
                    return False
                inner = ctx
                for _ in range(x.n_args + 2 * x.n_recs):
                    inner = inner.push(EVar(_DUMMY))
                for _ in range(x.n_ivars):
                    inner = inner.push(EIVar())
                if not conv_tm(state, inner, x.body, y.body):
                    return False
            return True
    return False


def _conv_comp(state, ctx, a, b, hom):
    ty1, f1, tu1, b1 = a
    ty2, f2, tu2, b2 = b
    if not face_equal(f1, f2):
        return False
    ty_ctx = ctx if hom else ctx.push(EIVar())
    if not conv_tm(state, ty_ctx, ty1, ty2):
        return False
    if not conv_tm(state, ctx, b1, b2):
        return False
    inner = ctx.push(EIVar())
    return conv_under_face(state, inner, weaken_face(f1, [IVAL]),
                           U(0), tu1, tu2)


def _system_covers(state, ctx, p1, p2):
    for phi, v in p1:
        for clause in _split_clauses(phi):
            if not any(
                face_entails(clause, psi)
                and conv_under_face(state, ctx, clause, U(0), v, w)
                for psi, w in p2
            ):
                return False
    return True


def _split_clauses(phi):
    from functools import reduce
    out = []
    for clause in face_clauses(phi):
        gens = [FEq(ix, b) for ix, b in clause.items()]
        out.append(reduce(FAnd, gens) if gens else face_normalize(phi))
    return out


def tick_conv(u, v):
    u, v = tick_whnf(u), tick_whnf(v)
    match (u, v):
        case (TickVar(i1), TickVar(i2)):
            return i1 == i2
        case (Diamond(), Diamond()):
            return True
        case (Tirr(l1, r1, a1), Tirr(l2, r2, a2)):
            return (tick_conv(l1, l2) and tick_conv(r1, r2)
                    and iv_equal(a1, a2))
    return False


def _eta_app(t):
    if isinstance(t, Lam):
        return t.body
    return App(weaken(t, [TERM]), Var(0))


def _eta_papp(t):
    if isinstance(t, PLam):
        return t.body
    return PApp(weaken(t, [IVAL]), IVar(0))


def _eta_capp(t):
    if isinstance(t, CLam):
        return t.body
    return CApp(weaken(t, [CLOCK]), 0)


def _eta_tapp(t):
    if isinstance(t, TickLam):
        return t.body
    return TickApp(weaken(t, [TICK]), TickVar(0))
