"""Context discipline for ticks and clocks.

Covers the timeless filter TL, the trimming relation, the simple and
forcing tick judgements (always returning the maximal residual context),
and the simultaneous substitution calculus whose tick components decide
whether a tick application stays simple or becomes a forcing application.
"""

from dataclasses import dataclass

from .errors import (
    ClockMismatch, DiamondOutsideForcing, MalformedSubstitution,
    NoCommonResidual, NotATick, TickEscape,
)
from .interval import IVar, face_map_vars, iv_map_vars, iv_normalize
from .syntax import (
    CLOCK, FACE, IVAL, TERM, TICK,
    Context, Diamond, EClock, EFace, EIVar, ETick, EVar,
    ForceApp, Renaming, Term, Tick, TickApp, TickVar, Tirr, Var,
    ZERO_DEPTH, entry_sort, rename_face, rename_iexpr, rename_term,
    rename_tick,
)

TIMELESS = (CLOCK, IVAL, FACE)


def timeless(ctx):
    """TL: keep clocks, interval variables, and faces; drop the rest."""
    return Context(tuple(
        e for e in ctx.entries if entry_sort(e) in TIMELESS
    ))


def trim_check(trimmed, ctx):
    """True iff `trimmed` arises from ctx by replacing a suffix by its TL."""
    for split in range(len(ctx.entries) + 1):
        candidate = Context(
            ctx.entries[:split]
            + timeless(Context(ctx.entries[split:])).entries
        )
        if candidate.entries == trimmed.entries:
            return True
    return False


def apply_mask(ctx, mask):
    return Context(tuple(
        e for e, keep in zip(ctx.entries, mask) if keep
    ))


def _tickvar_mask(ctx, ix, clock):
    """Mask of the maximal residual for tick variable ix on `clock`."""
    try:
        pos = ctx.pos_of(TICK, ix)
    except IndexError:
        raise NotATick(f"tick variable {ix} is not in scope")
    if ctx.tick_clock(ix) != clock:
        raise ClockMismatch(
            f"tick variable {ix} is on clock {ctx.tick_clock(ix)}, "
            f"expected {clock}"
        )
    mask = [True] * pos + [False]
    mask += [entry_sort(e) in TIMELESS for e in ctx.entries[pos + 1:]]
    return mask


def _tick_mask(ctx, u, clock, forcing):
    match u:
        case TickVar(ix):
            return _tickvar_mask(ctx, ix, clock)
        case Diamond():
            if not forcing:
                raise DiamondOutsideForcing(
                    "the forcing tick <> cannot appear in simple position"
                )
            return [True] * len(ctx.entries)
        case Tirr(l, r, _):
            ml = _tick_mask(ctx, l, clock, forcing)
            mr = _tick_mask(ctx, r, clock, forcing)
            both = [a and b for a, b in zip(ml, mr)]
            left = apply_mask(ctx, both)
            if not (trim_check(left, apply_mask(ctx, ml))
                    and trim_check(left, apply_mask(ctx, mr))):
                raise NoCommonResidual(
                    "tirr operands admit no common residual context"
                )
            return both
    raise NotATick(f"not a tick: {u!r}")


def tick_check_simple(ctx, u, clock):
    """Maximal residual context for a simple tick u on `clock`."""
    return apply_mask(ctx, _tick_mask(ctx, u, clock, forcing=False))


def tick_check_forcing(ctx, clock, u):
    """Maximal residual for a forcing tick (clock, u)."""
    if not (0 <= clock < ctx.count(CLOCK)):
        raise ClockMismatch(f"clock {clock} is not in scope")
    return apply_mask(ctx, _tick_mask(ctx, u, clock, forcing=True))


def residual_mask(ctx, u, clock, forcing=False):
    return _tick_mask(ctx, u, clock, forcing)


# --------------------------------------------------------------------------
# Strengthening
# --------------------------------------------------------------------------

def mask_renaming(ctx, mask):
    """Renaming from ctx into the masked context; raises TickEscape when a
    dropped entry is referenced."""
    remap = {TERM: {}, CLOCK: {}, TICK: {}, IVAL: {}}
    counters = {TERM: 0, CLOCK: 0, TICK: 0, IVAL: 0}
    for pos in range(len(ctx.entries) - 1, -1, -1):
        sort = entry_sort(ctx.entries[pos])
        if sort == FACE:
            continue
        old_ix = ctx.index_at(pos)
        if mask[pos]:
            remap[sort][old_ix] = counters[sort]
            counters[sort] += 1

    def mk(sort):
        table = remap[sort]

        def go(ix):
            if ix not in table:
                raise TickEscape(
                    f"{sort} variable {ix} does not survive the residual "
                    "context"
                )
            return table[ix]
        return go

    return Renaming(term=mk(TERM), clock=mk(CLOCK),
                    tick=mk(TICK), ival=mk(IVAL))


def strengthen_term(ctx, mask, t):
    return rename_term(t, mask_renaming(ctx, mask))


def weakening_renaming(ctx, mask):
    """Renaming from the masked context back into ctx."""
    back = {TERM: {}, CLOCK: {}, TICK: {}, IVAL: {}}
    counters = {TERM: 0, CLOCK: 0, TICK: 0, IVAL: 0}
    for pos in range(len(ctx.entries) - 1, -1, -1):
        sort = entry_sort(ctx.entries[pos])
        if sort == FACE:
            continue
        if mask[pos]:
            back[sort][counters[sort]] = ctx.index_at(pos)
            counters[sort] += 1
    return Renaming(**{
        key: (lambda table: lambda ix: table[ix])(back[sort])
        for key, sort in (("term", TERM), ("clock", CLOCK),
                          ("tick", TICK), ("ival", IVAL))
    })


# --------------------------------------------------------------------------
# Simultaneous substitutions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CTerm:
    term: Term


@dataclass(frozen=True)
class CClock:
    clock: int


@dataclass(frozen=True)
class CTick:
    tick: Tick


@dataclass(frozen=True)
class CForcedTick:
    """Tick half of a paired clock-and-forcing-tick component."""
    clock: int
    tick: Tick


@dataclass(frozen=True)
class CIVal:
    expr: object


@dataclass(frozen=True)
class CFace:
    pass


_COMP_SORT = {
    CTerm: TERM, CClock: CLOCK, CTick: TICK, CForcedTick: TICK,
    CIVal: IVAL, CFace: FACE,
}


def comp_sort(c):
    return _COMP_SORT[type(c)]


@dataclass(frozen=True)
class Substitution:
    """sigma : dom <- cod, with one component per cod entry (left to right);
    component payloads are scoped in dom."""
    dom: Context
    cod: Context
    comps: tuple

    def component(self, sort, ix):
        """Component for the ix-th cod entry of the given sort (from the
        inside), together with its position in comps."""
        seen = 0
        for pos in range(len(self.comps) - 1, -1, -1):
            if comp_sort(self.comps[pos]) == sort:
                if seen == ix:
                    return pos, self.comps[pos]
                seen += 1
        raise MalformedSubstitution(f"no component for {sort} variable {ix}")


def validate_substitution(sigma):
    if len(sigma.comps) != len(sigma.cod.entries):
        raise MalformedSubstitution("component count does not match context")
    for entry, comp in zip(sigma.cod.entries, sigma.comps):
        if entry_sort(entry) != comp_sort(comp):
            raise MalformedSubstitution(
                f"component {comp!r} does not match entry {entry!r}"
            )
    # Paired components must sit right of their clock half.
    for pos, comp in enumerate(sigma.comps):
        if isinstance(comp, CForcedTick):
            if pos == 0 or not isinstance(sigma.comps[pos - 1], CClock) \
                    or sigma.comps[pos - 1].clock != comp.clock:
                raise MalformedSubstitution(
                    "forcing tick component must pair with the preceding "
                    "clock component"
                )
    return True


def identity_comp(entry):
    match entry:
        case EVar(_):
            return CTerm(Var(0))
        case EClock():
            return CClock(0)
        case ETick(_):
            return CTick(TickVar(0))
        case EIVar():
            return CIVal(IVar(0))
        case EFace(_):
            return CFace()
    raise MalformedSubstitution(f"unknown entry {entry!r}")


def identity_subst(ctx):
    comps = []
    for pos, entry in enumerate(ctx.entries):
        sort = entry_sort(entry)
        if sort == FACE:
            comps.append(CFace())
            continue
        ix = ctx.index_at(pos)
        comps.append({
            TERM: lambda: CTerm(Var(ix)),
            CLOCK: lambda: CClock(ix),
            TICK: lambda: CTick(TickVar(ix)),
            IVAL: lambda: CIVal(IVar(ix)),
        }[sort]())
    return Substitution(ctx, ctx, tuple(comps))


def _comp_shift(comp, sorts):
    """Weaken a component's payload after dom gained entries of `sorts`."""
    from .syntax import weaken, weaken_iexpr, weaken_tick
    match comp:
        case CTerm(t):
            return CTerm(weaken(t, sorts))
        case CClock(k):
            return CClock(k + sum(1 for s in sorts if s == CLOCK))
        case CTick(u):
            return CTick(weaken_tick(u, sorts))
        case CForcedTick(k, u):
            return CForcedTick(
                k + sum(1 for s in sorts if s == CLOCK),
                weaken_tick(u, sorts),
            )
        case CIVal(r):
            return CIVal(weaken_iexpr(r, sorts))
        case CFace():
            return comp
    raise MalformedSubstitution(repr(comp))


def subst_entry(sigma, entry):
    """Push a cod entry's payload through sigma (for extending dom)."""
    match entry:
        case EVar(ty):
            return EVar(subst_apply(sigma, ty))
        case EClock() | EIVar():
            return entry
        case ETick(clock):
            # The stored clock is relative to the entry's prefix, which at
            # push time is the whole cod.
            _, comp = sigma.component(CLOCK, clock)
            return ETick(comp.clock)
        case EFace(phi):
            return EFace(subst_face(sigma, phi))
    raise MalformedSubstitution(repr(entry))


def push_binder(sigma, entry):
    new_entry = subst_entry(sigma, entry)
    sort = entry_sort(entry)
    shift = [] if sort == FACE else [sort]
    comps = tuple(_comp_shift(c, shift) for c in sigma.comps)
    return Substitution(
        sigma.dom.push(new_entry),
        sigma.cod.push(entry),
        comps + (identity_comp(entry),),
    )


def extend(ctx, added_entries, comps):
    """Substitution from ctx for a context extended by `added_entries`,
    sending the added entries to `comps` and fixing everything else."""
    sigma = identity_subst(ctx)
    cod = ctx
    for entry in added_entries:
        cod = cod.push(entry)
    return Substitution(ctx, cod, sigma.comps + tuple(comps))


def subst_ival(sigma, r):
    def on_var(ix):
        _, comp = sigma.component(IVAL, ix)
        return comp.expr
    return iv_normalize(iv_map_vars(r, on_var))


def subst_face(sigma, phi):
    def on_var(ix):
        _, comp = sigma.component(IVAL, ix)
        return comp.expr
    return face_map_vars(phi, on_var)


def subst_tick(sigma, u):
    match u:
        case TickVar(ix):
            _, comp = sigma.component(TICK, ix)
            return comp.tick
        case Diamond():
            return u
        case Tirr(l, r, at):
            left = subst_tick(sigma, l)
            right = subst_tick(sigma, r)
            if isinstance(left, Diamond) and isinstance(right, Diamond):
                return Diamond()  # tirr(<>, <>, r) collapses eagerly
            return Tirr(left, right, subst_ival(sigma, at))
    raise NotATick(repr(u))


def _tick_vars(u):
    match u:
        case TickVar(ix):
            return {ix}
        case Diamond():
            return set()
        case Tirr(l, r, _):
            return _tick_vars(l) | _tick_vars(r)
    raise NotATick(repr(u))


def _leftmost_tick_var(u):
    """The tick variable of u bound furthest out (largest index)."""
    tvs = _tick_vars(u)
    return max(tvs) if tvs else None


def subst_apply(sigma, t):
    """Apply sigma : dom <- cod to a term scoped in cod."""
    from . import syntax as S

    go = subst_apply
    match t:
        case S.Var(ix):
            _, comp = sigma.component(TERM, ix)
            return comp.term
        case S.U(_) | S.TopRef(_):
            return t
        case S.Pi(dom, cod):
            return S.Pi(go(sigma, dom),
                        go(push_binder(sigma, EVar(dom)), cod))
        case S.Lam(body):
            return S.Lam(go(push_binder(sigma, EVar(S.U(0))), body))
        case S.App(fn, arg):
            return S.App(go(sigma, fn), go(sigma, arg))
        case S.Sigma(fst, snd):
            return S.Sigma(go(sigma, fst),
                           go(push_binder(sigma, EVar(fst)), snd))
        case S.Pair(fst, snd):
            return S.Pair(go(sigma, fst), go(sigma, snd))
        case S.Fst(arg):
            return S.Fst(go(sigma, arg))
        case S.Snd(arg):
            return S.Snd(go(sigma, arg))
        case S.PathT(ty, left, right):
            return S.PathT(go(sigma, ty), go(sigma, left), go(sigma, right))
        case S.PLam(body):
            return S.PLam(go(push_binder(sigma, EIVar()), body))
        case S.PApp(fn, arg):
            return S.PApp(go(sigma, fn), subst_ival(sigma, arg))
        case S.Forall(body):
            return S.Forall(go(push_binder(sigma, EClock()), body))
        case S.CLam(body):
            return S.CLam(go(push_binder(sigma, EClock()), body))
        case S.CApp(fn, clock):
            _, comp = sigma.component(CLOCK, clock)
            return S.CApp(go(sigma, fn), comp.clock)
        case S.Later(clock, ty):
            _, comp = sigma.component(CLOCK, clock)
            return S.Later(
                comp.clock, go(push_binder(sigma, ETick(clock)), ty)
            )
        case S.TickLam(clock, body):
            _, comp = sigma.component(CLOCK, clock)
            return S.TickLam(
                comp.clock, go(push_binder(sigma, ETick(clock)), body)
            )
        case S.TickApp(fn, tick):
            return _subst_tick_app(sigma, fn, tick)
        case S.ForceApp(fn, clock, tick):
            _, comp = sigma.component(CLOCK, clock)
            return S.ForceApp(
                go(push_binder(sigma, EClock()), fn),
                comp.clock,
                subst_tick(sigma, tick),
            )
        case S.DFix(clock, fn):
            _, comp = sigma.component(CLOCK, clock)
            return S.DFix(comp.clock, go(sigma, fn))
        case S.PFix(clock, fn):
            _, comp = sigma.component(CLOCK, clock)
            return S.PFix(comp.clock, go(sigma, fn))
        case S.Comp(ty, face, tube, base):
            under = push_binder(sigma, EIVar())
            return S.Comp(go(under, ty), subst_face(sigma, face),
                          go(under, tube), go(sigma, base))
        case S.HComp(ty, face, tube, base):
            under = push_binder(sigma, EIVar())
            return S.HComp(go(sigma, ty), subst_face(sigma, face),
                           go(under, tube), go(sigma, base))
        case S.Trans(ty, face, base):
            under = push_binder(sigma, EIVar())
            return S.Trans(go(under, ty), subst_face(sigma, face),
                           go(sigma, base))
        case S.Hit(name, params):
            return S.Hit(name, tuple(go(sigma, p) for p in params))
        case S.Con(name, label, params, args, recs, ivals):
            return S.Con(
                name, label,
                tuple(go(sigma, p) for p in params),
                tuple(go(sigma, a) for a in args),
                tuple(go(sigma, a) for a in recs),
                tuple(subst_ival(sigma, r) for r in ivals),
            )
        case S.ClockElim(name, n, params, motive, cases, arg):
            return S.ClockElim(
                name, n,
                tuple(go(sigma, p) for p in params),
                go(push_binder(sigma, EVar(S.U(0))), motive),
                tuple(_subst_case(sigma, c) for c in cases),
                go(sigma, arg),
            )
        case S.System(parts):
            return S.System(tuple(
                (subst_face(sigma, phi), go(sigma, u)) for phi, u in parts
            ))
    raise MalformedSubstitution(f"not a term: {t!r}")


def _subst_case(sigma, case):
    from .syntax import ElimCase, U as Univ
    inner = sigma
    for _ in range(case.n_args + 2 * case.n_recs):
        inner = push_binder(inner, EVar(Univ(0)))
    for _ in range(case.n_ivars):
        inner = push_binder(inner, EIVar())
    return ElimCase(case.label, case.n_args, case.n_recs, case.n_ivars,
                    subst_apply(inner, case.body))


def _subst_tick_app(sigma, fn, tick):
    """The A.2 case analysis for (fn [tick]) under sigma."""
    new_tick = subst_tick(sigma, tick)
    leftmost = _leftmost_tick_var(tick)
    if leftmost is None:
        # No tick variables: only possible transiently for ill-scoped input.
        return TickApp(subst_apply(sigma, fn), new_tick)
    pos, comp = sigma.component(TICK, leftmost)
    if isinstance(comp, CTick):
        return TickApp(subst_apply(sigma, fn), new_tick)
    # Paired clock-and-forcing-tick component: the simple application turns
    # into a forcing application binding a fresh clock for the substituted
    # clock entry.
    shifted = [_comp_shift(c, [CLOCK]) for c in sigma.comps]
    shifted[pos - 1] = CClock(0)
    shifted[pos] = CTick(TickVar(0))  # unused: fn cannot mention the tick
    inner = Substitution(sigma.dom.push(EClock()), sigma.cod, tuple(shifted))
    return ForceApp(subst_apply(inner, fn), comp.clock, new_tick)


# --------------------------------------------------------------------------
# Residual operations on substitutions (Operations 1 and 2)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Simple:
    context: Context
    subst: Substitution


@dataclass(frozen=True)
class Forced:
    context: Context
    subst: Substitution  # valid under context, kappa'' : clock


def restrict_subst(sigma, cod_mask, dom_mask, extra_dom=()):
    """Restrict sigma to the masked cod, strengthening payloads into the
    masked dom (optionally extended by fresh entries)."""
    new_dom = apply_mask(sigma.dom, dom_mask)
    for e in extra_dom:
        new_dom = new_dom.push(e)
    ren = mask_renaming(sigma.dom, dom_mask)
    extra_sorts = [entry_sort(e) for e in extra_dom]

    def conv(comp):
        match comp:
            case CTerm(t):
                from .syntax import weaken
                return CTerm(weaken(rename_term(t, ren), extra_sorts))
            case CClock(k):
                kk = ren.apply(CLOCK, k, ZERO_DEPTH)
                return CClock(kk + sum(1 for s in extra_sorts if s == CLOCK))
            case CTick(u):
                from .syntax import weaken_tick
                return CTick(weaken_tick(rename_tick(u, ren, ZERO_DEPTH),
                                         extra_sorts))
            case CForcedTick(k, u):
                from .syntax import weaken_tick
                kk = ren.apply(CLOCK, k, ZERO_DEPTH)
                return CForcedTick(
                    kk + sum(1 for s in extra_sorts if s == CLOCK),
                    weaken_tick(rename_tick(u, ren, ZERO_DEPTH), extra_sorts),
                )
            case CIVal(r):
                return CIVal(rename_iexpr(r, ren, ZERO_DEPTH))
            case CFace():
                return comp
        raise MalformedSubstitution(repr(comp))

    comps = tuple(
        conv(c) for c, keep in zip(sigma.comps, cod_mask) if keep
    )
    # Kept cod entries need their payloads restricted too.
    kept = []
    prefix = Context(())
    for entry, keep in zip(sigma.cod.entries, cod_mask):
        if keep:
            kept.append(entry)
    new_cod = apply_mask(sigma.cod, cod_mask)
    return Substitution(new_dom, new_cod, comps)


def residual(sigma, u, clock):
    """Operation 1: the residual data of sigma against a simple tick u on
    `clock` (clock index in sigma.cod)."""
    cod_mask = _tick_mask(sigma.cod, u, clock, forcing=False)
    leftmost = _leftmost_tick_var(u)
    pos, comp = sigma.component(TICK, leftmost)
    new_tick = subst_tick(sigma, u)
    if isinstance(comp, CTick):
        _, kcomp = sigma.component(CLOCK, clock)
        dom_mask = _tick_mask(sigma.dom, new_tick, kcomp.clock, forcing=False)
        return Simple(apply_mask(sigma.dom, dom_mask),
                      restrict_subst(sigma, cod_mask, dom_mask))
    # Forced: the fresh clock kappa'' replaces the substituted clock pair.
    kprime = comp.clock
    dom_mask = _tick_mask(sigma.dom, new_tick, kprime, forcing=True)
    sub = restrict_subst(sigma, cod_mask, dom_mask, extra_dom=(EClock(),))
    # Remap the paired clock component (if it survives the cod mask) to the
    # fresh innermost clock.
    comps = list(sub.comps)
    kept_before = sum(1 for k in cod_mask[:pos - 1] if k)
    if cod_mask[pos - 1]:
        comps[kept_before] = CClock(0)
    return Forced(apply_mask(sigma.dom, dom_mask),
                  Substitution(sub.dom, sub.cod, tuple(comps)))


def bresidual(sigma, clock, u):
    """Operation 2: residual data for a forcing tick (clock, u)."""
    cod_mask = _tick_mask(sigma.cod, u, clock, forcing=True)
    new_tick = subst_tick(sigma, u)
    _, kcomp = sigma.component(CLOCK, clock)
    if not _tick_vars(new_tick):
        dom_mask = [True] * len(sigma.dom.entries)
    else:
        dom_mask = _tick_mask(sigma.dom, new_tick, kcomp.clock, forcing=True)
    return (apply_mask(sigma.dom, dom_mask),
            restrict_subst(sigma, cod_mask, dom_mask))
