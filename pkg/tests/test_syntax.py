from cctt.interval import FEq, IMeet, INeg, IVar, IZERO
from cctt.syntax import (
    App, CLOCK, Context, EClock, EFace, EIVar, ETick, EVar, IVAL, Lam,
    Later, PApp, PLam, Pi, TERM, TICK, TickApp, TickLam, TickVar, U, Var,
    structural_equal, weaken,
)

i0 = IVar(0)


def test_weaken_shifts_only_matching_sort():
    t = App(Var(1), PApp(Var(0), IVar(0)))
    assert weaken(t, [TERM]) == App(Var(2), PApp(Var(1), IVar(0)))
    assert weaken(t, [IVAL]) == App(Var(1), PApp(Var(0), IVar(1)))
    assert weaken(t, [CLOCK]) == t


def test_weaken_respects_binders():
    t = Lam(App(Var(0), Var(1)))
    assert weaken(t, [TERM]) == Lam(App(Var(0), Var(2)))


def test_weaken_cut_keeps_inner_entries():
    # One interval variable sits between the term and the insertion point.
    t = PApp(Var(0), IMeet(IVar(0), IVar(1)))
    got = weaken(t, [IVAL], cut={IVAL: 1})
    assert got == PApp(Var(0), IMeet(IVar(0), IVar(2)))


def test_weaken_tick_binders():
    t = TickLam(0, TickApp(Var(0), TickVar(1)))
    assert weaken(t, [TICK]) == TickLam(0, TickApp(Var(0), TickVar(2)))
    assert weaken(t, [CLOCK]) == TickLam(1, TickApp(Var(0), TickVar(1)))


def test_structural_equal_normalizes_interval_leaves():
    assert structural_equal(PApp(Var(0), INeg(INeg(i0))),
                            PApp(Var(0), i0))
    assert not structural_equal(PApp(Var(0), IMeet(i0, INeg(i0))),
                                PApp(Var(0), IZERO))


def test_structural_equal_is_syntactic_on_binders():
    assert structural_equal(Lam(Var(0)), Lam(Var(0)))
    assert not structural_equal(Lam(Var(0)), Lam(Var(1)))


def test_context_positions_and_types():
    ctx = Context((
        EClock(),
        EVar(U(0)),
        ETick(0),
        EIVar(),
        EVar(Pi(U(0), U(0))),
    ))
    assert ctx.count(TERM) == 2
    assert ctx.count(CLOCK) == 1
    assert ctx.term_type(0) == Pi(U(0), U(0))
    assert ctx.term_type(1) == U(0)
    assert ctx.tick_clock(0) == 0


def test_tick_clock_counts_intervening_clocks():
    ctx = Context((EClock(), ETick(0), EClock(), ETick(0)))
    # The outer tick's clock gains an index for the clock bound after it.
    assert ctx.tick_clock(1) == 1
    assert ctx.tick_clock(0) == 0


def test_term_type_weakens_by_suffix():
    ctx = Context((EVar(U(0)), EVar(Var(0)), EVar(Var(1))))
    # Each entry's payload is shifted past the entries after it.
    assert ctx.term_type(0) == Var(2)
    assert ctx.term_type(1) == Var(2)


def test_restriction_faces_shift_to_full_context():
    ctx = Context((EIVar(), EFace(FEq(0, 1)), EIVar()))
    assert ctx.restriction_faces() == [FEq(1, 1)]


def test_later_and_ticklam_store_prefix_relative_clock():
    t = Later(0, TickApp(Var(0), TickVar(0)))
    got = weaken(t, [CLOCK])
    assert got == Later(1, TickApp(Var(0), TickVar(0)))
