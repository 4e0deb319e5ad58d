import pytest
from hypothesis import given, strategies as st

from cctt.interval import (
    F0, F1, FAnd, FEq, FOr, FBOT, FTOP,
    I0, I1, IJoin, IMeet, INeg, IVar, IZERO, IONE,
    face_clauses, face_dnf, face_entails, face_equal, face_is_false,
    face_is_true, face_normalize, face_of_equation, face_substitute,
    iv_equal, iv_is_one, iv_is_zero, iv_normalize,
)
from oracles import dm4_equal, face_entails_oracle, face_equal_oracle

i, j, k = IVar(0), IVar(1), IVar(2)


def ivexprs(max_vars=3):
    leaves = st.sampled_from([IZERO, IONE] + [IVar(n) for n in range(max_vars)])
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            sub.map(INeg),
            st.tuples(sub, sub).map(lambda p: IMeet(*p)),
            st.tuples(sub, sub).map(lambda p: IJoin(*p)),
        ),
        max_leaves=12,
    )


def faces(max_vars=3):
    gens = [FEq(n, b) for n in range(max_vars) for b in (0, 1)]
    leaves = st.sampled_from([FBOT, FTOP] + gens)
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.tuples(sub, sub).map(lambda p: FAnd(*p)),
            st.tuples(sub, sub).map(lambda p: FOr(*p)),
        ),
        max_leaves=12,
    )


class TestIntervalNormalize:
    def test_involution(self):
        assert iv_normalize(INeg(INeg(i))) == i

    def test_units(self):
        assert iv_normalize(IMeet(i, IONE)) == i
        assert iv_normalize(IJoin(i, IZERO)) == i
        assert iv_normalize(IMeet(i, IZERO)) == IZERO
        assert iv_normalize(IJoin(i, IONE)) == IONE

    def test_distribution_agrees(self):
        lhs = IMeet(IJoin(i, j), INeg(i))
        rhs = IJoin(IMeet(j, INeg(i)), IMeet(i, INeg(i)))
        assert iv_normalize(lhs) == iv_normalize(rhs)

    def test_de_morgan_law(self):
        assert iv_equal(INeg(IMeet(i, j)), IJoin(INeg(i), INeg(j)))

    def test_meet_with_reversal_not_zero(self):
        # The interval is not a Boolean algebra.
        assert not iv_equal(IMeet(i, INeg(i)), IZERO)
        assert not iv_equal(IJoin(i, INeg(i)), IONE)

    def test_absorption(self):
        assert iv_equal(IJoin(i, IMeet(i, j)), i)
        assert iv_equal(IMeet(i, IJoin(i, j)), i)

    @given(ivexprs())
    def test_idempotent(self, r):
        assert iv_normalize(iv_normalize(r)) == iv_normalize(r)

    @given(ivexprs())
    def test_normal_form_is_equal(self, r):
        assert dm4_equal(r, iv_normalize(r))

    @given(ivexprs(), ivexprs())
    def test_agrees_with_dm4_oracle(self, r, s):
        assert iv_equal(r, s) == dm4_equal(r, s)

    def test_commutativity(self):
        assert iv_equal(IMeet(i, j), IMeet(j, i))
        assert iv_equal(IJoin(i, j), IJoin(j, i))

    def test_zero_one_detection(self):
        assert iv_is_zero(IMeet(IZERO, i))
        assert iv_is_one(IJoin(IONE, i))
        assert not iv_is_zero(IMeet(i, INeg(i)))


class TestFaceNormalize:
    def test_contradictory_generators(self):
        assert face_is_false(FAnd(FEq(0, 0), FEq(0, 1)))

    def test_lattice_units(self):
        phi = FOr(FEq(0, 0), FEq(1, 1))
        assert face_normalize(FOr(phi, FBOT)) == face_normalize(phi)
        assert face_normalize(FAnd(phi, FTOP)) == face_normalize(phi)

    def test_absorption(self):
        phi = FAnd(FOr(FEq(0, 0), FEq(1, 1)), FEq(0, 0))
        assert face_normalize(phi) == FEq(0, 0)

    @given(faces())
    def test_idempotent(self, phi):
        assert face_normalize(face_normalize(phi)) == face_normalize(phi)

    @given(faces(), faces())
    def test_equal_agrees_with_oracle(self, phi, psi):
        assert face_equal(phi, psi) == face_equal_oracle(phi, psi)

    def test_clauses_are_consistent(self):
        phi = FOr(FAnd(FEq(0, 0), FEq(0, 1)), FEq(1, 0))
        assert face_clauses(phi) == [{1: 0}]


class TestFaceEntails:
    def test_conjunction_elimination(self):
        assert face_entails(FAnd(FEq(0, 0), FEq(1, 1)), FEq(0, 0))

    def test_bottom_entails_everything(self):
        assert face_entails(FBOT, FEq(2, 0))

    def test_disjunction_does_not_entail_fresh(self):
        assert not face_entails(FOr(FEq(0, 0), FEq(0, 1)), FEq(1, 0))

    @given(faces(), faces())
    def test_agrees_with_valuation_oracle(self, phi, psi):
        assert face_entails(phi, psi) == face_entails_oracle(phi, psi)


class TestFaceOfEquation:
    def test_involution_clause(self):
        assert face_of_equation(INeg(j), 1) == FEq(1, 0)

    def test_meet_at_one(self):
        got = face_dnf(face_of_equation(IMeet(i, j), 1))
        assert got == face_dnf(FAnd(FEq(0, 1), FEq(1, 1)))

    def test_constant_mismatch(self):
        assert face_of_equation(IZERO, 1) == FBOT
        assert face_of_equation(IZERO, 0) == FTOP

    @given(ivexprs(), st.sampled_from([0, 1]))
    def test_agrees_with_endpoint_valuations(self, r, b):
        # For 0/1 valuations, r evaluates to b iff the face holds.
        from itertools import product as iproduct
        from oracles import dm4_eval, face_eval
        from cctt.interval import iv_vars, face_vars
        phi = face_of_equation(r, b)
        vs = sorted(iv_vars(r) | face_vars(phi))
        const = {0: (0, 0), 1: (1, 1)}
        for bits in iproduct((0, 1), repeat=len(vs)):
            val = dict(zip(vs, bits))
            env = {v: const[x] for v, x in val.items()}
            assert (dm4_eval(r, env) == const[b]) == face_eval(phi, val)


class TestFaceSubstitute:
    def test_endpoint_substitution(self):
        assert face_is_true(face_substitute(FEq(0, 0), {0: IZERO}))
        got = face_substitute(FOr(FEq(0, 0), FEq(1, 1)), {0: IONE})
        assert got == FEq(1, 1)

    def test_join_substitution(self):
        got = face_substitute(FEq(0, 1), {0: IJoin(j, k)})
        assert face_equal(got, FOr(FEq(1, 1), FEq(2, 1)))

    @given(faces())
    def test_commutes_with_normalize(self, phi):
        sub = {0: IMeet(IVar(3), IVar(4)), 1: INeg(IVar(3)), 2: IONE}
        assert face_substitute(phi, sub) == face_substitute(face_normalize(phi), sub)

    def test_identity_substitution(self):
        phi = FOr(FAnd(FEq(0, 0), FEq(1, 1)), FEq(2, 0))
        assert face_substitute(phi, {}) == face_normalize(phi)
