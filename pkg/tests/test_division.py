import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conecf import (
    ConeElement,
    ConeMembershipError,
    SymMatrix,
    TriangularFactor,
    cholesky,
    cone,
    identity,
    in_cone,
    inner,
    inverse,
    pi_apply,
    pi_signed_apply,
    quad_div,
    quad_rep_apply,
    rel_residual,
)
from conecf.jordan import ASSERT_TOL, _jacobi

from helpers import make_spd, make_sym

few = settings(max_examples=30, deadline=None, derandomize=True)


def sym(rows):
    return SymMatrix(np.array(rows, dtype=float))


class TestCholesky:
    def test_identity(self):
        assert np.array_equal(cholesky(identity(3)).mat, np.eye(3))

    def test_scalar_sqrt(self):
        assert cholesky(cone(sym([[9.0]]))).mat[0, 0] == 3.0

    def test_two_by_two_by_hand(self):
        # l = [[2,0],[1,2]] reproduces [[4,2],[2,5]]
        l = cholesky(cone(sym([[4, 2], [2, 5]])))
        assert np.allclose(l.mat, [[2, 0], [1, 2]], atol=1e-14)

    def test_factor_reproduces_element(self, rng):
        for r in (1, 2, 3, 4):
            y = make_spd(r, rng)
            l = cholesky(y)
            assert rel_residual(l.apply_to_identity(), y.m) < 1e-10

    def test_miscertified_input_raises(self):
        fake = ConeElement(sym([[1, 0], [0, -1]]), min_eig=0.5)
        with pytest.raises(ConeMembershipError, match="pivot"):
            cholesky(fake)


class TestTriangularFactor:
    def test_rejects_upper_entries(self):
        with pytest.raises(ValueError, match="above the diagonal"):
            TriangularFactor(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_rejects_nonpositive_diagonal(self):
        with pytest.raises(ValueError, match="strictly positive"):
            TriangularFactor(np.array([[1.0, 0.0], [1.0, 0.0]]))


class TestPiApply:
    def test_identity_factor_all_modes(self, rng):
        x = make_sym(3, rng)
        for mode in ("plain", "star", "inv", "star_inv"):
            assert np.allclose(pi_apply(identity(3), x, mode).mat, x.mat, atol=0)

    def test_scalar_modes(self):
        y = cone(sym([[4.0]]))
        x = sym([[3.0]])
        assert pi_apply(y, x, "plain").mat[0, 0] == pytest.approx(12.0, abs=1e-15)
        assert pi_apply(y, x, "star_inv").mat[0, 0] == pytest.approx(0.75, abs=1e-15)

    def test_plain_on_identity_reproduces_element(self):
        y = cone(sym([[4, 2], [2, 5]]))
        assert rel_residual(pi_apply(y, identity(2).m, "plain"), y.m) < 1e-14

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            pi_apply(identity(2), identity(2).m, "sideways")

    def test_prefactored_path_matches(self, rng):
        y = make_spd(3, rng)
        x = make_sym(3, rng)
        l = cholesky(y)
        for mode in ("plain", "star", "inv", "star_inv"):
            assert np.array_equal(pi_apply(y, x, mode).mat, pi_apply(l, x, mode).mat)

    @few
    @given(st.integers(0, 10**6), st.integers(1, 4))
    def test_inv_round_trip(self, seed, r):
        g = np.random.default_rng(seed)
        y, x = make_spd(r, g), make_sym(r, g)
        back = pi_apply(y, pi_apply(y, x, "plain"), "inv")
        assert rel_residual(back, x) < 1e-10
        back = pi_apply(y, pi_apply(y, x, "star_inv"), "star")
        assert rel_residual(back, x) < 1e-10

    @few
    @given(st.integers(0, 10**6), st.integers(1, 4))
    def test_adjoint_pairing(self, seed, r):
        g = np.random.default_rng(seed)
        y, x, z = make_spd(r, g), make_sym(r, g), make_sym(r, g)
        lhs = inner(pi_apply(y, x, "plain"), z)
        rhs = inner(x, pi_apply(y, z, "star"))
        assert abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))

    @few
    @given(st.integers(0, 10**6), st.integers(1, 4))
    def test_cone_preserved(self, seed, r):
        g = np.random.default_rng(seed)
        y, x = make_spd(r, g), make_spd(r, g)
        for mode in ("plain", "star", "inv", "star_inv"):
            assert in_cone(pi_apply(y, x.m, mode)) is not None

    def test_normalizations(self, rng):
        for r in (1, 2, 3):
            y = make_spd(r, rng)
            assert rel_residual(pi_apply(y, y.m, "inv"), identity(r).m) < 1e-10
            assert rel_residual(pi_apply(y, inverse(y).m, "star"), identity(r).m) < 1e-10


class TestFactorizationIdentities:
    @few
    @given(st.integers(0, 10**6), st.integers(1, 4))
    def test_quad_equals_mult_times_adjoint(self, seed, r):
        g = np.random.default_rng(seed)
        y, x = make_spd(r, g), make_sym(r, g)
        lhs = pi_apply(y, pi_apply(y, x, "star"), "plain")
        assert rel_residual(lhs, quad_rep_apply(y.m, x)) < 1e-10

    @few
    @given(st.integers(0, 10**6), st.integers(1, 4))
    def test_inverse_swap(self, seed, r):
        g = np.random.default_rng(seed)
        u, v = make_spd(r, g), make_spd(r, g)
        lhs = pi_apply(u, inverse(v).m, "inv")
        rhs = inverse(cone(pi_apply(u, v.m, "star")))
        assert rel_residual(lhs, rhs.m) < 1e-10

    @few
    @given(st.integers(0, 10**6), st.integers(1, 3))
    def test_shifted_maps_expand_eigenvalues(self, seed, r):
        # congruence by a factor of e+z (z in the cone) has singular values
        # above one, so every eigenvalue strictly increases
        g = np.random.default_rng(seed)
        z, v = make_spd(r, g), make_spd(r, g)
        shifted = cone(SymMatrix(np.eye(r) + z.mat))
        base = np.sort(np.linalg.eigvalsh(v.mat))
        for mode in ("plain", "star"):
            lifted = np.sort(np.linalg.eigvalsh(pi_apply(shifted, v.m, mode).mat))
            assert (lifted >= base * (1 - ASSERT_TOL)).all()
        lifted = np.sort(np.linalg.eigvalsh(quad_rep_apply(shifted.m, v.m).mat))
        assert (lifted >= base * (1 - ASSERT_TOL)).all()

    @pytest.mark.xfail(
        reason="false at rank >= 2: maps by e+z increase every eigenvalue but do "
        "not dominate in the cone order (eigenvectors rotate); verified by "
        "high-precision counterexamples",
        strict=False,
    )
    def test_shifted_maps_expand_in_cone_order(self, rng):
        for trial in range(300):
            r = 2 + trial % 2
            z, v = make_spd(r, rng), make_spd(r, rng)
            shifted = cone(SymMatrix(np.eye(r) + z.mat))
            for mode in ("plain", "star"):
                d = pi_apply(shifted, v.m, mode).mat - v.mat
                w, _ = _jacobi(d)
                assert w.min() > -ASSERT_TOL * (1 + np.sqrt((d * d).sum()))
            d = quad_rep_apply(shifted.m, v.m).mat - v.mat
            w, _ = _jacobi(d)
            assert w.min() > -ASSERT_TOL * (1 + np.sqrt((d * d).sum()))


class TestPiSigned:
    def test_negated_identity(self, rng):
        x = make_sym(2, rng)
        got = pi_signed_apply(SymMatrix(-np.eye(2)), x, "plain")
        assert np.allclose(got.mat, -x.mat, atol=0)

    def test_scalar(self):
        got = pi_signed_apply(sym([[-4.0]]), sym([[3.0]]), "plain")
        assert got.mat[0, 0] == pytest.approx(-12.0, abs=1e-15)

    def test_negated_dense(self):
        y = sym([[4, 2], [2, 5]])
        got = pi_signed_apply(SymMatrix(-y.mat), identity(2).m, "plain")
        assert rel_residual(SymMatrix(-got.mat), y) < 1e-14

    def test_indefinite_rejected(self):
        with pytest.raises(ConeMembershipError, match="negation"):
            pi_signed_apply(sym([[1, 0], [0, -1]]), identity(2).m, "plain")


class TestQuadDiv:
    def test_self_quotient_is_identity(self, rng):
        for r in (1, 2, 3):
            y = make_spd(r, rng)
            assert rel_residual(quad_div(y, y.m), identity(r).m) < 1e-10

    def test_scalar(self):
        assert quad_div(cone(sym([[4.0]])), sym([[8.0]])).mat[0, 0] == pytest.approx(2.0, rel=1e-14)

    def test_identity_numerator_gives_inverse(self):
        y = cone(sym([[2, 1], [1, 2]]))
        expected = np.array([[2, -1], [-1, 2]]) / 3.0
        assert np.allclose(quad_div(y, identity(2).m).mat, expected, atol=1e-12)
