import cmath
import math

import numpy as np
import pytest

from torsionlab import spectral as sc
from torsionlab import torsion as tor
from torsionlab.complexes import ComplexError, GradedComplex, laplacian_blocks, spectral_split, zero_complex
from torsionlab.detline import default_frame, refined_torsion
from torsionlab.fixtures import FixtureSpec, gen_complex, toy_complex


def fixture(kind, d, seed, **kw):
    return gen_complex(FixtureSpec(kind, d=d, seed=seed, **kw))


FIXTURES = [
    ("random-acyclic-complex", 3, 0),
    ("random-acyclic-complex", 5, 1),
    ("hermitian-model-complex", 3, 2),
    ("hermitian-model-complex", 5, 3),
]


def literal_log(z, theta):
    """log with arg in (theta, theta + 2 pi), computed from np.angle."""
    a = float(np.angle(z))
    while a <= theta:
        a += 2 * math.pi
    while a > theta + 2 * math.pi:
        a -= 2 * math.pi
    return complex(math.log(abs(z)), a)


class TestValidate:
    def test_toy(self):
        rep = tor.validate(toy_complex(2.0))
        assert rep.assumption1 and rep.assumption2 and rep.d_squared_zero and rep.chirality_involution
        assert rep.min_singular_B == pytest.approx(2.0)

    def test_zero_differential_violates_both(self):
        one = np.ones((1, 1))
        cx = GradedComplex(1, (1, 1), (0 * one,), (one, one))
        rep = tor.validate(cx)
        assert not rep.assumption1 and not rep.assumption2
        assert np.allclose(tor.odd_signature(cx).B, 0)

    def test_not_a_complex(self):
        one = np.ones((1, 1))
        cx = GradedComplex(3, (1, 1, 1, 1), (one, one, one), (one,) * 4)
        assert not tor.validate(cx).d_squared_zero

    @pytest.mark.parametrize("kind,d,seed", FIXTURES)
    def test_fixtures_and_rank_oracle(self, kind, d, seed):
        cx = fixture(kind, d, seed)
        rep = tor.validate(cx)
        assert rep.assumption1 and rep.assumption2
        ranks = [np.linalg.matrix_rank(p) for p in cx.partial]
        assert tuple(ranks) == cx.ranks()
        assert all(ranks[j - 1] + ranks[j] == cx.dims[j] for j in range(1, d))

    def test_requires_chirality(self):
        one = np.ones((1, 1))
        with pytest.raises(ComplexError):
            tor.validate(GradedComplex(1, (1, 1), (one,)))


class TestOddSignature:
    def test_toy_blocks(self):
        osig = tor.odd_signature(toy_complex(3.0))
        assert np.allclose(osig.B, 3 * np.eye(2))
        assert np.allclose(osig.B_ev, [[3]])
        assert [L.tolist() for L in osig.B_sq_per_degree] == [[[9]], [[9]]]

    @pytest.mark.parametrize("kind,d,seed", FIXTURES)
    def test_square_is_flat_laplacian(self, kind, d, seed):
        cx = fixture(kind, d, seed)
        B = tor.odd_signature(cx).B
        assert np.allclose(B @ B, tor.flat_laplacian(cx), atol=1e-10 * np.linalg.norm(B) ** 2)

    @pytest.mark.parametrize("kind,d,seed", FIXTURES)
    def test_square_commutes(self, kind, d, seed):
        cx = fixture(kind, d, seed)
        B2 = tor.flat_laplacian(cx)
        tol = 1e-10 * np.linalg.norm(B2) * max(np.linalg.norm(cx.D), np.linalg.norm(cx.G))
        assert np.linalg.norm(B2 @ cx.D - cx.D @ B2) < tol
        assert np.linalg.norm(B2 @ cx.G - cx.G @ B2) < tol

    def test_hermitian_fixture_real_spectrum(self):
        cx = fixture("hermitian-model-complex", 3, 0, eps=0.0)
        B = tor.odd_signature(cx).B
        assert np.allclose(B, B.conj().T)
        assert np.max(np.abs(np.linalg.eigvals(B).imag)) < 1e-10


class TestPMSplit:
    def test_toy(self):
        split = tor.pm_split(tor.odd_signature(toy_complex(2.0)))
        assert split.dims_plus == (1,) and split.dims_minus == (0,)
        assert np.allclose(split.B_plus, [[2]])

    @pytest.mark.parametrize("kind,d,seed", FIXTURES)
    def test_invariant_and_complementary(self, kind, d, seed):
        cx = fixture(kind, d, seed)
        osig = tor.odd_signature(cx)
        split = tor.pm_split(osig)
        W = np.hstack([split.plus_basis, split.minus_basis])
        assert W.shape[0] == W.shape[1] == np.linalg.matrix_rank(W)
        for V, Bsub in ((split.plus_basis, split.B_plus), (split.minus_basis, split.B_minus)):
            assert np.allclose(osig.B_ev @ V, V @ Bsub, atol=1e-9 * np.linalg.norm(osig.B_ev))


class TestInvariants:
    @pytest.mark.parametrize("a", [2.0, 0.5, 1.5 + 1j])
    def test_toy_values(self, a):
        cx = toy_complex(a)
        osig = tor.odd_signature(cx)
        theta = tor.default_theta(osig)
        assert -math.pi < theta < 0
        assert abs(tor.graded_det_Bev(osig, theta) - a) < 1e-14
        # 2 theta is Agmon for a^2; xi = log_{2 theta}(a^2) / 2
        assert abs(tor.xi(osig, theta) - 0.5 * literal_log(a * a, 2 * theta)) < 1e-14
        assert abs(tor.cappell_miller(cx).value - a * a) < 1e-13
        assert tor.cappell_miller_literal(cx) == pytest.approx(a * a)

    def test_toy_exact(self):
        cx = toy_complex(2.0)
        osig = tor.odd_signature(cx)
        assert tor.xi(osig) == pytest.approx(math.log(2))
        assert tor.eta_Bev(osig).eta == 0.5
        assert tor.refined_T(osig, eta_tr=0.5) == pytest.approx(2j)
        assert tor.cappell_miller(cx).value == 4

    def test_refined_T_prime(self):
        osig = tor.odd_signature(toy_complex(2.0))
        assert tor.refined_T_prime(osig) == pytest.approx(2)
        # an integer change of the integral changes T' by i^rank
        assert tor.refined_T_prime(osig, L_integral=1.0, rank=1) == pytest.approx(2j)
        assert tor.refined_T_prime(osig, L_integral=1.0, rank=2) == pytest.approx(-2)

    @pytest.mark.parametrize("kind,d,seed", FIXTURES)
    def test_graded_det_literal(self, kind, d, seed):
        cx = fixture(kind, d, seed)
        osig = tor.odd_signature(cx)
        theta = tor.default_theta(osig)
        split = tor.pm_split(osig)
        lp = sum(literal_log(z, theta) for z in np.linalg.eigvals(split.B_plus))
        lm = sum(literal_log(-z, theta) for z in np.linalg.eigvals(split.B_minus))
        assert abs(tor.graded_det_Bev(osig, theta) / cmath.exp(lp - lm) - 1) < 1e-10

    @pytest.mark.parametrize("kind,d,seed", FIXTURES)
    def test_xi_modulus_oracle(self, kind, d, seed):
        cx = fixture(kind, d, seed)
        osig = tor.odd_signature(cx)
        blocks = laplacian_blocks(cx)
        oracle = 0.5 * sum((-1) ** (k + 1) * k * math.log(abs(np.linalg.det(L))) for k, L in enumerate(blocks) if k)
        assert tor.xi(osig).real == pytest.approx(oracle, rel=1e-10, abs=1e-10)

    @pytest.mark.parametrize("kind,d,seed", FIXTURES)
    def test_cappell_miller_literal(self, kind, d, seed):
        cx = fixture(kind, d, seed)
        lit = tor.cappell_miller_literal(cx)
        assert abs(tor.cappell_miller(cx).value / lit - 1) < 1e-10

    def test_xi_scaling(self):
        """Scaling d by t > 0 scales B^2 on C^k by t^2 and shifts xi accordingly."""
        cx = fixture("random-acyclic-complex", 3, 7)
        t = 1.7
        base, scaled = tor.odd_signature(cx), tor.odd_signature(cx.scaled(t))
        # only the differential is scaled, so the shift is checked on moduli
        shift = tor.xi(scaled).real - tor.xi(base).real
        oracle = 0.5 * sum(
            (-1) ** (k + 1) * k * (math.log(abs(np.linalg.det(L1))) - math.log(abs(np.linalg.det(L0))))
            for k, (L0, L1) in enumerate(zip(laplacian_blocks(cx), laplacian_blocks(cx.scaled(t))))
            if k
        )
        assert shift == pytest.approx(oracle, rel=1e-10)
        toy = tor.xi(tor.odd_signature(toy_complex(2.0 * t))) - tor.xi(tor.odd_signature(toy_complex(2.0)))
        assert toy == pytest.approx(math.log(t))

    def test_zero_complex(self):
        assert tor.cappell_miller(zero_complex(3)).value == 1


class TestLambda:
    @pytest.mark.parametrize("kind,d,seed", FIXTURES + [("random-complex", 3, 4)])
    def test_cm_independent_of_lambda(self, kind, d, seed):
        cx = fixture(kind, d, seed)
        vals = [tor.cappell_miller(cx, lam).value for lam in tor.spectral_gaps(cx)]
        assert all(abs(v / vals[0] - 1) < 1e-8 for v in vals)

    @pytest.mark.parametrize("kind,d,seed", FIXTURES + [("random-complex", 3, 4), ("random-complex", 5, 5)])
    def test_lambda_split_law(self, kind, d, seed):
        cx = fixture(kind, d, seed)
        frame = default_frame(cx)
        rho = refined_torsion(cx, frame=frame).coeff
        for lam in tor.spectral_gaps(cx):
            g, r = tor.lambda_split(cx, lam, frame)
            assert abs(rho / (g * r) - 1) < 1e-8

    def test_high_part_acyclic(self):
        cx = fixture("random-complex", 3, 4)
        for lam in tor.spectral_gaps(cx):
            low, high = spectral_split(cx, lam)
            if high.complex.total_dim:
                rep = tor.validate(high.complex)
                assert rep.assumption1 and rep.assumption2
            assert low.complex.total_dim + high.complex.total_dim == cx.total_dim

    def test_gaps_count(self):
        assert len(tor.spectral_gaps(toy_complex(2.0))) == 3
        assert tor.spectral_gaps(toy_complex(2.0))[0] == 0.0


class TestAgmonIndependence:
    @pytest.mark.parametrize("kind,d,seed", FIXTURES)
    def test_modulus_and_eta(self, kind, d, seed):
        cx = fixture(kind, d, seed)
        osig = tor.odd_signature(cx)
        thetas = tor.admissible_thetas(osig)
        assert thetas
        mods = [abs(tor.graded_det_Bev(osig, th)) for th in thetas]
        etas = [tor.eta_Bev(osig, th).eta for th in thetas]
        assert max(mods) / min(mods) - 1 < 1e-10
        assert len(set(etas)) == 1


class TestPhase:
    def test_phase_integer(self):
        assert tor.phase_integer(1j) == (1, 0.0)
        assert tor.phase_integer(-3)[0] == 2
        nu, res = tor.phase_integer(cmath.exp(-0.5j * math.pi + 0.01j))
        assert nu == 3 and res == pytest.approx(0.01)

    def test_toy_predictions(self):
        cx = toy_complex(2.0)
        assert tor.predicted_nu(cx) == 1
        assert tor.predicted_nu_comparison(cx) == 2

    @pytest.mark.parametrize("kind,d,seed", FIXTURES)
    def test_rank_formula(self, kind, d, seed):
        cx = fixture(kind, d, seed)
        checks = {c.name: c for c in tor.check_identities(cx)}
        assert checks["detcrucial"].nu == tor.predicted_nu(cx)
        assert checks["comparison"].nu == tor.predicted_nu_comparison(cx)
        for c in checks.values():
            assert c.modulus_rel_err < 1e-8

    def test_report_order(self):
        names = [c.name for c in tor.check_identities(toy_complex(2.0))]
        assert names[:4] == ["detcrucial", "modulus_xi", "comparison", "tau_vs_xi"]
        assert all(n.startswith("lambda_split[") for n in names[4:])
