import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from torsionlab import model as mdl
from torsionlab.fixtures import FixtureSpec, gen_complex, toy_complex


def highest_weight(d, p):
    """Highest weight of Lambda^p for so(d-1) by maximizing a generic dominant functional."""
    n = (d - 1) // 2
    std = [v * s for v in np.eye(n) for s in (1, -1)]
    functional = np.array([10.0 ** (n - i) + 0.5 for i in range(n)])
    best = np.zeros(n)
    for sub in itertools.combinations(range(len(std)), p):
        w = np.sum([std[i] for i in sub], axis=0) if sub else np.zeros(n)
        if w @ functional > best @ functional:
            best = w
    return best


def half_root_sum(d):
    n = (d - 1) // 2
    e = np.eye(n)
    roots = [e[i] + s * e[j] for i in range(n) for j in range(i + 1, n) for s in (1, -1)]
    return 0.5 * np.sum(roots, axis=0) if roots else np.zeros(n)


class TestWeights:
    def test_c_sigma_examples(self):
        assert mdl.c_sigma([0.0], [0.0], 1.0) == -1
        assert mdl.c_sigma([1.0], [0.0], 1.0) == 0
        assert mdl.c_sigma([1.0, 1.0], [1.0, 0.0], 2.0) == -4 - 1 + 4 + 1
        with pytest.raises(mdl.ModelError):
            mdl.c_sigma([1.0], [1.0, 0.0], 1.0)

    @pytest.mark.parametrize("d", [3, 5, 7, 9])
    def test_weights_against_enumeration(self, d):
        assert np.array_equal(mdl.rho_m(d), half_root_sum(d))
        for p in range(d):
            assert np.array_equal(mdl.sigma_p_weight(d, p), highest_weight(d, p))

    @pytest.mark.parametrize("d", [3, 5, 7, 9])
    def test_c_sigma_p_closed_form(self, d):
        # -|rho|^2 + p (d - 1 - p) = -(|rho| - p)^2
        rho = (d - 1) / 2
        for p in range(d):
            assert mdl.c_sigma_p(d, p) == pytest.approx(-((rho - p) ** 2))

    def test_weight_range(self):
        with pytest.raises(mdl.ModelError):
            mdl.sigma_p_weight(3, 3)

    def test_vol_sphere(self):
        assert mdl.vol_sphere(1) == pytest.approx(2 * math.pi)
        assert mdl.vol_sphere(2) == pytest.approx(4 * math.pi)
        assert mdl.vol_sphere(3) == pytest.approx(2 * math.pi**2)


class TestModelData:
    def test_d_chi_from_zero_counts(self):
        m = mdl.ModelSpectralData(3, ([0, 1], [2], [0, 0, 3], []))
        assert m.d_chi == (1, 0, 2, 0)

    def test_validation(self):
        with pytest.raises(mdl.ModelError):
            mdl.ModelSpectralData(2, ([1], [1], [1]))
        with pytest.raises(mdl.ModelError):
            mdl.ModelSpectralData(3, ([1], [1]))
        with pytest.raises(mdl.ModelError):
            mdl.ModelSpectralData(1, ([0], [1]), d_chi=(0, 0))


class TestDetFormula:
    def test_empty_lists_volume_factor(self):
        m = mdl.ModelSpectralData(3, ([], [], [], []))
        assert complex(mdl.det_formula_eval(1.0, m)) == pytest.approx(math.exp(4 * math.pi))
        m5 = mdl.ModelSpectralData(5, ([],) * 6, dim_V_chi=2, vol_ratio=0.5)
        # d = 5: sign (-1)^3, exponent -pi * 6 * 2 * 0.5 * s
        assert complex(mdl.det_formula_eval(0.1, m5)) == pytest.approx(math.exp(-0.6 * math.pi))

    def test_single_eigenvalue_forms(self):
        mu, s = 2.0 + 0.5j, 0.3 - 0.2j
        m = mdl.ModelSpectralData(3, ([mu], [], [], []))
        vol = cmath.exp(4 * math.pi * s)
        f = [mu + s * (s + 2 * (1 - p)) for p in range(3)]
        assert complex(mdl.det_formula_eval(s, m, "degree")) == pytest.approx(f[0] * f[1] * f[2] * vol)
        assert complex(mdl.det_formula_eval(s, m, "printed")) == pytest.approx(f[0] / f[1] * f[2] * vol)

    def test_exponent_forms_differ_in_degree_one(self):
        m = mdl.ModelSpectralData(3, ([], [3.0], [], []))
        s = 0.4
        f = [3.0 + s * (s + 2 * (1 - p)) for p in range(1, 3)]
        assert complex(mdl.det_formula_eval(s, m, "degree")) == pytest.approx(1 / (f[0] * f[1]) * math.exp(4 * math.pi * s))
        assert complex(mdl.det_formula_eval(s, m, "printed")) == pytest.approx(f[1] / f[0] * math.exp(4 * math.pi * s))

    def test_bad_exponent(self):
        with pytest.raises(mdl.ModelError):
            mdl.det_formula_eval(0.0, mdl.ModelSpectralData(1, ([1], [1])), exponent="other")

    def test_vanishing_factor_order(self):
        m = mdl.ModelSpectralData(3, ([-3.0, 2.0], [], [], []))
        v = mdl.det_formula_eval(1.0, m)
        # -3 + 1 * (1 + 2) = 0 at p = 0
        assert v.order == 1 and complex(v) == 0
        assert v.value != 0
        m1 = mdl.ModelSpectralData(3, ([], [-1.0], [], []))
        assert complex(mdl.det_formula_eval(1.0, m1)) == complex(math.inf, 0)

    @pytest.mark.parametrize("seed", range(3))
    def test_value_at_zero_is_ruelle_zero(self, seed):
        rng = np.random.default_rng(seed)
        eigs = [rng.uniform(0.5, 3, 3) + 1j * rng.uniform(-1, 1, 3) for _ in range(6)]
        m = mdl.ModelSpectralData(5, tuple(eigs))
        assert complex(mdl.det_formula_eval(0.0, m)) == pytest.approx(mdl.ruelle_at_zero_model(m).lower_form, rel=1e-12)


class TestRuelleAtZero:
    @pytest.mark.parametrize("a", [2.0, 0.5 + 1j])
    def test_toy(self, a):
        m = mdl.model_from_complex(toy_complex(a))
        r = mdl.ruelle_at_zero_model(m)
        assert r.value == pytest.approx(a * a) and r.upper_form == pytest.approx(a * a)
        assert mdl.ruelle_at_zero_model(mdl.model_from_complex(toy_complex(2.0))).value == 4

    def test_trivial(self):
        assert mdl.ruelle_at_zero_model(mdl.ModelSpectralData(3, ([], [], [], []))).value == 1

    @given(st.integers(0, 10_000), st.sampled_from([1, 3, 5, 7]))
    def test_duality_symmetric_forms_agree(self, seed, d):
        rng = np.random.default_rng(seed)
        half = [rng.uniform(0.3, 2, 2) * np.exp(1j * rng.uniform(-3, 3, 2)) for _ in range((d + 1) // 2)]
        m = mdl.ModelSpectralData(d, tuple(half + half[::-1]))
        assert mdl.is_duality_symmetric(m)
        r = mdl.ruelle_at_zero_model(m)
        assert r.discrepancy < 1e-12

    def test_asymmetric_forms_differ(self):
        m = mdl.ModelSpectralData(1, ([2.0], [3.0]))
        r = mdl.ruelle_at_zero_model(m)
        assert not mdl.is_duality_symmetric(m)
        assert r.lower_form == 2 and r.upper_form == 3

    def test_kernel_raises(self):
        with pytest.raises(mdl.ModelError, match="singularity_order"):
            mdl.ruelle_at_zero_model(mdl.ModelSpectralData(3, ([0.0], [], [], [])))

    def test_exponent_forms(self):
        lo, up = mdl.exponent_forms([1.0, 2.0, 2.0, 1.0], 3)
        assert lo == 3 * 1 - 2 * 2 + 2 and up == 2 - 2 * 2 + 3 * 1


class TestSingularityOrder:
    @pytest.mark.parametrize("d,dchi,want", [
        (3, (0, 0), 0), (3, (1, 0), 4), (3, (0, 1), -2), (3, (1, 2), 0),
        (5, (1, 0, 0), 6), (5, (0, 1, 0), -4), (5, (0, 0, 1), 2), (1, (3,), 6),
        (3, (1, 0, 0, 1), 4),
    ])
    def test_values(self, d, dchi, want):
        assert mdl.singularity_order(d, dchi) == want

    def test_short_input(self):
        with pytest.raises(mdl.ModelError):
            mdl.singularity_order(5, (1, 0))


class TestBridge:
    def test_toy(self):
        rep = mdl.torsion_bridge(toy_complex(2.0))
        assert rep.ruelle_zero == 4 and rep.cappell_miller == 4 and rep.rel_err == 0
        assert rep.comparison_nu == 2

    @pytest.mark.parametrize("kind,d,seed", [
        ("random-acyclic-complex", 3, 0),
        ("random-acyclic-complex", 5, 1),
        ("hermitian-model-complex", 3, 2),
    ])
    def test_fixtures(self, kind, d, seed):
        rep = mdl.torsion_bridge(gen_complex(FixtureSpec(kind, d=d, seed=seed)))
        assert rep.rel_err < 1e-9
        assert rep.modulus_xi_rel_err < 1e-9
        assert rep.comparison_residual < 1e-8
