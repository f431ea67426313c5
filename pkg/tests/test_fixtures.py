import numpy as np
import pytest

from torsionlab import fixtures as fx
from torsionlab import torsion as tor
from torsionlab.fixtures import FixtureError, FixtureSpec, gen_complex, gen_spectrum


class TestComplexes:
    def test_toy(self):
        cx = gen_complex(FixtureSpec("toy-d1", d=1))
        assert cx.dims == (1, 1) and cx.partial[0][0, 0] == 2

    def test_acyclic_requested_dims(self):
        cx = gen_complex(FixtureSpec("random-acyclic-complex", d=3, dims=(1, 2, 2, 1), seed=42))
        rep = tor.validate(cx)
        assert cx.dims == (1, 2, 2, 1) and cx.ranks() == (1, 1, 1)
        assert rep.assumption1 and rep.assumption2 and rep.chirality_involution

    @pytest.mark.parametrize("d", [1, 3, 5, 7])
    @pytest.mark.parametrize("kind", ["random-acyclic-complex", "hermitian-model-complex"])
    def test_valid_for_every_d(self, kind, d):
        for seed in range(3):
            cx = gen_complex(FixtureSpec(kind, d=d, seed=seed))
            rep = tor.validate(cx)
            assert cx.dims == cx.dims[::-1]
            assert rep.assumption1 and rep.assumption2 and rep.d_squared_zero and rep.chirality_involution

    def test_hermitian_undeformed(self):
        cx = gen_complex(FixtureSpec("hermitian-model-complex", d=5, seed=3, eps=0.0))
        for j in range(cx.d + 1):
            assert np.allclose(cx.gamma[j].conj().T @ cx.gamma[j], np.eye(cx.dims[j]))
        # Gamma d Gamma = d^*
        dual = cx.G @ cx.D @ cx.G
        assert np.allclose(dual, cx.D.conj().T)

    def test_random_complex_betti(self):
        cx = gen_complex(FixtureSpec("random-complex", d=3, dims=(2, 3, 3, 2), betti=(1, 0, 0, 1), seed=1))
        assert cx.betti() == (1, 0, 0, 1)
        assert tor.validate(cx).d_squared_zero
        with pytest.raises(FixtureError):
            gen_complex(FixtureSpec("random-complex", d=3, dims=(2, 3, 3, 2), seed=1))
        with pytest.raises(FixtureError):
            gen_complex(FixtureSpec("random-complex", d=3, dims=(2, 3, 3, 2), betti=(1, 0, 0, 0), seed=1))

    def test_deterministic(self):
        a = gen_complex(FixtureSpec("hermitian-model-complex", d=5, seed=11))
        b = gen_complex(FixtureSpec("hermitian-model-complex", d=5, seed=11))
        c = gen_complex(FixtureSpec("hermitian-model-complex", d=5, seed=12))
        assert all(np.array_equal(x, y) for x, y in zip(a.partial, b.partial))
        assert a.dims != c.dims or not all(np.array_equal(x, y) for x, y in zip(a.partial, c.partial))

    def test_redraw_exhaustion(self, monkeypatch):
        calls = []
        monkeypatch.setattr(fx, "_bijective", lambda cx: calls.append(1) and False)
        with pytest.raises(FixtureError, match="singular in"):
            gen_complex(FixtureSpec("random-acyclic-complex", seed=0))
        assert len(calls) == fx.MAX_REDRAWS

    def test_acyclic_ranks(self):
        assert fx.acyclic_ranks((1, 2, 2, 1)) == (1, 1, 1)
        with pytest.raises(FixtureError):
            fx.acyclic_ranks((2, 1, 1, 2))


class TestSpecErrors:
    @pytest.mark.parametrize("kw", [
        dict(kind="nope"),
        dict(kind="toy-d1", d=2),
        dict(kind="random-acyclic-complex", dims=(1, 2, 1)),
        dict(kind="random-acyclic-complex", dims=(1, 2, 3, 1)),
        dict(kind="random-acyclic-complex", seed=-1),
        dict(kind="random-acyclic-complex", seed=2**64),
    ])
    def test_rejected(self, kw):
        with pytest.raises(FixtureError):
            FixtureSpec(**kw)

    def test_kind_mismatch(self):
        with pytest.raises(FixtureError):
            gen_complex(FixtureSpec("synthetic-spectrum"))
        with pytest.raises(FixtureError):
            gen_spectrum(FixtureSpec("synthetic-spectrum", d=1))


class TestSpectra:
    def test_shape_and_order(self):
        spec = gen_spectrum(FixtureSpec("synthetic-spectrum", d=5, seed=3, n_classes=7, chi_dim=3, sigma_dim=2))
        lengths = [c.length for c in spec.classes]
        assert lengths == sorted(lengths) and len(lengths) == 7
        assert all(0.5 <= l <= 3.0 for l in lengths)
        assert all(c.chi.shape == (3, 3) and len(c.holonomy_angles) == 2 and len(c.sigma_m_eigs) == 2 for c in spec.classes)

    def test_growth_abscissa_dominates(self):
        spec = gen_spectrum(FixtureSpec("synthetic-spectrum", seed=8, eps=0.3))
        for c in spec.classes:
            assert np.log(np.linalg.norm(c.chi, 2)) / c.length <= spec.growth_abscissa

    def test_empty(self):
        assert gen_spectrum(FixtureSpec("synthetic-spectrum", n_classes=0)).classes == ()

    def test_deterministic(self):
        a = gen_spectrum(FixtureSpec("synthetic-spectrum", seed=5))
        b = gen_spectrum(FixtureSpec("synthetic-spectrum", seed=5))
        assert all(np.array_equal(x.chi, y.chi) and x.length == y.length for x, y in zip(a.classes, b.classes))
