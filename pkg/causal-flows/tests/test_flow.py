import numpy as np
import pytest
from scipy import stats

from src.core.config import settings
from src.core.exceptions import BracketNotFound, SchemaMismatch, ShapeMismatch, SigmaNotPositiveDefinite
from src.flow.cgnf import build_cgnf, flow_forward, identity_cgnf
from src.flow.inversion import invert_normalizer
from src.flow.loss import base_logdensity, loss_gradients, nll, sigma_cholesky
from src.flow.normalizer import normalizer_forward
from src.flow.serialization import dump_cgnf, load_cgnf
from src.graph.parser import parse_dag
from src.schemas.model import ModelFile


class TestNormalizer:
    """Monotone per-variable transforms"""

    def test_strictly_increasing(self, toy_flow):
        norm = toy_flow.normalizers["Y"]
        v = np.linspace(-4, 4, 200)
        z, log_deriv = normalizer_forward(norm, v, np.full((200, 1), 0.3))

        assert np.all(np.diff(z) > 0)
        assert np.all(np.isfinite(log_deriv))

    def test_scalar_call(self, toy_flow):
        z, log_deriv = normalizer_forward(toy_flow.normalizers["Y"], 0.5, [1.0])

        assert isinstance(z, float) and isinstance(log_deriv, float)

    def test_log_derivative_matches_slope(self, toy_flow):
        norm = toy_flow.normalizers["X"]
        eps = 1e-5
        z_up, _ = normalizer_forward(norm, 0.7 + eps, np.zeros(0))
        z_down, _ = normalizer_forward(norm, 0.7 - eps, np.zeros(0))
        _, log_deriv = normalizer_forward(norm, 0.7, np.zeros(0))

        assert np.exp(log_deriv) == pytest.approx((z_up - z_down) / (2 * eps), rel=1e-4)

    def test_identity_normalizer(self, identity_flow):
        v = np.array([-2.0, 0.0, 1.5])
        z, log_deriv = normalizer_forward(identity_flow.normalizers["Y"], v, np.ones((3, 3)))

        np.testing.assert_allclose(z, v, atol=1e-12)
        np.testing.assert_allclose(log_deriv, 0.0, atol=1e-12)

    def test_wrong_parent_count(self, toy_flow):
        with pytest.raises(ShapeMismatch):
            normalizer_forward(toy_flow.normalizers["Y"], np.zeros(2), np.zeros((2, 2)))


class TestInversion:
    """Solving normalizer(v) = z"""

    def test_round_trip_random_flow(self, toy_flow):
        rng = np.random.default_rng(9)
        norm = toy_flow.normalizers["Y"]
        v = rng.normal(0, 2, size=1000)
        parents = rng.normal(size=(1000, 1))
        z, _ = normalizer_forward(norm, v, parents)

        np.testing.assert_allclose(invert_normalizer(norm, z, parents), v, atol=1e-6)

    def test_scalar_target(self, toy_flow):
        norm = toy_flow.normalizers["X"]
        z, _ = normalizer_forward(norm, -1.25, np.zeros(0))

        assert invert_normalizer(norm, z, np.zeros(0)) == pytest.approx(-1.25, abs=1e-6)

    def test_far_tail_target(self, identity_flow):
        norm = identity_flow.normalizers["C"]

        assert invert_normalizer(norm, 1e5, np.zeros(0)) == pytest.approx(1e5, rel=1e-9)

    @pytest.mark.parametrize("bad", [np.inf, np.nan])
    def test_non_finite_target(self, toy_flow, bad):
        with pytest.raises(BracketNotFound):
            invert_normalizer(toy_flow.normalizers["X"], bad, np.zeros(0))


class TestLoss:
    """Negative log-likelihood and its gradients"""

    def test_identity_flow_is_standard_normal(self, identity_flow):
        rows = np.random.default_rng(0).standard_normal((50, 4))
        expected = -stats.norm.logpdf(rows).sum()

        assert nll(identity_flow, rows).total == pytest.approx(expected, rel=1e-10)

    def test_cholesky_path_agrees_with_identity_path(self, toy_flow):
        rows = np.random.default_rng(1).standard_normal((20, 2))

        assert nll(toy_flow, rows, use_identity_path=False).total == pytest.approx(
            nll(toy_flow, rows).total, rel=1e-12
        )

    def test_correlated_base_density(self):
        sigma = np.array([[1.0, 0.4], [0.4, 1.0]])
        z = np.random.default_rng(2).standard_normal((10, 2))
        logpdf, grad = base_logdensity(z, sigma)

        np.testing.assert_allclose(logpdf, stats.multivariate_normal(cov=sigma).logpdf(z))
        np.testing.assert_allclose(grad, -z @ np.linalg.inv(sigma), atol=1e-12)

    def test_gradients_match_finite_differences(self, chain_dag, tiny_architecture):
        flow = build_cgnf(chain_dag, tiny_architecture, seed=3, sigma_z=[[1.0, 0.3], [0.3, 1.0]])
        rows = np.random.default_rng(4).standard_normal((8, 2))
        _, grads = loss_gradients(flow, rows)

        rng = np.random.default_rng(5)
        params = flow.parameters()
        sizes = np.array([p.size for p in params])
        checked, agreed = 0, 0
        for _ in range(500):
            i = int(rng.choice(len(params), p=sizes / sizes.sum()))
            j = int(rng.integers(params[i].size))
            flat = params[i].reshape(-1)
            old = flat[j]
            eps = 1e-6
            flat[j] = old + eps
            up = nll(flow, rows).total
            flat[j] = old - eps
            down = nll(flow, rows).total
            flat[j] = old
            numeric = (up - down) / (2 * eps)
            analytic = grads[i].reshape(-1)[j]
            if abs(numeric) < 1e-7 and abs(analytic) < 1e-7:
                continue
            checked += 1
            agreed += abs(analytic - numeric) <= 1e-3 * abs(numeric) + 1e-6
        # a perturbation can straddle a ReLU kink; allow a handful of those
        assert checked > 100
        assert agreed >= 0.99 * checked

    def test_scale_multiplies_gradients(self, toy_flow):
        rows = np.random.default_rng(6).standard_normal((5, 2))
        loss, grads = loss_gradients(toy_flow, rows)
        half_loss, half = loss_gradients(toy_flow, rows, scale=0.5)

        assert half_loss == loss
        for g, h in zip(grads, half):
            np.testing.assert_allclose(h, 0.5 * g)


class TestSigma:
    """Base correlation matrices"""

    def test_not_positive_definite(self):
        with pytest.raises(SigmaNotPositiveDefinite):
            sigma_cholesky([[1.0, 1.2], [1.2, 1.0]])

    def test_not_symmetric(self):
        with pytest.raises(SigmaNotPositiveDefinite):
            sigma_cholesky([[1.0, 0.2], [0.1, 1.0]])

    def test_unit_diagonal_required(self):
        with pytest.raises(SigmaNotPositiveDefinite):
            sigma_cholesky([[2.0, 0.0], [0.0, 1.0]])

    def test_flow_checks_sigma_shape(self, chain_dag, tiny_architecture):
        with pytest.raises(ShapeMismatch):
            build_cgnf(chain_dag, tiny_architecture, sigma_z=np.eye(3))


class TestFlowForward:
    """Whole-flow evaluation"""

    def test_columns_follow_dag_order(self, toy_flow):
        rows = np.array([[0.1, 0.2], [1.0, -1.0]])
        z, _ = flow_forward(toy_flow, rows)
        z_x, _ = normalizer_forward(toy_flow.normalizers["X"], rows[:, 0], np.zeros((2, 0)))

        np.testing.assert_allclose(z[:, 0], z_x)

    def test_descendants_do_not_move_ancestors(self, mediation_dag, tiny_architecture):
        cgnf = build_cgnf(mediation_dag, tiny_architecture, seed=3)
        rows = np.random.default_rng(2).standard_normal((8, 4))
        z, _ = flow_forward(cgnf, rows)

        for j, name in enumerate(mediation_dag.names):
            shifted = rows.copy()
            shifted[:, j] += 1.5
            z_shifted, _ = flow_forward(cgnf, shifted)
            upstream = sorted(mediation_dag.index(a) for a in mediation_dag.ancestors(name))

            np.testing.assert_array_equal(z_shifted[:, upstream], z[:, upstream])
            assert not np.array_equal(z_shifted[:, j], z[:, j])

    def test_sibling_columns_are_independent(self, tiny_architecture):
        cgnf = build_cgnf(parse_dag("X -> Y, X -> W"), tiny_architecture, seed=4)
        rows = np.random.default_rng(3).standard_normal((6, 3))
        shifted = rows.copy()
        shifted[:, 1] -= 2.0

        z, _ = flow_forward(cgnf, rows)
        z_shifted, _ = flow_forward(cgnf, shifted)

        np.testing.assert_array_equal(z_shifted[:, [0, 2]], z[:, [0, 2]])

    def test_same_seed_same_flow(self, chain_dag, tiny_architecture):
        a = build_cgnf(chain_dag, tiny_architecture, seed=1)
        b = build_cgnf(chain_dag, tiny_architecture, seed=1)

        for pa, pb in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(pa, pb)


class TestModelFile:
    """Model file round trip"""

    def test_round_trip_preserves_densities(self, toy_flow):
        restored = load_cgnf(ModelFile.model_validate_json(dump_cgnf(toy_flow).model_dump_json()))
        rows = np.random.default_rng(7).standard_normal((10, 2))

        assert nll(restored, rows).total == nll(toy_flow, rows).total
        assert restored.dag == toy_flow.dag

    def test_serialization_is_byte_stable(self, toy_flow):
        assert dump_cgnf(toy_flow).model_dump_json() == dump_cgnf(toy_flow.copy()).model_dump_json()

    def test_version_mismatch(self, toy_flow):
        stale = dump_cgnf(toy_flow).model_copy(update={"format_version": settings.MODEL_FORMAT_VERSION + 1})

        with pytest.raises(SchemaMismatch):
            load_cgnf(stale)

    def test_tampered_fingerprint(self, toy_flow):
        tampered = dump_cgnf(toy_flow).model_copy(update={"dag_fingerprint": "sha256:0"})

        with pytest.raises(SchemaMismatch):
            load_cgnf(tampered)
