import numpy as np
import pytest

from src.core.enums import EstimandKind, VariableKind
from src.core.exceptions import (
    ConfigError,
    EmptyConditioningSet,
    InvalidMediatorOrder,
    NumericalError,
    SigmaNotPositiveDefinite,
    UnknownVariable,
    UnsupportedEstimand,
)
from src.estimands.bootstrap import bootstrap, percentile_interval
from src.estimands.decompose import decompose_check
from src.estimands.estimator import estimate, estimate_many, summarize
from src.estimands.planner import (
    CONTROL,
    CROSS,
    NATURAL,
    TREATED,
    UNDER_CONTROL,
    UNDER_TREATED,
    contrast_labels,
    ladder_label,
    plan_for,
    regimes_for,
)
from src.estimands.sensitivity import correlation_matrix, sensitivity_sweep
from src.flow.cgnf import build_cgnf
from src.graph.parser import parse_dag
from src.schemas.estimands import ConditioningClause, EstimandSpec, EstimateResult, RhoGrid
from src.schemas.graph import Fixed, FromRegime, VariableSpec
from src.schemas.train import PreprocessInfo


def spec(kind: EstimandKind, **kwargs) -> EstimandSpec:
    kwargs.setdefault("treatments", "A")
    kwargs.setdefault("outcome", "Y")
    return EstimandSpec(kind=kind, **kwargs)


def result(point: float) -> EstimateResult:
    return EstimateResult(estimand="ATE_A_Y", kind=EstimandKind.ATE, point=point, mc_se=0.0, sample_count=1)


@pytest.fixture
def two_mediator_dag():
    return parse_dag("C -> A, C -> L, C -> M, C -> Y\nA -> L, A -> M, A -> Y\nL -> M, L -> Y\nM -> Y")


@pytest.fixture
def mediation_flow(mediation_dag, tiny_architecture):
    return build_cgnf(mediation_dag, tiny_architecture, seed=21)


class TestPlanner:
    """Regime sets and contrast labels"""

    def test_ate_regimes(self):
        regimes = regimes_for(spec(EstimandKind.ATE, treated=2.0, control=-1.0))

        assert list(regimes) == [TREATED, CONTROL]
        assert regimes[TREATED].rule("A") == Fixed(value=2.0)
        assert contrast_labels(spec(EstimandKind.ATE)) == (TREATED, CONTROL)

    def test_cate_adds_natural_regime(self):
        cate = spec(EstimandKind.CATE, condition=ConditioningClause(variable="C", value=1))

        assert list(regimes_for(cate)) == [NATURAL, TREATED, CONTROL]

    def test_natural_effects_share_cross_world(self):
        nde = spec(EstimandKind.NDE, mediators=("M",))
        regimes = regimes_for(nde)

        assert list(regimes) == [UNDER_CONTROL, UNDER_TREATED, CROSS]
        assert regimes[CROSS].rule("M") == FromRegime(regime=UNDER_CONTROL)
        assert regimes[CROSS].rule("A") == Fixed(value=1.0)
        assert contrast_labels(nde) == (CROSS, UNDER_CONTROL)
        assert contrast_labels(nde.model_copy(update={"kind": EstimandKind.NIE})) == (UNDER_TREATED, CROSS)

    def test_pse_ladder(self):
        direct = spec(EstimandKind.PSE, mediators=("L", "M"))
        regimes = regimes_for(direct)

        assert list(regimes) == [UNDER_CONTROL, ladder_label(2), ladder_label(1), ladder_label(0)]
        assert set(regimes[ladder_label(1)].assignments) == {"A", "L"}
        assert contrast_labels(direct) == (ladder_label(2), UNDER_CONTROL)
        via_m = direct.model_copy(update={"path_mediator": "M"})
        assert contrast_labels(via_m) == (ladder_label(1), ladder_label(2))

    def test_plan_uses_given_count_and_seed(self, mediation_dag):
        plan = plan_for(spec(EstimandKind.ATE), mediation_dag, sample_count=10, seed=4)

        assert (plan.sample_count, plan.seed) == (10, 4)

    def test_unknown_variable(self, mediation_dag):
        with pytest.raises(UnknownVariable):
            plan_for(spec(EstimandKind.ATE, outcome="Z"), mediation_dag)

    def test_mediator_must_lie_on_a_path(self, mediation_dag):
        with pytest.raises(InvalidMediatorOrder):
            plan_for(spec(EstimandKind.NDE, mediators=("C",)), mediation_dag)

    def test_mediators_must_be_topologically_ordered(self, two_mediator_dag):
        with pytest.raises(InvalidMediatorOrder):
            plan_for(spec(EstimandKind.PSE, mediators=("M", "L")), two_mediator_dag)


class TestEstimator:
    """Monte Carlo contrasts"""

    def test_summarize(self):
        diffs = np.array([1.0, 2.0, 3.0, 4.0])
        out = summarize(spec(EstimandKind.ATE), diffs, seed=1)

        assert out.point == 2.5
        assert out.mc_se == pytest.approx(diffs.std(ddof=1) / 2.0)
        assert out.sample_count == 4
        assert out.conditioning_count is None

    def test_summarize_empty_mask(self):
        cate = spec(EstimandKind.CATE, condition=ConditioningClause(variable="C", value=9))
        with pytest.raises(EmptyConditioningSet):
            summarize(cate, np.zeros(3), seed=1, mask=np.zeros(3, dtype=bool))

    def test_identity_flow_has_no_effects(self, identity_flow):
        specs = [
            spec(EstimandKind.ATE),
            spec(EstimandKind.NDE, mediators=("M",)),
            spec(EstimandKind.NIE, mediators=("M",)),
        ]
        for out in estimate_many(identity_flow, specs, sample_count=500, seed=2):
            assert out.point == pytest.approx(0.0, abs=1e-8)

    def test_empty_spec_list(self, identity_flow):
        assert estimate_many(identity_flow, [], sample_count=10, seed=1) == []

    def test_concrete_cate(self, identity_flow):
        cate = spec(EstimandKind.CATE, condition=ConditioningClause(variable="C", interval=(0.0, 10.0)))
        out = estimate(identity_flow, cate, sample_count=2000, seed=5)

        assert 800 < out.conditioning_count < 1200
        assert out.condition == "0<=C<=10"

    def test_cate_without_matches(self, identity_flow):
        cate = spec(EstimandKind.CATE, condition=ConditioningClause(variable="C", interval=(50.0, 60.0)))
        with pytest.raises(EmptyConditioningSet):
            estimate(identity_flow, cate, sample_count=100, seed=5)

    def test_stratified_cate(self, identity_flow):
        cate = spec(EstimandKind.CATE, condition=ConditioningClause(variable="C", bins=4))
        results = estimate_many(identity_flow, [cate], sample_count=1000, seed=5)

        assert len(results) == 4
        assert sum(r.conditioning_count for r in results) >= 1000
        with pytest.raises(UnsupportedEstimand):
            estimate(identity_flow, cate, sample_count=10, seed=5)

    def test_null_contrast_is_exactly_zero(self, mediation_flow):
        same = spec(EstimandKind.ATE, treated=0.5, control=0.5)

        assert estimate(mediation_flow, same, 300, seed=8).point == 0.0

    def test_cate_strata_average_to_the_ate(self, tiny_architecture):
        dag = parse_dag("C -> A, C -> Y, A -> Y").with_specs(
            [VariableSpec(name="C", kind=VariableKind.DISCRETE, support=(0, 1))]
        )
        flow = build_cgnf(dag, tiny_architecture, seed=4)
        flow.preprocess = PreprocessInfo(
            columns=("C", "A", "Y"), means=(0.5, 0.0, 0.0), sds=(0.5, 1.0, 1.0),
            dequantized=(True, False, False), supports={"C": (0, 1)},
        )
        cate = spec(EstimandKind.CATE, condition=ConditioningClause(variable="C"))
        ate, *strata = estimate_many(flow, [spec(EstimandKind.ATE), cate], sample_count=1000, seed=6)

        assert [s.condition for s in strata] == ["C==0", "C==1"]
        assert sum(s.conditioning_count for s in strata) == 1000
        weighted = sum(s.point * s.conditioning_count for s in strata) / 1000
        assert weighted == pytest.approx(ate.point, abs=1e-12)

    def test_estimates_are_reproducible(self, mediation_flow):
        ate = spec(EstimandKind.ATE)

        assert estimate(mediation_flow, ate, 300, seed=8) == estimate(mediation_flow, ate, 300, seed=8)


class TestDecomposition:
    def test_natural_effects_add_up(self, mediation_flow):
        report = decompose_check(mediation_flow, "A", "Y", ["M"], sample_count=500, seed=3)

        assert set(report.components) == {"NDE", "NIE"}
        assert report.holds
        assert report.total == pytest.approx(report.ate.point, abs=1e-10)

    def test_path_specific_effects_add_up(self, two_mediator_dag, tiny_architecture):
        flow = build_cgnf(two_mediator_dag, tiny_architecture, seed=5)
        report = decompose_check(flow, "A", "Y", ["L", "M"], sample_count=500, seed=3)

        assert set(report.components) == {"PSE direct", "PSE via L", "PSE via M"}
        assert report.holds

    def test_no_mediators(self, mediation_flow):
        report = decompose_check(mediation_flow, "A", "Y", [], sample_count=100, seed=3)

        assert report.components == {}
        assert report.difference == 0.0


class TestBootstrap:
    """Percentile bootstrap with training mocked out"""

    def test_two_replicates_give_min_and_max(self):
        assert percentile_interval([3.0, 1.0], 0.9) == (1.0, 3.0)

    def test_interval_of_many_replicates(self):
        lo, hi = percentile_interval(np.arange(1.0, 101.0), 0.9)

        assert (lo, hi) == (5.0, 95.0)

    def test_bootstrap_collects_replicates(self, mocker, identity_flow, linear_chain_data, quick_train_config):
        train = mocker.patch("src.estimands.bootstrap.train_model", return_value=(identity_flow, None))
        mocker.patch(
            "src.estimands.bootstrap.estimate",
            side_effect=[result(0.5), result(0.2), result(0.9), result(0.4)],
        )
        out = bootstrap(
            linear_chain_data, identity_flow.dag, spec(EstimandKind.ATE), quick_train_config,
            B=3, level=0.9, seed=1, sample_count=10, workers=1,
        )

        assert out.point == 0.5
        assert out.replicates == [0.2, 0.9, 0.4]
        assert (out.ci_low, out.ci_high) == (0.2, 0.9)
        assert out.failures == 0
        assert train.call_count == 4

    def test_failed_replicates_are_counted(self, mocker, identity_flow, linear_chain_data, quick_train_config):
        mocker.patch("src.estimands.bootstrap.train_model", return_value=(identity_flow, None))
        mocker.patch(
            "src.estimands.bootstrap.estimate",
            side_effect=[result(0.5), NumericalError("diverged"), result(0.3), result(0.7)],
        )
        out = bootstrap(
            linear_chain_data, identity_flow.dag, spec(EstimandKind.ATE), quick_train_config,
            B=3, seed=1, sample_count=10, workers=1,
        )

        assert out.failures == 1
        assert out.replicates == [0.3, 0.7]

    def test_every_replicate_failing(self, mocker, identity_flow, linear_chain_data, quick_train_config):
        mocker.patch("src.estimands.bootstrap.train_model", return_value=(identity_flow, None))
        mocker.patch(
            "src.estimands.bootstrap.estimate",
            side_effect=[result(0.5), NumericalError("a"), NumericalError("b")],
        )
        with pytest.raises(NumericalError):
            bootstrap(
                linear_chain_data, identity_flow.dag, spec(EstimandKind.ATE), quick_train_config,
                B=2, seed=1, sample_count=10, workers=1,
            )

    @pytest.mark.parametrize("B,level", [(1, 0.9), (10, 0.0), (10, 1.5)])
    def test_invalid_settings(self, B, level, identity_flow, linear_chain_data, quick_train_config):
        with pytest.raises(ConfigError):
            bootstrap(
                linear_chain_data, identity_flow.dag, spec(EstimandKind.ATE), quick_train_config,
                B=B, level=level,
            )


class TestSensitivity:
    def test_correlation_matrix(self, mediation_dag):
        sigma = correlation_matrix(mediation_dag, "A", "Y", 0.3)

        assert sigma[1, 3] == sigma[3, 1] == 0.3
        assert np.trace(sigma) == 4.0

    def test_invalid_rho_names_grid_point(self, mediation_dag):
        with pytest.raises(SigmaNotPositiveDefinite) as exc:
            correlation_matrix(mediation_dag, "A", "Y", 1.5)

        assert exc.value.detail == "A,Y,1.5"

    def test_sweep_rows(self, mocker, identity_flow, mediation_dag, quick_train_config):
        train = mocker.patch("src.estimands.sensitivity.train_model", return_value=(identity_flow, None))
        mocker.patch("src.estimands.sensitivity.estimate", side_effect=[result(0.1), result(0.2)])
        data = mocker.Mock()
        rows = sensitivity_sweep(
            data, mediation_dag, spec(EstimandKind.ATE), quick_train_config,
            [RhoGrid(variable_a="A", variable_b="Y", rhos=(0.0, 0.4))], sample_count=10, workers=1,
        )

        assert [(r.rho, r.result.point) for r in rows] == [(0.0, 0.1), (0.4, 0.2)]
        sigma = train.call_args_list[1].args[4]
        assert sigma[1, 3] == 0.4

    def test_one_seed_drives_training_and_sampling(self, mocker, identity_flow, mediation_dag, quick_train_config):
        train = mocker.patch("src.estimands.sensitivity.train_model", return_value=(identity_flow, None))
        est = mocker.patch("src.estimands.sensitivity.estimate", return_value=result(0.1))
        sensitivity_sweep(
            mocker.Mock(), mediation_dag, spec(EstimandKind.ATE), quick_train_config,
            [RhoGrid(variable_a="A", variable_b="Y", rhos=(0.1,))], sample_count=10, seed=99, workers=1,
        )

        assert train.call_args.args[2].seed == 99
        assert est.call_args.args[3] == 99

    def test_seed_defaults_to_training_seed(self, mocker, identity_flow, mediation_dag, quick_train_config):
        train = mocker.patch("src.estimands.sensitivity.train_model", return_value=(identity_flow, None))
        est = mocker.patch("src.estimands.sensitivity.estimate", return_value=result(0.1))
        sensitivity_sweep(
            mocker.Mock(), mediation_dag, spec(EstimandKind.ATE), quick_train_config,
            [RhoGrid(variable_a="A", variable_b="Y", rhos=(0.1,))], sample_count=10, workers=1,
        )

        assert train.call_args.args[2].seed == quick_train_config.seed == 11
        assert est.call_args.args[3] == 11

    def test_grid_is_validated_before_training(self, mocker, mediation_dag, quick_train_config):
        train = mocker.patch("src.estimands.sensitivity.train_model")
        with pytest.raises(SigmaNotPositiveDefinite):
            sensitivity_sweep(
                mocker.Mock(), mediation_dag, spec(EstimandKind.ATE), quick_train_config,
                [RhoGrid(variable_a="A", variable_b="Y", rhos=(0.2, -1.2))], workers=1,
            )

        train.assert_not_called()
