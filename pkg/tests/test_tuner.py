import itertools
import logging
import math

import numpy as np
import pytest

from lassoprune import (
    STOP_EPSILON,
    STOP_INTERVAL_COLLAPSE,
    STOP_NON_IMPROVEMENT,
    BisectionState,
    NumericalError,
    ParameterError,
    SemiStructured,
    ShapeError,
    TunerConfig,
    Unstructured,
    bisect_lambda,
    compute_errors,
    frobenius_norm,
    prune_operator,
    round_to_pattern,
    satisfies_pattern,
    warm_start,
)
from conftest import correlated_acts


class TestComputeErrors:
    def test_identical_arguments_have_zero_rounding_share(self, rng):
        w = rng.standard_normal((3, 4))
        acts = rng.standard_normal((4, 5))
        target = rng.standard_normal((3, 5))
        e_total, e_round = compute_errors(w, w, acts, target)
        assert e_round == 0.0
        assert e_total == pytest.approx(np.linalg.norm(w @ acts - target), rel=1e-12)

    def test_all_zero_candidate(self, rng):
        w = rng.standard_normal((3, 4))
        acts = rng.standard_normal((4, 5))
        target = w @ acts
        e_total, e_round = compute_errors(np.zeros_like(w), w, acts, target)
        assert e_total == pytest.approx(np.linalg.norm(target), rel=1e-12)
        assert e_round == pytest.approx(e_total, rel=1e-12)

    def test_recomposition_oracle(self, rng):
        rounded = rng.standard_normal((4, 6))
        unrounded = rng.standard_normal((4, 6))
        acts = rng.standard_normal((6, 9))
        target = rng.standard_normal((4, 9))
        e_total, e_round = compute_errors(rounded, unrounded, acts, target)
        want_total = frobenius_norm(rounded @ acts - target)
        want_round = want_total - frobenius_norm(unrounded @ acts - target)
        assert abs(e_total - want_total) < 1e-12
        assert abs(e_round - want_round) < 1e-12


class TestBisectLambda:
    def test_high_ratio_moves_up(self):
        state = bisect_lambda(BisectionState(0.0, 1e6, 1e-5), ratio=0.9, threshold=0.3)
        assert state.lo == 1e-5
        assert state.hi == 1e6
        assert state.lam == pytest.approx((1e-5 + 1e6) / 2)

    def test_low_ratio_moves_down(self):
        state = bisect_lambda(BisectionState(0.0, 1e6, 1e-5), ratio=0.0, threshold=0.3)
        assert state.hi == 1e-5
        assert state.lam == pytest.approx(5e-6)

    def test_alternating_ratios_contract_geometrically(self):
        # once lam sits at the midpoint every step halves the interval, until
        # the width approaches the float spacing of the endpoints
        state = BisectionState(0.0, 1e6, 5e5)
        width = state.width
        for step in range(60):
            state = bisect_lambda(state, 1.0 if step % 2 else 0.0, 0.3)
            assert state.width <= width
            if step < 30:
                assert state.width == pytest.approx(width / 2, rel=1e-12)
            width = state.width
        assert state.width < 1e-12 * 1e6

    def test_clamps_out_of_range_ratios(self):
        down = bisect_lambda(BisectionState(0.0, 8.0, 4.0), ratio=-0.5, threshold=0.3)
        assert down.hi == 4.0
        up = bisect_lambda(BisectionState(0.0, 8.0, 4.0), ratio=1.5, threshold=0.3)
        assert up.lo == 4.0

    def test_nan_ratio_rejected(self):
        with pytest.raises(ParameterError):
            bisect_lambda(BisectionState(0.0, 1.0, 0.5), math.nan, 0.3)

    def test_state_validation(self):
        with pytest.raises(ParameterError):
            BisectionState(0.0, 1.0, 2.0)


def enumerate_best_mask(w_row, acts, pattern):
    """Exhaustive oracle: best total error over all legal masks of one row,
    keeping the surviving entries at their original values."""
    target = w_row @ acts
    cols = w_row.shape[1]
    best = math.inf
    for zeros in itertools.combinations(range(cols), pattern.zeros_per_group):
        masked = w_row.copy()
        masked[0, list(zeros)] = 0.0
        best = min(best, float(np.linalg.norm(masked @ acts - target)))
    return best


class TestPruneOperator:
    def test_already_optimal_warm_start_exits_immediately(self, rng):
        w = round_to_pattern(rng.standard_normal((4, 4)), Unstructured(0.5))
        acts = rng.standard_normal((4, 8))
        res = prune_operator(w, acts, acts, Unstructured(0.5), w)
        assert res.best_total_error == 0.0
        assert res.stop_reason == STOP_EPSILON
        assert res.outer_iterations == 0
        np.testing.assert_array_equal(res.weights, w)

    def test_identity_activation_matches_mask_enumeration(self):
        w = np.array([[3.0, -2.0, 1.0, 0.5]])
        acts = np.eye(4)
        pattern = SemiStructured(2, 4)
        res = prune_operator(w, acts, acts, pattern, round_to_pattern(w, pattern))
        best = enumerate_best_mask(w, acts, pattern)
        assert best == pytest.approx(math.sqrt(1.25), rel=1e-12)
        assert res.best_total_error == pytest.approx(best, rel=1e-9)
        np.testing.assert_array_equal(res.weights, [[3.0, -2.0, 0.0, 0.0]])

    def test_never_worse_than_rounded_warm_start(self, rng):
        pattern = Unstructured(0.5)
        for _ in range(10):
            w = rng.standard_normal((8, 8))
            acts = correlated_acts(rng, 8, 16)
            for kind in ("magnitude", "wanda"):
                seed = warm_start(kind, w, acts, pattern)
                base = frobenius_norm(round_to_pattern(seed, pattern) @ acts - w @ acts)
                res = prune_operator(w, acts, acts, pattern, seed)
                assert res.best_total_error <= base + 1e-12

    def test_result_invariants(self, rng):
        pattern = Unstructured(0.5)
        w = rng.standard_normal((8, 8))
        acts = correlated_acts(rng, 8, 16)
        cfg = TunerConfig()
        res = prune_operator(w, acts, acts, pattern, warm_start("wanda", w, acts, pattern), cfg)

        assert satisfies_pattern(res.weights, pattern)
        recomputed = frobenius_norm(res.weights @ acts - w @ acts)
        assert abs(res.best_total_error - recomputed) <= 1e-10
        assert res.outer_iterations == len(res.lambda_trace)

        # best error is non-increasing along the accepted subsequence; the
        # count of non-improving rounds never exceeds the patience budget
        running_best = math.inf
        misses = 0
        for lam, e_total, _ in res.lambda_trace:
            assert cfg.lambda_lo <= lam <= cfg.lambda_hi
            if e_total < running_best:
                running_best = e_total
            else:
                misses += 1
        assert misses <= cfg.patience
        assert res.stop_reason in (
            STOP_EPSILON,
            STOP_NON_IMPROVEMENT,
            STOP_INTERVAL_COLLAPSE,
        )

    def test_violating_warm_start_is_rounded_with_warning(self, rng, caplog):
        w = rng.standard_normal((4, 4))
        acts = rng.standard_normal((4, 8))
        with caplog.at_level(logging.WARNING, logger="lassoprune.tuner"):
            res = prune_operator(w, acts, acts, Unstructured(0.5), w)
        assert "warm start" in caplog.text
        assert satisfies_pattern(res.weights, Unstructured(0.5))

    def test_numerical_failure_carries_lambda_context(self, rng, monkeypatch):
        # a diverging solve must surface with the penalty that caused it
        import lassoprune.tuner as tuner_module

        def exploding(*args, **kwargs):
            raise NumericalError("non-finite iterate at iteration 3")

        monkeypatch.setattr(tuner_module, "fista_run", exploding)
        w = rng.standard_normal((4, 4))
        acts = rng.standard_normal((4, 8))
        seed = round_to_pattern(w, Unstructured(0.5))
        with pytest.raises(NumericalError, match="lambda=1e-05"):
            prune_operator(w, acts, acts, Unstructured(0.5), seed)

    def test_shape_mismatches_rejected(self, rng):
        w = rng.standard_normal((3, 4))
        acts = rng.standard_normal((4, 6))
        with pytest.raises(ShapeError):
            prune_operator(w, acts, rng.standard_normal((4, 7)), Unstructured(0.5), w)
        with pytest.raises(ShapeError):
            prune_operator(w, acts, acts, Unstructured(0.5), rng.standard_normal((3, 5)))

    def test_deterministic(self, rng):
        w = rng.standard_normal((6, 8))
        acts = correlated_acts(rng, 8, 12)
        seed = warm_start("magnitude", w, acts, SemiStructured(2, 4))
        a = prune_operator(w, acts, acts, SemiStructured(2, 4), seed)
        b = prune_operator(w, acts, acts, SemiStructured(2, 4), seed)
        assert np.array_equal(a.weights, b.weights)
        assert a.lambda_trace == b.lambda_trace

    def test_config_validation(self):
        with pytest.raises(ParameterError):
            TunerConfig(lambda_init=2e6)
        with pytest.raises(ParameterError):
            TunerConfig(ratio_threshold=1.0)
        with pytest.raises(ParameterError):
            TunerConfig(patience=0)
