import os

import numpy as np
import pandas as pd
import pytest

from conftest import make_records
from hybridvol.distributions import DistributionKind, DistributionSpec
from hybridvol.garch import FitOptions, GarchSpec, fit, forecast_one_step
from hybridvol.gru import GruConfig, load_weights
from hybridvol.hybrid import (GarchForecastSeries, RollingPlan, build_features, read_forecasts_csv,
                              rolling_garch_forecasts, run_hybrid, write_forecasts_csv)
from hybridvol.hybrid.rolling import FEATURE_COLUMNS
from hybridvol.market_data import ReturnSeries, VolatilityEstimateSeries
from hybridvol.utils import (ConstraintError, ConvergenceError, GarchConvergenceError, GruDivergenceError,
                             InsufficientDataError, NumericOverflowError, SchemaError)

SMALL_PLAN = RollingPlan(garch_window=5, gru_train_window=20, gru_test_window=5, validation_fraction=0.25, step=5)
TINY_GRU = GruConfig(layer_sizes=(3,), epochs=2, batch_size=8, precision=64, seed=2)


def _components(n_returns: int, window: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    returns = ReturnSeries.from_array(rng.standard_normal(n_returns))
    dates = returns.dates
    gkyz = VolatilityEstimateSeries(pd.Series(0.8 + 0.2 * rng.random(n_returns), index=dates), window_n=1)
    forecast_dates = dates[window:]
    frame = pd.DataFrame(
        {
            "r_f": 0.01,
            "sigma_garch": 1.0 + 0.1 * rng.random(len(forecast_dates)),
            "nu": np.nan,
            "xi": np.nan,
            "converged": True,
            "carried": False,
            "repeated": False,
        },
        index=pd.DatetimeIndex(forecast_dates, name="date"),
    )
    return returns, gkyz, GarchForecastSeries(frame, GarchSpec())


def _feature_matrix(n_rows: int = 30):
    returns, gkyz, garch = _components(n_rows + SMALL_PLAN.garch_window + 1, SMALL_PLAN.garch_window)
    return returns, garch, build_features(returns, gkyz, garch)


def test_default_plan():
    plan = RollingPlan()
    assert plan.validation_size == 333
    assert plan.forecast_count(2202) == 1194
    assert [b.test_size for b in plan.blocks(2202)] == [504, 504, 186]


def test_small_plan_blocks():
    # 30 feature rows, not 40 returns: feature rows are N - W - 1, the convention that gives 2202 -> 1194
    blocks = SMALL_PLAN.blocks(30)
    assert [(b.train_start, b.train_stop, b.test_start, b.test_stop) for b in blocks] == [
        (0, 20, 20, 25),
        (5, 25, 25, 30),
    ]
    assert SMALL_PLAN.forecast_count(30) == 10


def test_desk_plan():
    plan = RollingPlan(garch_window=252, gru_train_window=504, gru_test_window=252, step=252)
    rows = plan.feature_rows(1499)
    assert rows == 1246
    assert plan.forecast_count(rows) == 742


def test_plan_without_room_for_a_block():
    with pytest.raises(InsufficientDataError):
        SMALL_PLAN.require_blocks(20)
    assert SMALL_PLAN.blocks(20) == []


def test_invalid_plan():
    with pytest.raises(ConstraintError):
        RollingPlan(validation_fraction=1.0)
    with pytest.raises(ConstraintError):
        RollingPlan(gru_train_window=2, validation_fraction=0.1)


def test_step_shorter_than_the_test_window_is_rejected():
    with pytest.raises(ConstraintError, match="overlap"):
        RollingPlan(garch_window=10, gru_train_window=20, gru_test_window=5, validation_fraction=0.25, step=2)


def test_every_row_is_forecast_at_most_once():
    plan = RollingPlan(garch_window=5, gru_train_window=20, gru_test_window=5, validation_fraction=0.25, step=7)
    rows = [row for block in plan.blocks(60) for row in range(block.test_start, block.test_stop)]
    assert len(rows) == len(set(rows))
    assert rows == sorted(rows)


def test_rolling_forecasts_use_the_trailing_window(simulated_path):
    returns, _ = simulated_path
    returns = returns.window(0, 160)
    options = FitOptions(starts=1)
    series = rolling_garch_forecasts(GarchSpec(), returns, 120, options)
    assert len(series) == 40
    assert series.frame.index.equals(returns.dates[120:])
    assert series.carried == 0

    window = returns.window(0, 120)
    r_f, sigma = forecast_one_step(fit(GarchSpec(), window, options), window)
    assert series.frame["sigma_garch"].iloc[0] == pytest.approx(sigma)
    assert series.frame["r_f"].iloc[0] == pytest.approx(r_f)


def test_rolling_forecasts_ignore_later_returns(simulated_path):
    returns, _ = simulated_path
    options = FitOptions(starts=1)
    baseline = rolling_garch_forecasts(GarchSpec(), returns.window(0, 130), 120, options).frame

    values = returns.window(0, 130).to_numpy().copy()
    values[125:] *= 5.0
    changed = ReturnSeries.from_array(values)
    perturbed = rolling_garch_forecasts(GarchSpec(), changed, 120, options).frame

    # forecast for index t uses returns [t - 120, t)
    assert perturbed.iloc[:6].equals(baseline.iloc[:6])
    assert not perturbed["sigma_garch"].iloc[6:].equals(baseline["sigma_garch"].iloc[6:])


def test_one_return_past_the_window_gives_one_forecast(simulated_path):
    returns, _ = simulated_path
    series = rolling_garch_forecasts(GarchSpec(), returns.window(0, 121), 120, FitOptions(starts=1))
    assert len(series) == 1
    assert series.frame.index[0] == returns.dates[120]


def test_constant_variance_gives_flat_forecasts():
    rng = np.random.default_rng(12)
    returns = ReturnSeries.from_array(rng.standard_normal(520))
    sigma = rolling_garch_forecasts(GarchSpec(), returns, 500, FitOptions(starts=1)).frame["sigma_garch"]
    assert sigma.std() / sigma.mean() < 0.10


def test_overflow_after_a_failed_fit_repeats_the_previous_forecast(simulated_path, monkeypatch):
    import hybridvol.hybrid.rolling as rolling

    calls = []
    original = rolling.fit

    def flaky(spec, window, options=None):
        calls.append(1)
        if len(calls) == 3:
            raise GarchConvergenceError("no start converged")
        return original(spec, window, options)

    def overflow(*args, **kwargs):
        raise NumericOverflowError("variance became non-finite")

    monkeypatch.setattr(rolling, "fit", flaky)
    monkeypatch.setattr(rolling, "filter_extended", overflow)
    returns, _ = simulated_path
    series = rolling_garch_forecasts(GarchSpec(), returns.window(0, 125), 120, FitOptions(starts=1))
    frame = series.frame
    assert len(frame) == 5
    assert series.carried == 1 and series.repeated == 1
    assert frame["repeated"].tolist() == [False, False, True, False, False]
    assert frame["sigma_garch"].iloc[2] == frame["sigma_garch"].iloc[1]
    assert frame["r_f"].iloc[2] == frame["r_f"].iloc[1]
    assert not frame["converged"].iloc[2]


def test_rolling_forecasts_carry_forward_a_failed_window(simulated_path, monkeypatch):
    import hybridvol.hybrid.rolling as rolling

    calls = []
    original = rolling.fit

    def flaky(spec, window, options=None):
        calls.append(1)
        if len(calls) == 2:
            raise GarchConvergenceError("no start converged")
        return original(spec, window, options)

    monkeypatch.setattr(rolling, "fit", flaky)
    returns, _ = simulated_path
    series = rolling_garch_forecasts(GarchSpec(), returns.window(0, 125), 120, FitOptions(starts=1))
    assert series.carried == 1
    assert series.frame["carried"].tolist() == [False, True, False, False, False]
    assert np.isfinite(series.frame["sigma_garch"]).all()


def test_rolling_forecasts_fail_without_a_first_fit(simulated_path, monkeypatch):
    import hybridvol.hybrid.rolling as rolling

    def broken(spec, window, options=None):
        raise GarchConvergenceError("no start converged")

    monkeypatch.setattr(rolling, "fit", broken)
    returns, _ = simulated_path
    with pytest.raises(ConvergenceError):
        rolling_garch_forecasts(GarchSpec(), returns.window(0, 125), 120, FitOptions(starts=1))


def test_rolling_forecasts_need_more_than_one_window(simulated_path):
    returns, _ = simulated_path
    with pytest.raises(InsufficientDataError):
        rolling_garch_forecasts(GarchSpec(), returns.window(0, 120), 120)


def test_feature_rows_align_by_date():
    returns, gkyz, garch = _components(20, 5)
    features = build_features(returns, gkyz, garch)
    assert len(features) == 20 - 5 - 1
    assert features.dropped == 0

    frame = features.frame
    first, dates = frame.index[0], returns.dates
    assert first == dates[5]
    assert frame.loc[first, "abs_return"] == pytest.approx(abs(returns.values[dates[5]]))
    assert frame.loc[first, "sigma_gkyz"] == pytest.approx(gkyz.values[dates[5]])
    assert frame.loc[first, "sigma_garch"] == pytest.approx(garch.frame.loc[dates[5], "sigma_garch"])
    assert frame.loc[first, "target"] == pytest.approx(gkyz.values[dates[6]])
    assert frame.loc[first, "target_date"] == dates[6]
    assert frame.loc[first, "sigma_garch_next"] == pytest.approx(garch.frame.loc[dates[6], "sigma_garch"])
    assert features.features.shape == (14, 3)


def test_feature_rows_with_an_absent_estimate_are_dropped():
    returns, gkyz, garch = _components(20, 5)
    values = gkyz.values.copy()
    values.iloc[10] = np.nan
    features = build_features(returns, VolatilityEstimateSeries(values, window_n=1), garch)
    assert len(features) == 12
    assert features.dropped == 2
    assert returns.dates[9] not in features.frame.index
    assert returns.dates[10] not in features.frame.index


def test_hybrid_run_produces_one_record_per_test_row(tmp_path):
    returns, garch, features = _feature_matrix()
    result = run_hybrid(SMALL_PLAN, TINY_GRU, features, weights_dir=str(tmp_path))
    assert result.complete
    assert len(result.records) == 10
    assert [rec.block for rec in result.records] == [0] * 5 + [1] * 5
    assert len(result.best_epochs) == 2

    for rec in result.records:
        assert rec.sigma_hybrid >= 0.0
        assert rec.realized_return == pytest.approx(returns.values[rec.date])
        assert rec.sigma_garch == pytest.approx(garch.frame.loc[rec.date, "sigma_garch"])
        assert rec.distribution.kind is DistributionKind.NORMAL
    dates = [rec.date for rec in result.records]
    assert dates == sorted(dates)
    assert dates[0] == features.frame["target_date"].iloc[20]

    weights, config = load_weights(os.path.join(tmp_path, "gru_block_1.npz"))
    assert config.seed == TINY_GRU.seed + 1
    assert weights.layer_count == 1


def test_hybrid_run_is_reproducible():
    _, _, features = _feature_matrix()
    first = run_hybrid(SMALL_PLAN, TINY_GRU, features)
    second = run_hybrid(SMALL_PLAN, TINY_GRU, features)
    assert [r.sigma_hybrid for r in first.records] == [r.sigma_hybrid for r in second.records]


def test_hybrid_run_keeps_blocks_before_a_divergence(monkeypatch):
    import hybridvol.hybrid.rolling as rolling

    original = rolling.train

    def diverge_second_block(config, data, validation, weights=None):
        if config.seed == TINY_GRU.seed + 1:
            raise GruDivergenceError(3, float("nan"))
        return original(config, data, validation, weights)

    monkeypatch.setattr(rolling, "train", diverge_second_block)
    _, _, features = _feature_matrix()
    result = run_hybrid(SMALL_PLAN, TINY_GRU, features)
    assert not result.complete
    assert result.failed_block == 1
    assert result.failure.epoch == 3
    assert len(result.records) == 5


def test_negative_outputs_are_floored(monkeypatch):
    import hybridvol.hybrid.rolling as rolling

    monkeypatch.setattr(rolling, "predict", lambda weights, config, X: -np.ones(len(X)))
    _, _, features = _feature_matrix()
    result = run_hybrid(SMALL_PLAN, TINY_GRU, features)
    assert result.floored == 10
    assert all(rec.sigma_hybrid == 0.0 for rec in result.records)


def test_records_ignore_data_after_their_date():
    returns, gkyz, garch = _components(36, 5)
    baseline = run_hybrid(SMALL_PLAN, TINY_GRU, build_features(returns, gkyz, garch)).records
    cut = baseline[6].date

    later = (returns.dates > cut).to_numpy()
    values = returns.to_numpy().copy()
    values[later] *= 3.0
    estimates = gkyz.values.copy()
    estimates[later] += 0.5
    frame = garch.frame.copy()
    frame.loc[frame.index > cut, "sigma_garch"] *= 2.0
    features = build_features(
        ReturnSeries.from_array(values),
        VolatilityEstimateSeries(estimates, window_n=1),
        GarchForecastSeries(frame, GarchSpec()),
    )
    perturbed = run_hybrid(SMALL_PLAN, TINY_GRU, features).records

    assert [rec.date for rec in perturbed] == [rec.date for rec in baseline]
    kept = [rec for rec in baseline if rec.date <= cut]
    assert len(kept) == 7
    assert perturbed[: len(kept)] == kept
    assert perturbed[len(kept):] != baseline[len(kept):]


def test_feature_windows_end_before_their_target_date():
    _, _, features = _feature_matrix()
    frame = features.frame
    length = TINY_GRU.sequence_length
    ends = np.arange(length - 1, len(features))
    for end, window in zip(ends, features.windows(ends, length)):
        rows = frame.iloc[end - length + 1 : end + 1]
        assert np.array_equal(window, rows[list(FEATURE_COLUMNS)].to_numpy())
        assert rows.index.max() < frame["target_date"].iloc[end]

    for block in SMALL_PLAN.blocks(len(features)):
        last_training_target = frame["target_date"].iloc[block.train_stop - 1]
        assert last_training_target < frame["target_date"].iloc[block.test_start]


def test_feature_row_ignores_returns_two_days_ahead():
    returns, gkyz, garch = _components(20, 5)
    values = returns.to_numpy().copy()
    values[12] = 40.0
    baseline = build_features(returns, gkyz, garch).frame
    perturbed = build_features(ReturnSeries.from_array(values), gkyz, garch).frame
    row = returns.dates[10]
    assert perturbed.loc[row].equals(baseline.loc[row])


def test_hybrid_learns_an_identity_target():
    rng = np.random.default_rng(5)
    n, window = 300, 5
    returns = ReturnSeries.from_array(rng.standard_normal(n))
    dates = returns.dates
    sigma = 0.5 + 1.5 * rng.random(n - window)
    frame = pd.DataFrame(
        {"r_f": 0.0, "sigma_garch": sigma, "nu": np.nan, "xi": np.nan, "converged": True, "carried": False,
         "repeated": False},
        index=pd.DatetimeIndex(dates[window:], name="date"),
    )
    # the next day's estimate equals today's GARCH forecast
    estimates = pd.Series(np.nan, index=dates)
    estimates.iloc[window + 1 :] = sigma[:-1]
    features = build_features(returns, VolatilityEstimateSeries(estimates, window_n=1),
                              GarchForecastSeries(frame, GarchSpec()))

    plan = RollingPlan(garch_window=window, gru_train_window=200, gru_test_window=50, validation_fraction=0.25,
                       step=50)
    config = GruConfig(layer_sizes=(8,), epochs=300, batch_size=32, learning_rate=0.01, dropout_rate=0.0,
                       l2_lambda=0.0, precision=64, seed=1)
    records = run_hybrid(plan, config, features).records
    target = np.array([rec.sigma_gkyz for rec in records])
    hybrid = np.array([rec.sigma_hybrid for rec in records])
    assert len(records) == plan.forecast_count(len(features))
    assert np.mean((hybrid - target) ** 2) < 0.1 * np.var(target)


def test_forecast_csv_round_trip(tmp_path):
    records = make_records(20, dist=DistributionSpec.student_t(6.5))
    path = str(tmp_path / "forecasts.csv")
    write_forecasts_csv(records, path)
    loaded = read_forecasts_csv(path, DistributionKind.STUDENT_T)
    assert len(loaded) == 20
    for original, copy in zip(records, loaded):
        assert copy.date == original.date
        assert copy.sigma_hybrid == original.sigma_hybrid
        assert copy.realized_return == original.realized_return
        assert copy.distribution == original.distribution
    with open(path, encoding="utf-8") as handle:
        assert handle.readline().strip() == "date,r_f,sigma_garch,sigma_hybrid,sigma_gkyz,return,nu,xi"


def test_forecast_csv_without_a_column(tmp_path):
    path = str(tmp_path / "forecasts.csv")
    pd.DataFrame({"date": ["2020-01-01"], "r_f": [0.0]}).to_csv(path, index=False)
    with pytest.raises(SchemaError):
        read_forecasts_csv(path, DistributionKind.NORMAL)
