import json
import logging

import numpy as np
import pandas as pd
import pytest

from hybridvol.pipelines.base import (DependentETLPipeline, ETLPipeline, ExtractStrategy, LoadStrategy,
                                      TransformStrategy)
from hybridvol.pipelines.common import (LocalCsvLoadStrategy, LocalJsonLoadStrategy, LocalOhlcCsvExtractStrategy)
from hybridvol.pipelines.forecast.strategies import (BacktestTransformStrategy, DescriptiveStatsTransformStrategy,
                                                     ForecastState, ReturnsTransformStrategy)


class ListExtract(ExtractStrategy):
    def __init__(self, values):
        self.values = values

    def extract(self):
        return list(self.values)


class Append(TransformStrategy):
    def __init__(self, value):
        self.value = value

    def transform(self, data):
        return data + [self.value]


class Fail(TransformStrategy):
    def transform(self, data):
        raise RuntimeError("boom")


class Collect(LoadStrategy):
    def __init__(self):
        self.seen = []

    def load(self, data):
        self.seen.append(list(data))
        return data


def test_transforms_run_in_order_before_loads():
    first, second = Collect(), Collect()
    pipeline = DependentETLPipeline([Append(1), Append(2)], [first, second])
    assert pipeline.execute([0]) == [0, 1, 2]
    assert first.seen == second.seen == [[0, 1, 2]]


def test_extract_feeds_the_transforms():
    sink = Collect()
    pipeline = ETLPipeline([ListExtract([7])], [Append(8)], [sink], logging.getLogger("test"))
    assert pipeline.execute() == [7, 8]
    assert sink.seen == [[7, 8]]


def test_failing_stage_is_logged_and_raised(caplog):
    sink = Collect()
    pipeline = DependentETLPipeline([Fail()], [sink], logging.getLogger("test"))
    with caplog.at_level(logging.ERROR):
        with pytest.raises(RuntimeError):
            pipeline.execute([])
    assert "Failed to transform with Fail: boom" in caplog.text
    assert sink.seen == []


def test_csv_load_creates_the_directory(tmp_path):
    frame = pd.DataFrame({"a": [1, 2], "b": [0.5, 0.25]})
    strategy = LocalCsvLoadStrategy(str(tmp_path / "nested" / "dir"), "frame.csv", select=lambda d: d["frame"])
    data = {"frame": frame}
    assert strategy.load(data) is data
    assert pd.read_csv(strategy.path).equals(frame)


def test_json_load_sorts_keys_and_converts_numpy(tmp_path):
    strategy = LocalJsonLoadStrategy(str(tmp_path), "doc.json", select=lambda d: d)
    strategy.load({"b": np.float64(1.5), "a": np.arange(3), "c": np.int64(2)})
    text = (tmp_path / "doc.json").read_text(encoding="utf-8")
    assert json.loads(text) == {"a": [0, 1, 2], "b": 1.5, "c": 2}
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')


def test_ohlc_extract_checks_the_path_up_front(tmp_path):
    with pytest.raises(FileNotFoundError):
        LocalOhlcCsvExtractStrategy(str(tmp_path / "absent.csv"))


def test_returns_stage_builds_scaled_range_volatility(simulated_prices):
    state = ReturnsTransformStrategy("SIM", "GARCH-Normal", 100.0, 10, 150).transform(simulated_prices)
    assert len(state.returns) == len(simulated_prices) - 1
    assert state.gkyz.scale_factor > 0
    assert state.gkyz.present().index[0] == simulated_prices.dates[10]


def test_stats_stage(simulated_prices):
    frame = DescriptiveStatsTransformStrategy(100.0).transform(simulated_prices)
    assert frame["statistic"].tolist()[:3] == ["count", "mean", "std"]


def test_empty_state_status():
    status = ForecastState(asset="SIM").status()
    assert status["complete"] is True
    assert status["forecasts"] == 0
    assert status["failed_block"] is None


def test_backtest_stage_fills_reports_and_paths(records):
    state = ForecastState(asset="SIM", records=records)
    state = BacktestTransformStrategy((0.05, 0.01), 0.05, 100, 0).transform(state)
    assert [r.source for r in state.reports] == ["garch", "hybrid"]
    assert state.report("hybrid").dm is not None

    paths = state.var_paths()
    assert list(paths.columns) == ["date", "return", "source", "alpha", "var", "es", "hit"]
    assert len(paths) == 4 * len(records)
    assert paths["return"].iloc[0] == pytest.approx(records[0].realized_return)
    assert list(state.volatility_paths().columns) == ["date", "sigma_gkyz", "sigma_garch", "sigma_hybrid"]
    assert set(state.report_document()["reports"]) == {"garch", "hybrid"}


def test_backtest_stage_without_records():
    state = BacktestTransformStrategy((0.05,), 0.05, 100, 0).transform(ForecastState())
    assert state.reports == []
