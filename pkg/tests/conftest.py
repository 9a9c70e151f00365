import os
from typing import List

import numpy as np
import pandas as pd
import pytest

from hybridvol.cli import RunConfig
from hybridvol.distributions import DistributionSpec
from hybridvol.garch import GarchParams, GarchSpec, simulate
from hybridvol.hybrid import ForecastRecord
from hybridvol.market_data import synthesize_ohlc

TRUE_GARCH = GarchParams(alpha0=0.05, alpha=(0.10,), beta=(0.85,))


@pytest.fixture
def garch_spec() -> GarchSpec:
    return GarchSpec()


@pytest.fixture
def simulated_path(garch_spec):
    """1000 returns of a GARCH(1,1) with their true variances."""
    return simulate(garch_spec, TRUE_GARCH, 1000, seed=7)


@pytest.fixture
def simulated_prices(garch_spec):
    returns, h = simulate(garch_spec, TRUE_GARCH, 400, seed=11)
    return synthesize_ohlc(returns.to_numpy(), np.sqrt(h), seed=11)


@pytest.fixture
def ohlc_csv(tmp_path, simulated_prices) -> str:
    path = os.path.join(tmp_path, "prices.csv")
    simulated_prices.to_csv(path)
    return path


def write_rows(tmp_path, rows, name="input.csv", header="date,open,high,low,close") -> str:
    path = os.path.join(tmp_path, name)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(header + "\n")
        for row in rows:
            handle.write(row + "\n")
    return path


def make_records(n: int = 300, seed: int = 3, dist: DistributionSpec = None) -> List[ForecastRecord]:
    """Records whose returns are drawn from the GARCH forecast they carry."""
    rng = np.random.default_rng(seed)
    dist = dist or DistributionSpec.normal()
    dates = pd.bdate_range("2010-01-04", periods=n)
    sigma_garch = 1.0 + 0.3 * np.sin(np.arange(n) / 15.0)
    sigma_gkyz = sigma_garch * np.exp(0.2 * rng.standard_normal(n))
    sigma_hybrid = 0.5 * (sigma_garch + sigma_gkyz) + 0.05 * rng.standard_normal(n)
    realized = sigma_garch * rng.standard_normal(n)
    return [
        ForecastRecord(
            date=dates[i],
            r_f=0.0,
            sigma_garch=float(sigma_garch[i]),
            sigma_hybrid=float(max(sigma_hybrid[i], 0.0)),
            sigma_gkyz=float(sigma_gkyz[i]),
            realized_return=float(realized[i]),
            distribution=dist,
        )
        for i in range(n)
    ]


@pytest.fixture
def records() -> List[ForecastRecord]:
    return make_records()


@pytest.fixture
def small_config(tmp_path, ohlc_csv) -> RunConfig:
    """A configuration small enough to run the whole chain in seconds."""
    return RunConfig(
        asset="SIM",
        input_csv=ohlc_csv,
        gru_layers=(4,),
        epochs=2,
        batch_size=64,
        precision=64,
        garch_window=150,
        gru_train_window=120,
        gru_test_window=50,
        validation_fraction=0.25,
        step=50,
        garch_starts=1,
        bootstrap_b=200,
        output_dir=os.path.join(tmp_path, "out"),
    )
