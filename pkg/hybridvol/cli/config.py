"""
Run configuration: a flat ``key=value`` file read with python-dotenv.
"""

import dataclasses
import os
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Optional, Tuple

from dotenv import dotenv_values

from ..distributions import DistributionKind, DistributionSpec
from ..garch import FitOptions, GarchFamily, GarchParams, GarchSpec, MeanModel
from ..gru import GruConfig
from ..hybrid import RollingPlan
from ..utils import ConfigError, ConstraintError, PipelineLogger

logger = PipelineLogger.get_logger(__name__)

# Starting shape values for the t families; estimation moves them.
DEFAULT_NU = 8.0
DEFAULT_XI = 1.0


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


@dataclass(frozen=True)
class RunConfig:
    """
    Every setting of a command. Field names are the keys of the configuration file.

    Attributes:
        asset (str): Label used in reports.
        input_csv (str): OHLC input file.
        forecasts_csv (str): Forecasts read by ``backtest``; ``<output_dir>/forecasts.csv`` when empty.
        return_scale (float): Multiplier of log returns.
        gkyz_window (int): Days per GKYZ estimate.
        garch_family (str): GARCH, GJR, EGARCH or APARCH.
        garch_p (int): Lagged variances.
        garch_q (int): Lagged shocks.
        mean_model (str): Constant or AR1.
        distribution (str): Normal, StudentT or SkewStudentT.
        garch_starts (int): Optimizer starting points per fit.
        garch_tolerance (float): Relative objective tolerance of a fit.
        forecast_clamp (bool): Bound forecasts by the window's fitted variance range.
        gru_layers (tuple): Units per GRU layer.
        gru_activation (str): Candidate activation.
        sequence_length (int): Days per GRU input window.
        batch_size (int): Sequences per mini-batch.
        epochs (int): Training epochs.
        learning_rate (float): Adam step size.
        dropout_rate (float): Dropout after each GRU layer.
        l2_lambda (float): Kernel penalty.
        precision (int): 32 or 64 bit training.
        garch_window (int): Returns per GARCH window.
        gru_train_window (int): Feature rows per GRU training window.
        gru_test_window (int): Feature rows per GRU test window.
        validation_fraction (float): Share of a training window held out.
        step (int): Rows between blocks.
        alphas (tuple): VaR tolerance levels.
        es_alpha (float): ES test tolerance level.
        bootstrap_b (int): ES bootstrap resamples.
        seed (int): Base seed of every random stream.
        threads (int): Worker cap.
        output_dir (str): Artifact directory.
        compare_models (tuple): ``FAMILY:DISTRIBUTION`` entries of ``compare``.
        simulate_days (int): Days generated by ``simulate``.
        simulate_params (tuple): ``alpha0, alpha_1, beta_1`` of the simulated GARCH(1,1).
        simulate_start_price (float): Close preceding the first simulated return.
        simulate_intraday_steps (int): Bridge steps per simulated day.
        simulate_overnight_share (float): Share of daily variance in the overnight gap.
    """

    asset: str = "asset"
    input_csv: str = ""
    forecasts_csv: str = ""
    return_scale: float = 100.0
    gkyz_window: int = 10
    garch_family: str = "GARCH"
    garch_p: int = 1
    garch_q: int = 1
    mean_model: str = "Constant"
    distribution: str = "Normal"
    garch_starts: int = 3
    garch_tolerance: float = 1e-8
    forecast_clamp: bool = False
    gru_layers: Tuple[int, ...] = (512, 256, 128)
    gru_activation: str = "relu"
    sequence_length: int = 6
    batch_size: int = 500
    epochs: int = 150
    learning_rate: float = 0.0009
    dropout_rate: float = 0.3
    l2_lambda: float = 0.00001
    precision: int = 32
    garch_window: int = 504
    gru_train_window: int = 1008
    gru_test_window: int = 504
    validation_fraction: float = 0.33
    step: int = 504
    alphas: Tuple[float, ...] = (0.05, 0.01)
    es_alpha: float = 0.05
    bootstrap_b: int = 10000
    seed: int = 0
    threads: int = 1
    output_dir: str = "output"
    compare_models: Tuple[str, ...] = field(default_factory=tuple)
    simulate_days: int = 1500
    simulate_params: Tuple[float, ...] = (0.05, 0.10, 0.85)
    simulate_start_price: float = 100.0
    simulate_intraday_steps: int = 78
    simulate_overnight_share: float = 0.2

    def __post_init__(self):
        for alpha in tuple(self.alphas) + (self.es_alpha,):
            if not 0.0 < alpha < 1.0:
                raise ConfigError(f"tolerance levels must lie in (0, 1), got {alpha}")
        if self.threads < 1:
            raise ConfigError(f"threads must be positive, got {self.threads}")
        if self.bootstrap_b < 1:
            raise ConfigError(f"bootstrap_b must be positive, got {self.bootstrap_b}")
        if len(self.simulate_params) != 3:
            raise ConfigError("simulate_params takes alpha0, alpha_1 and beta_1")

    @classmethod
    def from_mapping(cls, values: Dict[str, Optional[str]]) -> "RunConfig":
        """
        Coerce string values by field type; list fields are comma-separated.

        Raises:
            ConfigError: On an unknown key or a value of the wrong type.
        """
        types = {f.name: f for f in fields(cls)}
        kwargs: Dict[str, Any] = {}
        for key, raw in values.items():
            if key not in types:
                raise ConfigError(f"unknown configuration key {key!r}")
            default = types[key].default
            if default is dataclasses.MISSING:
                default = types[key].default_factory()
            raw = "" if raw is None else str(raw).strip()
            try:
                if isinstance(default, bool):
                    value: Any = _parse_bool(raw)
                elif isinstance(default, tuple):
                    items = [item.strip() for item in raw.split(",") if item.strip()]
                    if key == "gru_layers":
                        value = tuple(int(item) for item in items)
                    elif key == "compare_models":
                        value = tuple(items)
                    else:
                        value = tuple(float(item) for item in items)
                elif isinstance(default, int):
                    value = int(raw)
                elif isinstance(default, float):
                    value = float(raw)
                else:
                    value = raw
            except ValueError as e:
                raise ConfigError(f"invalid value for {key!r}: {e}") from None
            kwargs[key] = value
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str, overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """
        Read a configuration file and apply command-line overrides.

        Raises:
            FileNotFoundError: If the file does not exist.
            ConfigError: On an unknown key or an invalid value.
        """
        if not os.path.exists(path):
            raise FileNotFoundError(f"Configuration file does not exist at the provided path: {path}")
        config = cls.from_mapping(dotenv_values(path))
        logger.info(f"Loaded configuration from {path}")
        return config.with_overrides(overrides or {})

    def with_overrides(self, overrides: Dict[str, Any]) -> "RunConfig":
        present = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **present) if present else self

    def require_input(self) -> None:
        if not self.input_csv:
            raise ConfigError("input_csv is required for this command")
        if not os.path.exists(self.input_csv):
            raise FileNotFoundError(f"File does not exist at the provided path: {self.input_csv}")

    @property
    def forecasts_path(self) -> str:
        return self.forecasts_csv or os.path.join(self.output_dir, "forecasts.csv")

    @property
    def distribution_kind(self) -> DistributionKind:
        try:
            return DistributionKind(self.distribution)
        except ValueError:
            raise ConfigError(f"unknown distribution {self.distribution!r}") from None

    def garch_spec(self) -> GarchSpec:
        kind = self.distribution_kind
        if kind is DistributionKind.NORMAL:
            dist = DistributionSpec.normal()
        elif kind is DistributionKind.STUDENT_T:
            dist = DistributionSpec.student_t(DEFAULT_NU)
        else:
            dist = DistributionSpec.skew_student_t(DEFAULT_NU, DEFAULT_XI)
        try:
            return GarchSpec(GarchFamily(self.garch_family), self.garch_p, self.garch_q, MeanModel(self.mean_model), dist)
        except ValueError as e:
            if isinstance(e, ConstraintError):
                raise
            raise ConfigError(str(e)) from None

    def fit_options(self) -> FitOptions:
        return FitOptions(starts=self.garch_starts, tolerance=self.garch_tolerance)

    def gru_config(self) -> GruConfig:
        return GruConfig(
            layer_sizes=self.gru_layers,
            sequence_length=self.sequence_length,
            batch_size=self.batch_size,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            dropout_rate=self.dropout_rate,
            l2_lambda=self.l2_lambda,
            seed=self.seed,
            precision=self.precision,
            activation=self.gru_activation,
        )

    def rolling_plan(self) -> RollingPlan:
        return RollingPlan(
            garch_window=self.garch_window,
            gru_train_window=self.gru_train_window,
            gru_test_window=self.gru_test_window,
            validation_fraction=self.validation_fraction,
            step=self.step,
        )

    def simulation_model(self) -> Tuple[GarchSpec, GarchParams]:
        """GARCH(1,1) with the configured mean model and distribution, and ``simulate_params``."""
        spec = replace(self.garch_spec(), family=GarchFamily.GARCH, p=1, q=1)
        alpha0, alpha1, beta1 = self.simulate_params
        params = GarchParams(alpha0=alpha0, alpha=(alpha1,), beta=(beta1,))
        params.validate(spec)
        return spec, params

    def model_label(self) -> str:
        return self.garch_spec().label

    def for_model(self, entry: str) -> "RunConfig":
        """Copy with the family and distribution of a ``FAMILY:DISTRIBUTION`` entry."""
        family, sep, distribution = entry.partition(":")
        if not sep or not family or not distribution:
            raise ConfigError(f"model entry must be FAMILY:DISTRIBUTION, got {entry!r}")
        config = replace(self, garch_family=family.strip(), distribution=distribution.strip())
        config.garch_spec()
        return config

    def to_dict(self) -> Dict[str, Any]:
        out = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}
