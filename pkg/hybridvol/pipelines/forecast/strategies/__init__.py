from .forecast_strategies import (BacktestTransformStrategy,
                                  FeatureTransformStrategy, ForecastState,
                                  HybridTransformStrategy,
                                  ModelComparisonTransformStrategy,
                                  ReturnsTransformStrategy,
                                  RollingGarchTransformStrategy)
from .market_strategies import (DescriptiveStatsTransformStrategy,
                                GarchFitTransformStrategy,
                                SimulatedOhlcExtractStrategy)
