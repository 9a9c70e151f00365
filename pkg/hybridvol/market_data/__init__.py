from .prices import (DEFAULT_RETURN_SCALE, ColumnSchema, PriceSeries,
                     ReturnSeries, StatsSummary, descriptive_stats,
                     load_ohlc_csv, log_returns, write_value_csv)
from .range_volatility import (VolatilityEstimateSeries, gkyz_daily_terms,
                               gkyz_volatility, scale_gkyz)
from .synthetic import synthesize_ohlc
