from .csv_strategies import (LocalCsvLoadStrategy, LocalForecastCsvExtractStrategy,
                             LocalJsonLoadStrategy, LocalOhlcCsvExtractStrategy)
