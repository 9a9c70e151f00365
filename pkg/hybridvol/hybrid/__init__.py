from .plan import Block, RollingPlan
from .rolling import (FeatureMatrix, ForecastRecord, GarchForecastSeries,
                      HybridResult, build_features, read_forecasts_csv,
                      forecasts_csv_frame, records_to_frame,
                      rolling_garch_forecasts, run_hybrid,
                      write_forecasts_csv)
