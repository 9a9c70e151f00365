from .measures import (HitSequence, RiskForecast, es_forecast, hit_sequence,
                       risk_csv_frame, risk_forecasts, risk_frame,
                       var_forecast, write_risk_csv)
