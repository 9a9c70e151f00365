from .coverage_tests import (christoffersen_test, exceedance_residuals,
                             kupiec_from_counts, kupiec_test, mcneil_frey_test)
from .metrics import (MincerZarnowitz, PointMetrics, TestResult, dm_test,
                      mincer_zarnowitz, point_metrics)
from .report import (BacktestReport, CoverageResult, build_report,
                     expected_count, format_expected_count, format_hit_ratio,
                     reports_document)
