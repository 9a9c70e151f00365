from .innovations import (DistributionKind, DistributionSpec, abs_moment, cdf,
                          density, log_density, quantile, sample,
                          tail_expectation)
