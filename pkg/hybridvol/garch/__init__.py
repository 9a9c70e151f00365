from .estimation import FitOptions, ParameterCodec, fit, log_likelihood, transformed_gradient
from .forecasting import forecast_one_step, simulate
from .recursions import variance_filter
from .specs import (GarchFamily, GarchFit, GarchParams, GarchSpec, MeanModel,
                    unconditional_variance)
