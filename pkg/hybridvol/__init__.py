"""GARCH-family and hybrid GARCH-GRU volatility forecasting with VaR/ES backtesting."""

__version__ = "0.1.0"
