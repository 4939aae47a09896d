"""
Sparse parametric VAR(∞) toolkit.

Library and command-line interface for high-dimensional time series whose
lag matrices decay through a small set of real rates and damped cosine/sine
pairs:

- Simulation of SPVAR(∞) and VARMA(1,1) processes
- ℓ1-regularized estimation by block coordinate descent (joint and rowwise)
- High-dimensional BIC for model orders and regularization
- Stationarity diagnostics and impulse responses
- Granger-causal networks with short/long-term classification
- Rolling one-step-ahead forecast evaluation
"""

__version__ = "1.0.0"
