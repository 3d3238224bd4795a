"""Early outbreak / non-outbreak classification from incidence time series.

Simulates noisy SIR incidence, slices labeled windows around reproduction
-number crossings, extracts statistical and early-warning features, and
trains/evaluates four classifier families, with an evaluation and
empirical-data toolkit alongside.
"""

from . import empirical, features, learners, metrics, sim, windows

__version__ = "0.1.0"

__all__ = ["empirical", "features", "learners", "metrics", "sim", "windows", "__version__"]
