"""Transit-aware housing analytics engine.

Ingests ZIP-level monthly price history, transit geometry, and ZIP
boundary polygons; answers spatial, temporal, forecasting, and
constrained natural-language questions through a library API, a CLI,
and an HTTP service.
"""

__version__ = "0.1.0"
