"""Glance-then-scrutinize video anomaly grounding and understanding toolkit.

The package is organised around a pure numeric core (:mod:`gts.metrics`,
:mod:`gts.curve`), a JSON-over-HTTP backend gateway with deterministic mock
servers (:mod:`gts.gateway`), the two pipeline phases (:mod:`gts.glance`,
:mod:`gts.scrutinize`), dataset and run persistence (:mod:`gts.dataset`),
the benchmark engine (:mod:`gts.bench`), and a FastAPI service plus thin
CLI client (:mod:`gts.service`, :mod:`gts.cli`).
"""

__version__ = "0.1.0"
