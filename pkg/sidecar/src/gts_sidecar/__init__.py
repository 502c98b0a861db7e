"""Serving shim for the video-analysis wire protocol.

Implements all nine endpoints with deterministic content-based featurizers
so the pipeline can run against real HTTP backends without GPU models;
transformer-backed adapters can be swapped in through configuration.
"""

__version__ = "0.1.0"
