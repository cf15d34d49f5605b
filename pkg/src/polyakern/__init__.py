"""Positive-definite kernels built from positively supported distributions,
random feature maps for them, and ridge learning on top."""

__version__ = "0.1.0"
