"""RDEx-SOP differential evolution with a fixed-budget benchmark harness."""

__version__ = "0.1.0"
