"""Circuit problem solving with LLM orchestration, SPICE verification, and human review."""

__version__ = "0.1.0"
