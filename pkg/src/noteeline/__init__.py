"""Engine that expands timestamped shorthand micronotes into full personalized
notes with an LLM, and evaluates the results (style match, consistency,
redundancy, session efficiency)."""

__version__ = "0.1.0"
