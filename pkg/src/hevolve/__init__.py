"""Evolutionary search over heuristic programs.

A genetic loop whose variation operators are chat-completion prompts,
instrumented with two entropy-based population-diversity metrics and a
harmony-search stage that tunes numeric parameters of elite heuristics.
"""

__version__ = "0.1.0"
