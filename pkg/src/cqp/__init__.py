"""CQP: an executable quantum process calculus.

Parser and linear type checker for the process language, a labelled
transition semantics over pure, mixed and probabilistic configurations, and
an automated probabilistic-branching-bisimilarity checker for verifying
protocol models against specification processes.
"""

__version__ = "0.1.0"
