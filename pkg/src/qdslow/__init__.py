"""Non-Markovian dephasing and slow light in a driven three-level quantum dot."""

__version__ = "0.1.0"
