"""echosim: opinion dynamics on adaptive networks with algorithmic feeds.

Subpackages by concern:

- :mod:`echosim.graph` — the mutable simple-graph structure and the network
  generators (ER, SBM, torus lattice, random regular, power-law
  configuration model, two-community LFR).
- :mod:`echosim.dynamics` — the probability functions and the step engine
  (single-step reference plus the compiled fast path).
- :mod:`echosim.metrics` — bimodality coefficient, balance, neighbor-average
  opinions, density maps, and the outcome classifier.
- :mod:`echosim.harness` — replicated phi sweeps, steady-state detection,
  experiment presets, CSV results.
- :mod:`echosim.io` — edge-list / opinion-file / density-grid formats and
  empirical dataset analysis.
- :mod:`echosim.cli` — the `echosim` command.
"""

__version__ = "0.1.0"
