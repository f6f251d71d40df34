"""Figure scripts for simulator result files (CSV tables and density grids).

This package deliberately has no dependency on the simulator: it consumes
only the documented on-disk formats.
"""

__version__ = "0.1.0"
