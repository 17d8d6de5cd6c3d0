"""
NSATP

Multi-step public transport arrival time prediction with series stationarization and
learned non-stationary effect recovery.
"""

from ._version import __version__
