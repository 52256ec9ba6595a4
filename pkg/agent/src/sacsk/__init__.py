"""Soft actor-critic agent with a recurrent encoder and spline function heads.

The package trains against the swiptmec environment server over its
line-delimited JSON wire protocol. It never imports the simulator; the only
coupling is the server's documented external interface.
"""

__version__ = "0.1.0"
