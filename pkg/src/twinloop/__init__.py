"""twinloop: deterministic testbed for twin-assisted, knowledge-defined network management."""

__version__ = "0.1.0"
