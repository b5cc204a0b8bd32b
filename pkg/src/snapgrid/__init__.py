"""Feature-based event extraction compiled into vote-carrying rules."""

__version__ = "0.1.0"
