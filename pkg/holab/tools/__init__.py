"""Utilities for logging, caching, keyed random streams, ordered parallel maps, directory management, timing and file output within the holab library."""
