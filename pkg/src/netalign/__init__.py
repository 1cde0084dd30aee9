"""Precoding-based network alignment for three-unicast networks with delays."""

__version__ = "0.1.0"
