"""Simulated SIP authentication: four handshakes, an adversary, and a harness around them."""

__version__ = "0.1.0"
