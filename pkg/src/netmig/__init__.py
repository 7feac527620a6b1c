"""Agent-based simulation of network migration to PCE and SDN."""

__version__ = "0.1.0"
