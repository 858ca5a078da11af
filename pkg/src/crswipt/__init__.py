"""Outage, throughput and energy-efficiency analysis of a two-way overlay
spectrum-sharing network with hybrid TS/PS SWIPT relays and non-linear EH."""

__version__ = "0.1.0"
