"""Desk-scale SDWN control plane.

Simulated Wi-Fi agents host per-station virtual APs; a controller loop
builds a smoothed RSSI attenuation matrix and migrates stations between
APs for mobility and load balance, steerable through a JSON management
API.
"""

__version__ = "0.1.0"
