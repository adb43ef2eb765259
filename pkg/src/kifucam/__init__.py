"""Unattended reconstruction of Go game records from camera frames."""

__version__ = "0.1.0"
