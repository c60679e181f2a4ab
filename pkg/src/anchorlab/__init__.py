"""Attachment-anchor geometry, statistics and evaluation for grasp-point prediction."""
__version__ = "0.1.0"
