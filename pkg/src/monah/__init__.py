"""Multimodal narrative weaving and rapport-prediction evaluation."""

__version__ = "0.1.0"
