"""Tests for the mmWave low-resolution scheduling tools."""
