"""Mask strategies and the masked layer."""
