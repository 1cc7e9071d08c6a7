"""Utility modules for MBM Forensics."""
