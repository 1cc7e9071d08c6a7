"""Core infrastructure modules for MBM Forensics."""
