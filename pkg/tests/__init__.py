"""Test suite for MBM Forensics."""
