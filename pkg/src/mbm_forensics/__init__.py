"""
MBM Forensics - H.264 recompression detection.

Measures how many macroblock modes (type + motion vectors) change between
successive re-encodes of a suspect video at a constant quality scale and
classifies the resulting feature vector with an RBF support vector machine.
"""

__version__ = "0.1.0"
__author__ = "MBM Forensics Team"
