"""Numerical laboratory for single-qubit arbitrated quantum signature schemes."""
from .aqs import KeyPair, RotationFamily, SchemeConfig, preset, sign, verify_exact
from .forgery import check_forgeable, classify_table1, construct_witness, uniform_forgery
from .detection import detection_prob, min_detection_prob, sweep

__version__ = "0.1.0"
