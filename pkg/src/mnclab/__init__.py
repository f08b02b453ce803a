"""Numerical laboratory for measures of noncompactness and semi-homogeneous operators on discretized L_p spaces."""

__version__ = "0.1.0"
