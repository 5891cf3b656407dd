"""Numerical tolerances shared across the package."""

EPS_GEOM = 1e-9
EPS_LP = 1e-8
EPS_DUAL = 1e-7
DELTA_SLATER = 1e-6

# internal zero test for normalized vectors inside double description
EPS_DD = 1e-10

MAX_IMAGE_DIM = 4
