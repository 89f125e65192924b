"""
Configuration management for the QDP lab.

Loads environment variables and provides validated settings to all modules.
"""

import os
from dotenv import load_dotenv

load_dotenv()


# Desk-scale Caps
CAP_DENSE = int(os.getenv("QDP_LAB_CAP_DENSE", str(2**12)))
CAP_PRODUCT = int(os.getenv("QDP_LAB_CAP_PRODUCT", str(2**22)))
CAP_CODE = int(os.getenv("QDP_LAB_CAP_CODE", str(2**24)))
CAP_ENSEMBLE = int(os.getenv("QDP_LAB_CAP_ENSEMBLE", str(2**20)))
CAP_FIELD = int(os.getenv("QDP_LAB_CAP_FIELD", str(2**16)))

# Trial Processing
WORKERS = int(os.getenv("QDP_LAB_WORKERS", "4"))
CHUNK_SIZE = int(os.getenv("QDP_LAB_CHUNK_SIZE", "65536"))

# Tolerances
KERNEL_TOL = float(os.getenv("QDP_LAB_KERNEL_TOL", "1e-12"))
AMPLITUDE_TOL = float(os.getenv("QDP_LAB_AMPLITUDE_TOL", "1e-10"))
NORM_TOL = float(os.getenv("QDP_LAB_NORM_TOL", "1e-12"))

# Experiments
WEIGHT_MARGIN = int(os.getenv("QDP_LAB_WEIGHT_MARGIN", "2"))

# Logging
LOG_FILE = os.getenv("QDP_LAB_LOG_FILE", "qdp_lab.log")

# Validation
for _name, _value in {
    "QDP_LAB_CAP_DENSE": CAP_DENSE,
    "QDP_LAB_CAP_PRODUCT": CAP_PRODUCT,
    "QDP_LAB_CAP_CODE": CAP_CODE,
    "QDP_LAB_CAP_ENSEMBLE": CAP_ENSEMBLE,
    "QDP_LAB_CAP_FIELD": CAP_FIELD,
    "QDP_LAB_WORKERS": WORKERS,
    "QDP_LAB_CHUNK_SIZE": CHUNK_SIZE,
}.items():
    if _value <= 0:
        raise ValueError(f"{_name} must be positive, got {_value}. Check your .env file.")

if WEIGHT_MARGIN < 0:
    raise ValueError(f"QDP_LAB_WEIGHT_MARGIN must be nonnegative, got {WEIGHT_MARGIN}.")
