"""Cell-free massive MIMO ISAC beamforming toolkit.

Simulates a network of distributed transmit/receive access points that
jointly serve single-antenna users and illuminate a point target, and
optimizes the downlink precoders either through an iterative two-stage
exchange between the APs and a central unit or through a centralized
joint design used as a baseline.
"""

from .config import SystemConfig, default_config
from .errors import GlobalInfeasible, NullspaceEmpty

__all__ = [
    "SystemConfig",
    "default_config",
    "GlobalInfeasible",
    "NullspaceEmpty",
]

__version__ = "0.1.0"
