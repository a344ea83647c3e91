from knotgc.integrate.gaussmap import gauss, gauss_jacobian
from knotgc.integrate.core import MCEstimate
from knotgc.integrate.cycles import CircleCycle, ResolutionSphereCycle, SegmentCycle
from knotgc.integrate.linking import linking, linking_preset
from knotgc.integrate.pairing import PairingProblem, pairing
from knotgc.integrate.covering import covering_check, covering_trials

__all__ = [
    "gauss",
    "gauss_jacobian",
    "MCEstimate",
    "CircleCycle",
    "ResolutionSphereCycle",
    "SegmentCycle",
    "linking",
    "linking_preset",
    "PairingProblem",
    "pairing",
    "covering_check",
    "covering_trials",
]
