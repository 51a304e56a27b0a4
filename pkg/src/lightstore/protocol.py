"""Timeline bookkeeping for Raman-interrupted storage.

Raman transfers are instantaneous: between the two pulses the optical phase
clock is frozen and the excitation sits in the spin coherence, which decays
exponentially with ``spin_lifetime``.  A counter-propagating Raman pair flips
the phase-matching condition and sends the retrieval backward.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

from .errors import DomainError, TooLateError


class Scheme(str, Enum):
    SHBSL = "SHBSL"
    AFC = "AFC"


class Direction(str, Enum):
    FORWARD = "Forward"
    BACKWARD = "Backward"


@dataclass(frozen=True)
class ProtocolTimeline:
    """Event times in seconds.

    ``retrieval_direction`` is the direction the Raman pair is set up for;
    ``Backward`` means the two Raman pulses counter-propagate.
    """

    scheme: Scheme
    signal_in_time: float
    raman1_time: float | None = None
    raman2_time: float | None = None
    comb_period_T: float | None = None
    spin_lifetime: float = math.inf
    retrieval_direction: Direction = Direction.FORWARD
    transfer_efficiency: float = 1.0
    group_delay: float = 0.0  # SHBSL without Raman: the pulse simply exits after its slow-light delay

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "retrieval_direction", Direction(self.retrieval_direction))
        if self.scheme is Scheme.AFC and not (self.comb_period_T is not None and self.comb_period_T > 0):
            raise DomainError("AFC timelines need a positive comb_period_T")
        if self.raman1_time is not None and self.raman2_time is not None and self.raman2_time < self.raman1_time:
            raise DomainError("raman2_time must not precede raman1_time")
        if self.group_delay < 0:
            raise DomainError(f"group_delay must be >= 0, got {self.group_delay}")
        if not self.spin_lifetime > 0:
            raise DomainError(f"spin_lifetime must be > 0, got {self.spin_lifetime}")
        if not 0.0 < self.transfer_efficiency <= 1.0:
            raise DomainError(f"transfer_efficiency must be in (0, 1], got {self.transfer_efficiency}")

    @property
    def has_raman_pair(self) -> bool:
        return self.raman1_time is not None and self.raman2_time is not None

    def shifted(self, dt: float) -> "ProtocolTimeline":
        def s(x):
            return None if x is None else x + dt

        return replace(self, signal_in_time=self.signal_in_time + dt,
                       raman1_time=s(self.raman1_time), raman2_time=s(self.raman2_time))


@dataclass(frozen=True)
class RetrievalPrediction:
    retrieval_time: float
    direction: Direction
    amplitude_factor: float
    phase_matched: bool = True


def predict_retrieval(timeline: ProtocolTimeline) -> RetrievalPrediction:
    tl = timeline
    if not tl.has_raman_pair:
        if tl.raman1_time is not None or tl.raman2_time is not None:
            warnings.warn("a single Raman pulse has no effect on retrieval; ignoring it", stacklevel=2)
        if tl.scheme is Scheme.AFC:
            return RetrievalPrediction(tl.signal_in_time + tl.comb_period_T, Direction.FORWARD, 1.0)
        return RetrievalPrediction(tl.signal_in_time + tl.group_delay, Direction.FORWARD, 1.0)

    r1, r2 = tl.raman1_time, tl.raman2_time
    if r1 < tl.signal_in_time:
        raise DomainError("raman1_time precedes the signal")
    factor = math.exp(-(r2 - r1) / tl.spin_lifetime) * tl.transfer_efficiency
    if tl.scheme is Scheme.SHBSL:
        # the dipoles re-radiate as soon as they are back on the optical transition
        return RetrievalPrediction(r2, Direction.FORWARD, factor)
    T = tl.comb_period_T
    elapsed = r1 - tl.signal_in_time
    # a pulse exactly at the echo time may round past it once the timeline is shifted
    slack = 4 * math.ulp(max(abs(r1), abs(tl.signal_in_time)))
    if elapsed > T + slack:
        raise TooLateError(f"first Raman pulse arrives {elapsed - T:.3g} s after the echo has already rephased")
    return RetrievalPrediction(r2 + max(T - elapsed, 0.0), tl.retrieval_direction, factor)


def compose_efficiency(base_eta: float, prediction: RetrievalPrediction) -> float:
    """Retrieval efficiency after spin storage: intensity scales with the amplitude factor squared."""
    if not 0.0 <= base_eta <= 1.0:
        raise DomainError(f"base_eta must be in [0, 1], got {base_eta}")
    return base_eta * prediction.amplitude_factor**2
