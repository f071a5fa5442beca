"""Exception hierarchy shared by every module.

The CLI maps failures to exit codes through the ``exit_code`` attribute:
2 for malformed inputs, 3 for violated geometric preconditions, 4 for an
exhausted contact-adjustment schedule. Subclasses accept keyword context
(e.g. ``frame_index=7``) which the CLI serializes into its error JSON.
"""

from __future__ import annotations


class BinomapError(Exception):
    """Base class for all package errors."""

    exit_code = 1

    def __init__(self, message: str, **info):
        super().__init__(message)
        self.info = dict(info)


class InputFormatError(BinomapError):
    """Unreadable or schema-violating input file."""

    exit_code = 2


class UnknownScenario(InputFormatError):
    """Requested synthetic scenario name is not registered."""


class PreconditionError(BinomapError):
    """A documented operation precondition was violated."""

    exit_code = 3


class DegenerateInput(PreconditionError):
    """Input geometry lacks the size or rank the operation requires."""


class InvalidRotation(PreconditionError):
    """Matrix is not orthonormal with determinant +1 within tolerance."""


class DegenerateHand(PreconditionError):
    """Finger rays are collinear; the palm frame is undefined."""


class NoValidPoint(PreconditionError):
    """Organized cloud has no valid entry to look up."""


class BehindCamera(PreconditionError):
    """Point has non-positive depth and cannot be projected."""


class Unreachable(PreconditionError):
    """Contact retargeting could not realize the target distance."""


class DegenerateGeometry(PreconditionError):
    """Scaling reference collapses (anchor coincides with the start)."""


class EmptySlice(PreconditionError):
    """Horizontal slice of a cloud contains no points."""


class NoAlignedPair(PreconditionError):
    """No point pair in the slice is aligned with the measurement axis."""


class ArmDesynchronized(PreconditionError):
    """Inter-arm distance varies although the skill requires it constant."""


class AllAttemptsFailed(BinomapError):
    """Every contact-adjustment attempt was rejected by the verifier.

    Carries the full attempt log and the last candidate trajectory so
    callers can inspect or persist the failed schedule.
    """

    exit_code = 4

    def __init__(self, message: str, attempts=None, last_trajectory=None):
        super().__init__(message)
        self.info = {}
        self.attempts = list(attempts) if attempts is not None else []
        self.last_trajectory = last_trajectory
