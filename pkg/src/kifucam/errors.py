"""Exception hierarchy for the pipeline.

Errors that abort an operation are exceptions; conditions the pipeline is
expected to ride through (rejected corner match, tracking degradation) are
expressed through flags on result types instead.
"""


class KifucamError(Exception):
    """Base class for all package errors."""


# --- preprocessing / edge maps ---

class EmptyEdgeMap(KifucamError):
    """Edge map contains no set pixels."""


# --- grid location ---

class GridNotFound(KifucamError):
    """Grid location failed; ``step`` names the stage that gave up."""

    def __init__(self, step: str, detail: str = ""):
        self.step = step
        self.detail = detail
        super().__init__(f"grid not found at step '{step}'" + (f": {detail}" if detail else ""))


class InsufficientPencils(KifucamError):
    """Fewer than two concurrent-line families of the required size."""


class DegenerateHorizon(KifucamError):
    """The two vanishing points coincide; no horizon can be drawn."""


class NoEquispacedSubset(KifucamError):
    """No equispaced arrangement with enough member support exists."""


class NoDiagonal(KifucamError):
    """No aligned subset of coupled intersections long enough to be a grid diagonal."""


# --- grid tracking ---

class CornerOutOfFrame(KifucamError):
    """A grid corner lies too close to the frame border to cut a template."""

    def __init__(self, anchor: str):
        self.anchor = anchor
        super().__init__(f"corner {anchor} too close to frame border")


class BandEmpty(KifucamError):
    """Too few edge pixels in the regression band around a border segment."""


# --- stone detection ---

class CoronaClipped(KifucamError):
    """The scan annulus around an intersection leaves the frame."""


# --- vacancy ---

class NoEmptyIntersections(KifucamError):
    """The board has no empty intersections; empty statistics are frozen."""


# --- sequencing ---

class IllegalMove(KifucamError):
    """Move onto an occupied point, or a forbidden suicide."""


class InconsistentTransition(KifucamError):
    """A validated position change fits no move/capture/relocation pattern."""


class CorrectionIllegal(KifucamError):
    """An edited game record does not replay legally."""


class SgfInvalid(KifucamError):
    """SGF text could not be parsed or does not replay legally."""


# --- rendering / sessions ---

class DegeneratePose(KifucamError):
    """Camera pose produces a singular board-to-frame projection."""


class SourceLost(KifucamError):
    """The frame source disappeared or ended unexpectedly."""
