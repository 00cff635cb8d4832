"""Exception types shared across the package.

Exceptions that represent measured outcomes (blow-up, Picard stagnation,
partition admissibility running out of refinements) carry the partial
results so the caller can still report them.
"""

from __future__ import annotations


class VslbError(Exception):
    """Base class for package errors."""


class ConfigError(VslbError):
    """Invalid or inconsistent run configuration (CLI exit code 1)."""


class CheckpointFormatError(VslbError):
    """Checkpoint file violates the VSLB binary layout."""


class BlowUpError(VslbError):
    """Integration produced a non-finite state (CLI exit code 2).

    Attributes carry the last finite time and whatever trajectory /
    diagnostics had been produced up to that point.
    """

    def __init__(self, time, trajectory=None, diagnostics=None):
        super().__init__(f"non-finite state encountered, last finite time t={time:.6g}")
        self.time = time
        self.trajectory = trajectory
        self.diagnostics = diagnostics


class PicardFailure(VslbError):
    """Picard iteration on one slab did not reach tolerance (exit code 3).

    Carries the slab index, the iteration report, and the results of the
    slabs completed before the failure; the auditor treats this as data.
    """

    def __init__(self, slab_index, report, partial=None):
        super().__init__(
            f"picard iteration failed to converge on slab {slab_index} "
            f"after {report.iterations} iterations "
            f"(last residual {report.residuals[-1]:.3e})"
        )
        self.slab_index = slab_index
        self.report = report
        self.partial = partial


class AdmissibilityError(VslbError):
    """No admissible partition within the refinement budget (exit code 3).

    The attached partition has ``admissible`` flags evaluated for every
    slab; stubborn slab indices are listed.
    """

    def __init__(self, partition, stubborn):
        super().__init__(
            f"partition admissibility unreachable; {len(stubborn)} slab(s) "
            f"still violate the threshold: indices {list(stubborn)}"
        )
        self.partition = partition
        self.stubborn = list(stubborn)
