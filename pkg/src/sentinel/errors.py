"""Exception hierarchy for the warning engine.

Every error carries a stable machine-readable ``code`` (used by the HTTP
layer) and, where it helps debugging, a ``field`` path into the offending
document.
"""

from __future__ import annotations


class SentinelError(Exception):
    """Base class for all engine errors."""

    code = "engine_error"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field

    def to_payload(self) -> dict:
        payload = {"code": self.code, "message": str(self)}
        if self.field:
            payload["field"] = self.field
        return payload


# --- crisis network -------------------------------------------------------

class CycleDetected(SentinelError):
    code = "cycle_detected"


class UnnormalizedRow(SentinelError):
    code = "unnormalized_row"


class DanglingParent(SentinelError):
    code = "dangling_parent"


class UnknownVariable(SentinelError):
    code = "unknown_variable"


class ZeroProbabilityEvidence(SentinelError):
    code = "zero_probability_evidence"


# --- state space ----------------------------------------------------------

class AsymmetricAdjacency(SentinelError):
    code = "asymmetric_adjacency"


class UnknownNodeReference(SentinelError):
    code = "unknown_node_reference"


class Unreachable(SentinelError):
    code = "unreachable"


# --- filtering / projection -----------------------------------------------

class DimensionMismatch(SentinelError):
    code = "dimension_mismatch"


class InconsistentHorizons(SentinelError):
    code = "inconsistent_horizons"


class ImpossibleObservation(SentinelError):
    code = "impossible_observation"


class UnregisteredSignalType(SentinelError):
    code = "unregistered_signal_type"


class NonConsecutivePeriod(SentinelError):
    code = "non_consecutive_period"


# --- scenario / session ----------------------------------------------------

class SchemaVersionMismatch(SentinelError):
    code = "schema_version_mismatch"


class ValidationError(SentinelError):
    code = "validation_error"


class InvalidOverride(SentinelError):
    code = "invalid_override"


class SessionNotFound(SentinelError):
    code = "session_not_found"


class ScenarioNotFound(SentinelError):
    code = "scenario_not_found"
