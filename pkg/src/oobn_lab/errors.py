"""Exception hierarchy.

Every error carries a stable ``code`` (the class name) and a ``details``
dict so CLI and HTTP layers can emit machine-readable diagnostics without
string-parsing messages.
"""

from __future__ import annotations

from typing import Any


class OobnLabError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict[str, Any]:
        return {"error": self.code, "message": self.message, **self.details}


# -- network construction ----------------------------------------------------

class SchemaError(OobnLabError):
    pass


class CycleDetected(OobnLabError):
    pass


class CptShapeMismatch(OobnLabError):
    pass


class RowNotNormalized(OobnLabError):
    pass


class DanglingReference(OobnLabError):
    pass


class UnknownVariable(OobnLabError):
    pass


class InvalidEvidence(OobnLabError):
    pass


class PartialAssignment(OobnLabError):
    pass


class OverlappingSets(OobnLabError):
    pass


# -- inference ----------------------------------------------------------------

class TooLargeForEnumeration(OobnLabError):
    pass


class ZeroProbabilityEvidence(OobnLabError):
    pass


# -- OOBN composition ----------------------------------------------------------

class InputHasCpt(OobnLabError):
    pass


class OutputMissingCpt(OobnLabError):
    pass


class UnknownTemplateReference(OobnLabError):
    pass


class TemplateCycle(OobnLabError):
    pass


class SignatureMismatch(OobnLabError):
    pass


class UnboundInput(OobnLabError):
    pass


class NameCollision(OobnLabError):
    pass


class MissingStandInPrior(OobnLabError):
    pass


# -- sensitivity ----------------------------------------------------------------

class DegenerateRow(OobnLabError):
    pass


class HypothesisObserved(OobnLabError):
    pass


# -- learning / data pipeline ---------------------------------------------------

class EmptyRowWithoutSmoothing(OobnLabError):
    pass


class NonMonotoneBins(OobnLabError):
    pass


class UnitMismatch(OobnLabError):
    pass


class SumOutOfRange(OobnLabError):
    pass


class MissingColumn(OobnLabError):
    pass


class UnparseableCell(OobnLabError):
    pass


# -- scenarios / calibration ------------------------------------------------------

class UnknownPreset(OobnLabError):
    pass


class CalibrationFailed(OobnLabError):
    pass
