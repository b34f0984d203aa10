"""Typed errors raised by the ledger. The CLI prints the class name verbatim."""


class LedgerError(Exception):
    """Base class for every domain error in this package."""


# -- block / chain validation ------------------------------------------------

class LinkageMismatch(LedgerError):
    pass


class PowInvalid(LedgerError):
    pass


class SignatureInvalid(LedgerError):
    pass


class UnknownIssuer(LedgerError):
    pass


class WritePermissionDenied(LedgerError):
    pass


class PayloadInvalid(LedgerError):
    pass


# canonical_encode rejects the same field-invariant violations
InvalidPayload = PayloadInvalid


class DuplicateFulfillment(LedgerError):
    pass


# -- corrections ---------------------------------------------------------------

class UnknownTarget(LedgerError):
    pass


class IssuerMismatch(LedgerError):
    pass


class AlreadyInvalidated(LedgerError):
    pass


class TargetNotAchievement(LedgerError):
    pass


# -- contract language ---------------------------------------------------------

class ContractSyntaxError(LedgerError):
    """Source text does not match the grammar; carries line/column."""

    def __init__(self, line, col, expected):
        super().__init__(f"line {line} col {col}: expected {expected}")
        self.line = line
        self.col = col
        self.expected = expected


class SemanticError(LedgerError):
    pass


class UnknownOrg(LedgerError):
    pass


# -- engine queries -------------------------------------------------------------

class NotADegreeContract(LedgerError):
    pass


class UnknownBlock(LedgerError):
    pass


# -- consensus ------------------------------------------------------------------

class NonceExhausted(LedgerError):
    pass


class EmptyCandidateSet(LedgerError):
    pass


# -- simulator / light clients ----------------------------------------------------

class ScenarioInvalid(LedgerError):
    def __init__(self, index, reason):
        super().__init__(f"event {index}: {reason}")
        self.index = index
        self.reason = reason


class HeaderChainInvalid(LedgerError):
    def __init__(self, height, reason=""):
        msg = f"height {height}" + (f": {reason}" if reason else "")
        super().__init__(msg)
        self.height = height
