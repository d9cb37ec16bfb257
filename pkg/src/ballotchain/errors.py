"""Shared error codes and exception types.

Machine codes are stable strings; the HTTP layer maps them one-to-one so
property tests can cross the wire unchanged.
"""


class BallotChainError(Exception):
    """Base class; ``code`` is the stable machine-readable identifier."""

    code = "Internal"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.details = details


# --- ledger reject reasons (transaction verification) ---

BAD_SIGNATURE = "BadSignature"
OUTSIDE_WINDOW = "OutsideWindow"
INSUFFICIENT_BALANCE = "InsufficientBalance"
BAD_NONCE = "BadNonce"
UNKNOWN_RECIPIENT = "UnknownRecipient"
DOUBLE_VOTE = "DoubleVote"
DUPLICATE_MINT = "DuplicateMint"

REJECT_REASONS = (
    BAD_SIGNATURE,
    OUTSIDE_WINDOW,
    INSUFFICIENT_BALANCE,
    BAD_NONCE,
    UNKNOWN_RECIPIENT,
    DOUBLE_VOTE,
    DUPLICATE_MINT,
)


class TxRejected(BallotChainError):
    """A transaction failed verification; ``reason`` is one of REJECT_REASONS."""

    code = "TxRejected"

    def __init__(self, reason: str, message: str = "", **details):
        super().__init__(message or reason, **details)
        self.reason = reason
        self.code = reason


# --- chain / block errors ---

class DecodeError(BallotChainError):
    code = "DecodeError"


class BuildRejected(BallotChainError):
    """Block assembly hit an invalid transaction at ``index``."""

    code = "BuildRejected"

    def __init__(self, index: int, reason: str):
        super().__init__(f"invalid tx at {index}: {reason}", index=index, reason=reason)
        self.index = index
        self.reason = reason


class NonLinking(BallotChainError):
    code = "NonLinking"


class NotFinalized(BallotChainError):
    code = "NotFinalized"


class InvalidTx(BallotChainError):
    code = "InvalidTx"


class InvalidChain(BallotChainError):
    code = "InvalidChain"


class NoCanonicalChain(BallotChainError):
    code = "NoCanonicalChain"


class CorruptStore(BallotChainError):
    code = "CorruptStore"


# --- registry (Server-A) ---

class DuplicateNationalId(BallotChainError):
    code = "DuplicateNationalId"


class MalformedField(BallotChainError):
    code = "MalformedField"

    def __init__(self, field: str, message: str = ""):
        super().__init__(message or f"malformed field: {field}", field=field)
        self.field = field


class NotFound(BallotChainError):
    code = "NotFound"


class FieldMismatch(BallotChainError):
    code = "FieldMismatch"

    def __init__(self, field: str):
        super().__init__(f"registry mismatch on {field}", field=field)
        self.field = field


class Underage(BallotChainError):
    code = "Underage"


class OtpExpired(BallotChainError):
    code = "Expired"


class OtpExhausted(BallotChainError):
    code = "Exhausted"


class WrongCode(BallotChainError):
    code = "WrongCode"


class InvalidSession(BallotChainError):
    code = "InvalidSession"


class AlreadyBound(BallotChainError):
    code = "AlreadyBound"


class KeyInUse(BallotChainError):
    code = "KeyInUse"


class AlreadyGranted(BallotChainError):
    code = "AlreadyGranted"


class OutsideRegistrationWindow(BallotChainError):
    code = "OutsideRegistrationWindow"


class BadStatus(BallotChainError):
    code = "BadStatus"


# --- arbitration (Server-B) ---

class NotRegistered(BallotChainError):
    code = "NotRegistered"


class NotGranted(BallotChainError):
    code = "NotGranted"


class WindowClosed(BallotChainError):
    code = "WindowClosed"


class AlreadyVoted(BallotChainError):
    code = "AlreadyVoted"


class SessionNotOpen(BallotChainError):
    code = "SessionNotOpen"


class EmptyFrame(BallotChainError):
    code = "EmptyFrame"


class InsufficientLiveness(BallotChainError):
    code = "InsufficientLiveness"


# --- tally / audit ---

class WindowStillOpen(BallotChainError):
    code = "WindowStillOpen"


class AlreadySwept(BallotChainError):
    code = "AlreadySwept"


class PageOutOfRange(BallotChainError):
    code = "PageOutOfRange"


class Unauthorized(BallotChainError):
    code = "Unauthorized"
