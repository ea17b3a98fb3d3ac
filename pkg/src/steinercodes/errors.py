"""Exception hierarchy.  CLI exit statuses are attached to the classes."""


class SteinerCodesError(Exception):
    exit_status = 1


class ParameterError(SteinerCodesError, ValueError):
    """Arguments outside an operation's domain."""

    exit_status = 1


class DesignError(ParameterError):
    """A block list that is not a well-formed design (bad block, duplicate, bad file)."""


class AdmissibilityError(SteinerCodesError):
    """Parameters fail a residue or divisibility hypothesis."""

    exit_status = 2


class Undecided(SteinerCodesError):
    """A search budget ran out before an answer was found.  Not a proof of anything."""

    exit_status = 3


class VerificationError(SteinerCodesError):
    """A property that must hold by construction does not.  Always a bug."""

    exit_status = 4


class NotAuthentic(SteinerCodesError, LookupError):
    """Receiver rejects a message that is not valid under the rule in use."""
