"""Exception types shared across the server."""


class KforgeError(Exception):
    """Base class for all server errors."""


class InvalidSlug(KforgeError):
    pass


class TermAlreadyExists(KforgeError):
    pass


class UnknownTerm(KforgeError):
    pass


class ArchivedArticle(KforgeError):
    pass


class Forbidden(KforgeError):
    pass


class ForgeUnavailable(KforgeError):
    """Transient forge failure; safe to retry."""


class ForgePermissionDenied(KforgeError):
    """Terminal forge failure: missing repo, archived repo, or bad scope."""


class NotFound(KforgeError):
    pass


class ValidationFailed(KforgeError):
    def __init__(self, report):
        super().__init__("content validation failed")
        self.report = report


class StillBroken(KforgeError):
    def __init__(self, cause: str):
        super().__init__(f"article still broken: {cause}")
        self.cause = cause


class MalformedArchive(KforgeError):
    pass


class OAuthDenied(KforgeError):
    pass


class EmptyQuestion(KforgeError):
    pass


class UnknownAccount(KforgeError):
    pass


class MailBackendUnavailable(KforgeError):
    """Transient mail backend failure; safe to retry."""


class ConfigInvalid(KforgeError):
    def __init__(self, field: str, reason: str = ""):
        super().__init__(f"invalid config field {field!r}" + (f": {reason}" if reason else ""))
        self.field = field


class StoreUnreachable(KforgeError):
    pass
