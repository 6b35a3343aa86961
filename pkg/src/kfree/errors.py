"""Exception hierarchy shared by all modules."""


class KfreeError(Exception):
    """Base class for library errors."""


class ConfigError(KfreeError, ValueError):
    """Unknown identifiers or malformed specifications."""


class DomainError(KfreeError, ValueError):
    """Operation undefined for the given arguments."""


class ResourceError(KfreeError):
    """A size limit or search budget was exceeded."""


class PreconditionError(KfreeError):
    """Caller did not establish a documented precondition."""
