"""Exception types shared across the platform.

Every error the service surfaces maps onto one of these classes; the HTTP
layer translates them to status codes (validation 400, auth 401/403,
not-found 404, state conflicts 409).
"""


class CollabBIError(Exception):
    """Base class for all platform errors."""


class ValidationError(CollabBIError):
    """Input rejected: malformed value, broken invariant, failed precondition."""


class ParseError(ValidationError):
    """Malformed document or stream; carries a human-readable location."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(ValidationError):
    """Cube or query document violates a schema-level rule."""


class TypeMismatchError(ValidationError):
    """A literal's type does not match the member it is applied to."""


class DomainError(ValidationError):
    """A value falls outside a closed column domain."""

    def __init__(self, column: str, value: object, line: int | None = None):
        self.column = column
        self.value = value
        loc = f" (line {line})" if line is not None else ""
        super().__init__(f"value {value!r} outside the allowed domain of {column}{loc}")


class IntegrityError(ValidationError):
    """Referential or uniqueness violation (duplicate primary key, dangling FK)."""


class ChartConstraintError(ValidationError):
    """Query shape incompatible with the requested chart type."""


class NotFoundError(CollabBIError):
    """A named entity (table, column, member, session, item...) does not exist."""


class AuthorizationError(CollabBIError):
    """Caller is not allowed to perform the operation (wrong author, bad token)."""


class TokenError(AuthorizationError):
    """Missing or wrong shared bearer token."""


class StateError(CollabBIError):
    """Operation conflicts with current state (e.g. closed session)."""


class UnsupportedOperationError(CollabBIError):
    """The operation is not applicable to the given object."""


class UnsupportedVersionError(ValidationError):
    """Document format version is newer than this service understands."""
