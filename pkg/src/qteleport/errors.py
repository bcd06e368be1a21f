"""Exception hierarchy. Everything raised on purpose derives from QTeleportError."""


class QTeleportError(Exception):
    pass


class LabelError(QTeleportError, ValueError):
    """Unknown, duplicated, colliding or mismatched qubit labels."""


class ArityError(QTeleportError, ValueError):
    pass


class ZeroNormError(QTeleportError, ValueError):
    """A vector vanished where a normalizable state was required."""


class NotUnitaryError(QTeleportError, ValueError):
    pass


class NotHermitianError(QTeleportError, ValueError):
    pass


class InvalidStateError(QTeleportError, ValueError):
    pass


class DegenerateChannelError(QTeleportError, ValueError):
    pass


class PositivityError(QTeleportError, ValueError):
    """An operator that must be positive semidefinite has a negative eigenvalue."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
