class BoundExceeded(ValueError):
    """An exhaustive search would exceed its configured size budget."""


class SignatureMismatch(ValueError):
    pass


class PreservationFailure(Exception):
    """A sentence was found not to be preserved under homomorphisms."""

    def __init__(self, message, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample
