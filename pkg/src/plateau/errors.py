"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """Input outside the domain where an operation is defined."""


class NotStrictlyPSHError(DomainError):
    """Levi form is not positive definite."""

    def __init__(self, min_eigenvalue):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            f"not strictly plurisubharmonic: smallest Levi eigenvalue {self.min_eigenvalue:.3e}"
        )


class NotCriticalError(DomainError):
    def __init__(self, gradient_norm):
        self.gradient_norm = float(gradient_norm)
        super().__init__(f"not a critical point: |dz| = {self.gradient_norm:.3e}")


class DegenerateMorseError(DomainError):
    pass


class WrongCaseError(DomainError):
    pass


class SingularPointError(DomainError):
    """A form was queried at (or too close to) its singular locus."""

    def __init__(self, point, message="point lies in the singular set of the form"):
        self.point = point
        super().__init__(message)


class MinorantViolation(DomainError):
    """A sampled point where the germ falls below its quadratic minorant."""

    def __init__(self, point, margin, report):
        self.point = point
        self.margin = float(margin)
        self.report = report
        super().__init__(f"minorant violated at {point!r} (margin {self.margin:.3e})")


class ScenarioError(ValueError):
    """Malformed scenario; ``path`` locates the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
