"""Exception hierarchy for projlab."""


class ProjlabError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(ProjlabError, ValueError):
    pass


class RankDeficientError(ProjlabError, ValueError):
    pass


class NonComplementaryError(ProjlabError, ValueError):
    """Range and kernel bases do not form a direct sum decomposition."""


class NotIdempotentError(ProjlabError, ValueError):
    pass


class CompatibilityError(ProjlabError):
    """A candidate pair projector violates P12 P1 = P12 or P12 P2 = P12."""

    def __init__(self, message, pair=None, residuals=None):
        super().__init__(message)
        self.pair = pair
        self.residuals = residuals


class ConsistencyError(ProjlabError):
    """A candidate intersection projector fails P_S P_j = P_S for some j in S."""

    def __init__(self, message, subset=None, residuals=None):
        super().__init__(message)
        self.subset = subset
        self.residuals = residuals


class InapplicableError(ProjlabError, ValueError):
    """A bound or criterion whose hypotheses are not met (e.g. a cosine >= 1)."""


class ScheduleError(ProjlabError, ValueError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NonConvergenceError(ProjlabError):
    pass


class DivergenceError(ProjlabError):
    def __init__(self, message, step=None, norm=None):
        super().__init__(message)
        self.step = step
        self.norm = norm


class ScenarioError(ProjlabError, ValueError):
    def __init__(self, message, field=None, line=None, column=None):
        super().__init__(message)
        self.field = field
        self.line = line
        self.column = column
