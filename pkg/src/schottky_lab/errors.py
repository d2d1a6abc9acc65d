"""Exception types shared across modules."""


class SchottkyLabError(Exception):
    pass


class DomainError(SchottkyLabError, ValueError):
    pass


class BudgetError(SchottkyLabError):
    pass


class ConvergenceError(SchottkyLabError):
    pass


class SchottkyViolation(SchottkyLabError, ValueError):
    pass


class ConfigError(SchottkyLabError, ValueError):
    pass
