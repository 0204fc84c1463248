"""Exception hierarchy shared across the package.

Every error that a CLI subcommand maps to a distinct exit code lives here,
so the mapping stays in one place.
"""


class Ar1FptError(Exception):
    """Base class for all package-specific errors."""

    exit_code = 1


class ConfigError(Ar1FptError):
    """Invalid configuration: schema violation or a broken invariant."""

    exit_code = 2


class NoCrossingError(Ar1FptError):
    """The level cannot be crossed (no innovation mass above a(1-lambda))."""

    exit_code = 3


class DivergenceError(Ar1FptError):
    """An improper integral or the cumulant series fails to converge."""

    exit_code = 4


class SeriesDivergenceError(DivergenceError):
    """The limit-cumulant series exceeded its term budget without tail control."""


class InfeasibleTruncationError(Ar1FptError):
    """A truncation transform cannot produce the required positive atom."""

    exit_code = 5


class CertificateInfeasibleError(Ar1FptError):
    """No admissible transform order yields a valid exponential certificate."""

    exit_code = 5


class UnsupportedSamplerError(Ar1FptError):
    """Sampling requested for a family without a supported sampler."""

    exit_code = 5


class CoverageError(Ar1FptError):
    """Empirical MGF nodes do not cover the quadrature node set."""

    exit_code = 6


class IndeterminateError(Ar1FptError):
    """A convergence probe could not reach a verdict."""

    exit_code = 4
