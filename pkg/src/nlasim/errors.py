"""Exception and warning types shared across the package."""


class TruncationError(ValueError):
    """A cutoff is too small to hold the requested state or operation.

    Raised when a strict constructor would drop more tail mass than the
    caller allows, or when a beamsplitter would push photons past a mode
    cutoff by more than the overflow tolerance.
    """


class NonconvergentError(ValueError):
    """An amplification request lands in the unnormalizable regime.

    The ideal gain map g**n diverges on geometric-tailed states once the
    scaled tail stops decaying (effective parameter >= 1), and the
    postselected Gaussian prior stops being normalizable once
    (g**2 - 1) * variance >= 1.
    """


class ConfigError(ValueError):
    """Invalid command-line configuration."""


class TruncationWarning(UserWarning):
    """A constructed state silently dropped a small but nonzero tail."""
