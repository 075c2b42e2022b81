"""Exception hierarchy shared by all stages.

The CLI maps these onto exit codes: validation problems exit 2, pipeline
failures exit 3, and I/O errors (plain OSError) exit 4.
"""


class TopicforgeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(TopicforgeError):
    """Bad input: malformed files, contract violations, mismatched shapes."""


class ArchiveError(ValidationError):
    """A model archive is unreadable, truncated, or from the wrong corpus."""


class PipelineError(TopicforgeError):
    """A pipeline stage failed on otherwise valid input."""
