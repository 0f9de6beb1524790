"""Exception hierarchy shared across the toolkit.

Everything user-facing derives from StrataError so the CLI can map any
domain failure to exit code 2 while genuine I/O problems (OSError) map to 1.
"""


class StrataError(Exception):
    """Base class for all toolkit errors."""


class DataFormatError(StrataError):
    """A data file violates the documented grammar or a record invariant.

    Messages always name the offending line, row or record id.
    """


class SchemaError(StrataError):
    """A schema file is malformed or a set does not satisfy a schema precondition."""


class MetricError(StrataError):
    """A metric cannot be computed (e.g. no positives after filtering)."""


class UndefinedMetricError(MetricError):
    """A requested metric is undefined on the given data (e.g. PPV with zero
    predicted positives); names the tag and metric."""


class ClusterError(StrataError):
    """Clustering preconditions violated (k > n, missing embeddings, ...)."""


class AuditError(StrataError):
    """An audit mutation is invalid (unknown record, removing an absent tag, ...)."""


class ConfigError(StrataError):
    """A configuration value is out of range or inconsistent."""
