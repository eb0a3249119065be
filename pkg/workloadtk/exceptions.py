class WorkloadTkError(Exception):
    def __init__(self, msg):
        Exception.__init__(self, msg)


class EmptyWindow(WorkloadTkError):
    """No telemetry arrived for an observation window."""
    pass


class OutOfSpan(WorkloadTkError):
    """Sample timestamp lies outside the window being aggregated."""
    pass


class NonConsecutive(WorkloadTkError):
    """Window indices are not adjacent."""
    pass


class InsufficientSamples(WorkloadTkError):
    """Welch's test needs at least two samples on each side."""
    pass


class TooFewWindows(WorkloadTkError):
    pass


class NotFound(WorkloadTkError):
    """Workload label is not present in the WorkloadDB."""
    pass


class UnknownStream(WorkloadTkError):
    pass


class InvalidRecord(WorkloadTkError):
    """Persisted record violates a knowledge-base invariant."""
    pass


class SchemaMismatch(WorkloadTkError):
    pass


class EmptyTrainingSet(WorkloadTkError):
    pass


class DimensionMismatch(WorkloadTkError):
    pass


class NoPureClasses(WorkloadTkError):
    pass


class LabelCollision(WorkloadTkError):
    pass


class TooShort(WorkloadTkError):
    pass


class OutOfOrder(WorkloadTkError):
    """Context emitted for a window index that is not newer than the last one."""
    pass


class InvalidScenario(WorkloadTkError):
    pass


class IndexMismatch(WorkloadTkError):
    pass


class NoReport(WorkloadTkError):
    pass


class InvalidPolicy(InvalidScenario):
    """Change-detection policy outside its valid range."""
    pass
