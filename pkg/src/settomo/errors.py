"""Toolkit exception types."""


class DegenerateKernelError(ValueError):
    """Kernel is identically zero and cannot be normalized."""


class ReconstructionError(RuntimeError):
    """Inversion produced no usable cells."""


class ConvergenceError(RuntimeError):
    """A matrix-function evaluation failed to converge."""
