"""Exception types shared across the package."""


class HmdgError(Exception):
    """Base class for package-specific errors."""


class MeshParseError(HmdgError):
    """Malformed mesh file; carries the offending line number."""

    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class MeshTopologyError(HmdgError):
    """Connectivity that does not describe a conforming triangulation."""


class ConfigurationError(HmdgError):
    """Invalid run configuration (time step, config keys, preconditions)."""


class AssemblyError(HmdgError):
    """Element-local assembly or elimination failed."""


class SolverError(HmdgError):
    """Linear solve failed or exceeded its residual tolerance."""
