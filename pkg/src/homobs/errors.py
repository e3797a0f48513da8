"""Exception hierarchy shared by all modules.

Each error carries a short machine-readable ``code`` used by the CLI as
the prefix of its one-line failure message.
"""


class HomobsError(Exception):
    code = "HOMOBS"


class DimensionError(HomobsError, ValueError):
    code = "DIMENSION"


class DefinitenessError(HomobsError, ValueError):
    code = "DEFINITENESS"


class NotStronglyConnectedError(HomobsError, ValueError):
    code = "NOT_STRONGLY_CONNECTED"


class DecompositionError(HomobsError):
    code = "DECOMPOSITION"


class DilationError(HomobsError):
    code = "DILATION"


class StructureEquationError(HomobsError):
    code = "STRUCTURE_INFEASIBLE"


class ObservabilityError(HomobsError):
    code = "NOT_OBSERVABLE"


class InfeasibleError(HomobsError):
    code = "LMI_INFEASIBLE"


class CouplingInfeasibleError(InfeasibleError):
    code = "COUPLING_INFEASIBLE"


class VerificationError(HomobsError):
    code = "VERIFICATION_FAILED"

    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


class ModelError(HomobsError):
    code = "MODEL"


class TopologyError(HomobsError):
    code = "TOPOLOGY"


class DivergenceError(HomobsError):
    code = "DIVERGENCE"

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(HomobsError):
    code = "CONFIG"
