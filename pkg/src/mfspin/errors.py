"""Exception types shared across the package."""


class MFSpinError(Exception):
    """Base class for all package errors."""


class DimensionTooSmall(MFSpinError):
    """Lattice dimension below 3; the infrared integrals diverge."""


class MethodInfeasible(MFSpinError):
    """Requested integration method cannot handle the given dimension."""


class QuadratureFailure(MFSpinError):
    """Adaptive quadrature could not reach the requested tolerance."""


class OutOfSimplex(MFSpinError):
    """A probability-vector component left [0, 1]."""


class BoundaryMagnetization(MFSpinError):
    """Magnetization at or beyond the reachable range of g'; entropy is -inf."""


class BracketInvalid(MFSpinError):
    """Transition bracket endpoints do not straddle the degeneracy."""


class NoAsymmetricBranch(MFSpinError):
    """No nonzero stable solution of the mean-field equation at this coupling."""


class WindowExcludesTransition(MFSpinError):
    """Certification window does not contain the located J_MF."""


class BudgetExceeded(MFSpinError):
    """Brute-force grid would exceed the configured evaluation budget."""


class ScanTooCoarse(UserWarning):
    """Two roots closer than two grid cells; scan resolution should be raised."""


class SamplingNoise(UserWarning):
    """Monte Carlo estimate of G is noisier than the oracle grid scale."""
