"""
Fitting layer.

Scenario fits of the approximating set families to sample clouds.
"""

from collections.abc import Callable
from typing import Any

from ..exceptions import ConfigurationError
from ..scenario import SetFamily
from .base import BaseSetFitter, FitOutcome, SetFitterProtocol, degeneracy_floor
from .nas import (
    BoxFitter,
    EllipsoidFitter,
    L1Fitter,
    ParallelotopeFitter,
    fit_ellipsoid,
    fit_hyperrectangle,
    fit_l1_diag,
    fit_parallelotope,
)
from .pas import (
    MultiplierPolicy,
    PasFitter,
    PutinarTemplate,
    VolumeEstimate,
    assemble_putinar,
    auto_box,
    fit_pas,
    multiplier_half_degrees,
    pas_volume_estimate,
)

_NAS_FITTERS: dict[SetFamily, type[BaseSetFitter]] = {
    SetFamily.ELLIPSOID: EllipsoidFitter,
    SetFamily.BOX: BoxFitter,
    SetFamily.PARALLELOTOPE: ParallelotopeFitter,
    SetFamily.L1: L1Fitter,
}

# Families with an iterative solver tolerance
_TOL_FITTERS: dict[SetFamily, Callable[..., BaseSetFitter]] = {
    SetFamily.ELLIPSOID: EllipsoidFitter,
    SetFamily.PARALLELOTOPE: ParallelotopeFitter,
    SetFamily.L1: L1Fitter,
}


def create_fitter(family: SetFamily | str, **options: Any) -> BaseSetFitter:
    """
    Build the fitter of a set family.

    Args:
        family: Set family
        **options: PAS options (box, degree, tol, multipliers, auto_inflate);
            the iterative norm-based fitters take tol, the box ignores it

    Raises:
        ConfigurationError: If the family is unknown
    """
    try:
        family = SetFamily(family)
    except ValueError as e:
        raise ConfigurationError(f"Unknown set family: {family!r}") from e
    if family is SetFamily.PAS:
        return PasFitter(**options)
    if family in _TOL_FITTERS and "tol" in options:
        return _TOL_FITTERS[family](tol=options["tol"])
    return _NAS_FITTERS[family]()


__all__ = [
    "BaseSetFitter",
    "BoxFitter",
    "EllipsoidFitter",
    "FitOutcome",
    "L1Fitter",
    "MultiplierPolicy",
    "ParallelotopeFitter",
    "PasFitter",
    "PutinarTemplate",
    "SetFitterProtocol",
    "VolumeEstimate",
    "assemble_putinar",
    "auto_box",
    "create_fitter",
    "degeneracy_floor",
    "fit_ellipsoid",
    "fit_hyperrectangle",
    "fit_l1_diag",
    "fit_pas",
    "fit_parallelotope",
    "multiplier_half_degrees",
    "pas_volume_estimate",
]
