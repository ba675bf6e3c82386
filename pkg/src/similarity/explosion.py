"""Support-based detection of infinite similarity.

If some set Lambda has positive target mass while its closed h-neighbourhood
has no source mass, rho_h is infinite. For box supports under the sup-norm
the distance to the source box is the largest coordinate gap, so it is
enough to look for one coordinate where the target reaches further than h
beyond the source.
"""

from typing import Union

import structlog
from pydantic import BaseModel, ConfigDict

from src.chains.continuous import ContinuousKernel
from src.chains.distributions import BetaDistribution, BetaStep, ProductBeta, UniformBox
from src.chains.metric import Box
from src.similarity.balls import UnsupportedDescriptorError

logger = structlog.get_logger(__name__)

SupportLike = Union[Box, BetaDistribution, ProductBeta, UniformBox, BetaStep, ContinuousKernel]


class ExplosionReport(BaseModel):
    """Whether rho_h is infinite, with a witness set Lambda when it is."""

    model_config = ConfigDict(frozen=True)

    h: float
    exploded: bool
    witness: Box | None = None
    coordinate: int | None = None


class ExplosionError(ValueError):
    """Raised when a run that needs a finite rho_h meets an infinite one."""

    def __init__(self, message: str, report: ExplosionReport | None = None) -> None:
        super().__init__(message)
        self.report = report


def _support(obj: SupportLike) -> Box:
    if isinstance(obj, Box):
        return obj
    if isinstance(obj, BetaDistribution | ProductBeta | UniformBox | BetaStep | ContinuousKernel):
        return obj.support()
    raise UnsupportedDescriptorError(f"no box support for {type(obj).__name__}")


def explosion_check(source: SupportLike, target: SupportLike, h: float) -> ExplosionReport:
    """Look for a target region out of reach of the source within distance h.

    Args:
        source: Source support, or a law or kernel whose support is a box.
        target: Target support, same family.
        h: Bandwidth.

    Returns:
        The report. The witness keeps the target box in every coordinate
        but one, where it is cut down to the part beyond the source's
        h-neighbourhood.

    Raises:
        UnsupportedDescriptorError: For supports outside the box family.

    Examples:
        >>> explosion_check(Box.unit(1, 2), Box.unit(2), 0.1).witness
        Box(lower=[0.0, 0.2], upper=[1.0, 1.0])
    """
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    src = _support(source)
    tgt = _support(target)
    if src.dimension != tgt.dimension:
        raise UnsupportedDescriptorError(
            f"source support has dimension {src.dimension}, target has {tgt.dimension}"
        )

    for i, (a, b, c, e) in enumerate(zip(src.lower, src.upper, tgt.lower, tgt.upper, strict=True)):
        side: tuple[float, float] | None = None
        if c == e:
            if c > b + h or c < a - h:
                side = (c, c)
        elif e > b + h:
            side = (min(b + 2.0 * h, (b + h + e) / 2.0), e)
        elif c < a - h:
            side = (c, max(a - 2.0 * h, (a - h + c) / 2.0))
        if side is None:
            continue
        lower = list(tgt.lower)
        upper = list(tgt.upper)
        lower[i], upper[i] = side
        witness = Box(lower=lower, upper=upper)
        logger.debug("explosion_detected", h=h, coordinate=i, witness=witness.model_dump())
        return ExplosionReport(h=h, exploded=True, witness=witness, coordinate=i)
    return ExplosionReport(h=h, exploded=False)
