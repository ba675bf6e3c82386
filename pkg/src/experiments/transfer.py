"""Runner for ``kind: transfer-check``."""

import itertools

import numpy as np
import structlog
from numpy.typing import NDArray

from src.chains.continuous import BetaChain, ContinuousKernel, EmbeddedTargetChain
from src.chains.metric import Box
from src.experiments.common import ExperimentResult, Table
from src.experiments.schema import TransferCheckExperiment
from src.similarity.balls import kernel_ball, law_ball
from src.similarity.transfer import (
    TransferParameters,
    beta_chain_transfer,
    transfer_to_alpha,
    verify_transfer_exponent,
)

logger = structlog.get_logger(__name__)

TRANSFER_CSV_HEADER = [
    "gamma",
    "constant",
    "radius",
    "worst_margin",
    "worst_ratio",
    "witness_x",
    "witness_y",
    "witness_h",
    "verdict",
]


def box_grid(box: Box, points: int) -> NDArray[np.float64]:
    """Product grid with ``points`` values per non-degenerate side of ``box``.

    Examples:
        >>> box_grid(Box(lower=[0.0, 0.0], upper=[1.0, 0.0]), 3).tolist()
        [[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]
    """
    axes = [
        np.linspace(lo, hi, points) if hi > lo else np.array([lo])
        for lo, hi in zip(box.lower, box.upper, strict=True)
    ]
    return np.array(list(itertools.product(*axes)), dtype=float)


def transfer_parameters(config: TransferCheckExperiment) -> TransferParameters:
    """Configured (gamma, C, h_bar), or the analytic beta-chain values.

    Raises:
        ValueError: If neither is available.
    """
    if config.gamma is not None and config.constant is not None:
        return TransferParameters(config.gamma, config.constant, config.radius)
    if isinstance(config.source, BetaChain) and isinstance(config.target, BetaChain):
        return beta_chain_transfer(config.source.gamma, config.target.gamma)
    raise ValueError("gamma and constant are required unless both chains are beta chains")


def _target_dimension(kernel: ContinuousKernel) -> int:
    if isinstance(kernel, EmbeddedTargetChain):
        return kernel.target_dimension
    return kernel.dimension


def run_transfer_check(config: TransferCheckExperiment) -> ExperimentResult:
    """Check nu^P(B(x,h)) >= C (h/h_bar)^gamma Q(y, B(x,h)) over the grids.

    Centers and states are spread over the target support. A passing check
    also reports the alpha-family membership it implies.
    """
    if config.source.dimension != config.target.dimension:
        raise ValueError("source and target must share the ambient dimension")
    params = transfer_parameters(config)
    support = config.target.support()
    xs = box_grid(support, config.x_points)
    ys = box_grid(support, config.y_points)
    hs = config.h_grid.resolve() * params.radius / config.h_grid.diameter
    check = verify_transfer_exponent(
        law_ball(config.source.minorizing_measure()),
        kernel_ball(config.target),
        params.gamma,
        params.constant,
        params.radius,
        xs,
        ys,
        hs,
    )
    logger.info(
        "transfer_exponent_checked",
        gamma=params.gamma,
        constant=params.constant,
        worst_margin=check.worst_margin,
        verdict=check.verdict,
    )

    data: dict[str, object] = {"check": check.model_dump(), "membership": None}
    failure = None
    if check.passed:
        epsilon_p, _ = config.source.doeblin()
        membership, fallback = transfer_to_alpha(
            params.gamma,
            _target_dimension(config.target),
            1.0,
            params.constant,
            epsilon_p,
            config.source.dimension,
        )
        data["membership"] = {"implied": membership._asdict(), "fallback": fallback._asdict()}
    else:
        w = check.witness
        failure = (
            f"transfer inequality fails with margin {check.worst_margin:.6g} "
            f"at x = {w.x}, y = {w.y}, h = {w.h:.6g}"
        )
    row = [
        params.gamma,
        params.constant,
        params.radius,
        check.worst_margin,
        check.worst_ratio,
        " ".join(format(v, ".17g") for v in check.witness.x),
        " ".join(format(v, ".17g") for v in check.witness.y),
        check.witness.h,
        check.verdict,
    ]
    return ExperimentResult(
        kind=config.kind,
        data=data,
        tables={"transfer.csv": Table(header=TRANSFER_CSV_HEADER, rows=[row])},
        verdict=check.verdict,
        failure=failure,
    )
