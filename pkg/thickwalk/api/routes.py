import logging
import math

from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool
from sentry_sdk import logger as sentry_logger

from thickwalk import __version__
from thickwalk.exceptions import InvalidConfigError
from thickwalk.geom import Walk
from thickwalk.knots.spectrum import dominance
from thickwalk.models.api import (
    MAX_API_SAMPLES,
    ClosuresResponse,
    DominanceResponse,
    HealthResponse,
    SampleRequest,
    SampleResponse,
    SpectrumEntry,
    SpectrumRequest,
    SpectrumResponse,
    ThicknessRequest,
    ThicknessResponse,
    Witness,
)
from thickwalk.models.chain import chain_config_from_values
from thickwalk.sampler import make_rng, run_chain
from thickwalk.services.closure import CLOSURES, get_closure
from thickwalk.thickness import (
    ThicknessParams,
    accommodates_tube,
    critical_pairs,
    dcsd,
    min_bend_angle,
)

logger = logging.getLogger(__name__)

router = APIRouter()


@router.get("/health", response_model=HealthResponse)
async def health_check():
    """
    Health check endpoint with the package version and the enabled closure schemes.
    """
    return HealthResponse(status="healthy", version=__version__, closures=list(CLOSURES.keys()))


@router.get("/closures", response_model=ClosuresResponse)
async def list_closures():
    """
    Returns a list of available closure schemes.
    """
    return ClosuresResponse(closures=list(CLOSURES.keys()))


@router.post("/walks/sample", response_model=SampleResponse)
async def sample_walks(request: SampleRequest):
    """
    Runs a short reflection chain from the straight walk and returns its samples.
    """
    chain_config = chain_config_from_values(request.model_dump(exclude_none=True))
    if chain_config.samples > MAX_API_SAMPLES:
        raise InvalidConfigError("samples", f"at most {MAX_API_SAMPLES} samples per request")
    walks, stats = await run_in_threadpool(run_chain, chain_config)
    logger.info(f"Sampled {len(walks)} walks n={chain_config.n} r={chain_config.r}")
    return SampleResponse(
        n=chain_config.n,
        r=chain_config.r,
        walks=[walk.vertices.tolist() for walk in walks],
        stats=stats,
        acceptance_rate=stats.acceptance_rate,
    )


def _thickness_report(request: ThicknessRequest) -> ThicknessResponse:
    walk = Walk(request.vertices)
    params = ThicknessParams(request.r)
    result = dcsd(walk)
    witness = None
    if result.witness is not None:
        witness = [Witness(segment=segment, parameter=parameter) for segment, parameter in result.witness]
    return ThicknessResponse(
        dcsd=result.distance if math.isfinite(result.distance) else None,
        witness=witness,
        min_bend_angle=min_bend_angle(walk),
        theta_min=params.theta_min,
        accommodates_tube=accommodates_tube(walk, params),
        critical_pairs=[pair.to_line() for pair in critical_pairs(walk)] if request.witnesses else None,
    )


@router.post("/thickness", response_model=ThicknessResponse)
async def thickness(request: ThicknessRequest):
    """
    Doubly-critical self distance, minimum bend angle and the tube predicate of one walk.
    """
    return await run_in_threadpool(_thickness_report, request)


def _spectrum_report(request: SpectrumRequest) -> SpectrumResponse:
    walk = Walk(request.vertices)
    closure = get_closure(request.closure)
    spectrum = closure.spectrum(walk, make_rng(request.seed), request.closures, reduce=request.reduce)
    verdict = dominance(spectrum)
    return SpectrumResponse(
        closure=closure.name,
        total=spectrum.total,
        spectrum=[
            SpectrumEntry(
                name=knot.name,
                determinant=knot.determinant,
                secondary=knot.secondary,
                count=count,
                fraction=spectrum.fraction(knot),
            )
            for knot, count in spectrum.ranked()
        ],
        dominance=DominanceResponse(
            level=verdict.level,
            winner=verdict.winner.name,
            fraction=verdict.fraction,
            knotted=verdict.is_knotted(),
        ),
        text=spectrum.to_text(),
    )


@router.post("/knots/spectrum", response_model=SpectrumResponse)
async def knot_spectrum(request: SpectrumRequest):
    """
    Knot spectrum of an open walk over random closures, with its dominance verdict.
    """
    report = await run_in_threadpool(_spectrum_report, request)
    sentry_logger.info(
        'Knot spectrum computed',
        attributes={
            'knots.closure': report.closure,
            'knots.closures': report.total,
            'knots.winner': report.dominance.winner,
            'knots.level': report.dominance.level,
        }
    )
    return report
