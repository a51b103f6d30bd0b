"""HTTP surface for single-walk sampling, thickness and knot spectra."""
import logging
from contextlib import asynccontextmanager

import sentry_sdk
from fastapi import Depends, FastAPI, HTTPException, Request, status
from fastapi.responses import JSONResponse
from fastapi.security import APIKeyHeader
from sentry_sdk import logger as sentry_logger
from sentry_sdk.integrations.fastapi import FastApiIntegration

from thickwalk import __version__
from thickwalk.api.routes import router as api_router
from thickwalk.config import config
from thickwalk.exceptions import ThickWalkException
from thickwalk.telemetry import configure_logging, init_sentry

configure_logging()
logger = logging.getLogger(__name__)

key_header = APIKeyHeader(name=config.API_KEY_NAME, auto_error=False)


async def require_api_key(key: str = Depends(key_header)) -> str:
    # An unset API_KEY refuses every request
    if not config.API_KEY or key != config.API_KEY:
        raise HTTPException(status_code=status.HTTP_401_UNAUTHORIZED, detail="Invalid or missing API Key")
    return key


init_sentry([
    FastApiIntegration(
        transaction_style="endpoint",
        failed_request_status_codes=[400, 403, 404, 422, 429, 500, 501, 502, 503, 504]
    ),
])


@asynccontextmanager
async def lifespan(app: FastAPI):
    closures = config.get_enabled_closures()
    sentry_logger.info(
        'thickwalk API starting up',
        attributes={
            'thickwalk.version': __version__,
            'thickwalk.enabled_closures': closures,
            'thickwalk.knot_closures': config.KNOT_CLOSURES,
            'thickwalk.api_key_protection': 'Enabled' if config.API_KEY else 'Disabled',
        }
    )
    logger.info(f"thickwalk {__version__} API started, closures: {closures}")
    yield


app = FastAPI(
    title="thickwalk",
    description="Thick random walks sampled by reflection moves, with thickness and knot spectrum analysis",
    version=__version__,
    dependencies=[Depends(require_api_key)],
    lifespan=lifespan,
)


@app.exception_handler(ThickWalkException)
async def thickwalk_exception_handler(request: Request, exc: ThickWalkException):
    """Answer with the exception's status code and report it to Sentry"""
    error_type = exc.__class__.__name__
    sentry_logger.error(
        'Request failed',
        attributes={
            'exception.type': error_type,
            'exception.message': exc.message,
            'exception.status_code': exc.status_code,
            'exception.details': exc.details,
            'request.path': request.url.path,
            'request.method': request.method,
        }
    )
    # Client errors are expected and only logged; the rest go to Sentry as events
    if exc.status_code >= 500:
        with sentry_sdk.new_scope() as scope:
            scope.set_tag("thickwalk.error", error_type)
            scope.set_context("thickwalk", exc.details)
            sentry_sdk.capture_exception(exc)
    logger.warning(f"{request.method} {request.url.path} -> {exc.status_code} {error_type}: {exc.message}")
    return JSONResponse(
        status_code=exc.status_code,
        content={"error": exc.message, "details": exc.details, "type": error_type},
    )


app.include_router(api_router)
