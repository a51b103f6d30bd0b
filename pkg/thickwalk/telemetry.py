import logging
from typing import List, Optional

import sentry_sdk
from sentry_sdk.integrations.logging import LoggingIntegration

from thickwalk.config import config
from thickwalk.exceptions import ThickWalkException


def before_send_filter(event, hint):
    """Add thickwalk exception context to Sentry events"""
    if "exc_info" in hint:
        exc_type, exc_value, tb = hint["exc_info"]
        if isinstance(exc_value, ThickWalkException):
            event.setdefault("contexts", {})["thickwalk"] = {
                "exception_type": exc_type.__name__,
                "details": getattr(exc_value, 'details', {})
            }
    return event


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=(level or config.log_level()).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def init_sentry(integrations: Optional[List] = None) -> None:
    """
    Initialize sentry with structured logs enabled.

    Without SENTRY_DSN the SDK stays inert, so the CLI and tests can call this unconditionally.
    """
    sentry_sdk.init(
        dsn=config.SENTRY_DSN,
        environment=config.ENVIRONMENT,
        enable_logs=True,
        integrations=[
            LoggingIntegration(
                level=logging.INFO,
                event_level=logging.ERROR,
                sentry_logs_level=logging.INFO
            ),
            *(integrations or []),
        ],
        traces_sample_rate=1.0 if config.ENVIRONMENT == "development" else 0.1,
        attach_stacktrace=True,
        before_send=before_send_filter,
    )
