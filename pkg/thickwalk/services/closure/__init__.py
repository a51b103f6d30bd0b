import inspect
import logging
import pkgutil

from sentry_sdk import logger as sentry_logger

from thickwalk.config import config
from thickwalk.exceptions import InvalidConfigError
from .base import BaseClosure

logger = logging.getLogger(__name__)

# Registered closure schemes by name
CLOSURES = {}


def register_closure(closure_class):
    """
    Registers a closure scheme in CLOSURES if it is enabled in the configuration.
    """
    if issubclass(closure_class, BaseClosure) and closure_class is not BaseClosure:
        closure_name = getattr(closure_class, '_closure_name', None)
        if closure_name and closure_name != "base":
            if config.is_closure_enabled(closure_name):
                CLOSURES[closure_name] = closure_class()
                logger.debug("Registered closure scheme: %s", closure_name)
            else:
                logger.debug("Skipped closure scheme (disabled): %s", closure_name)


def discover_closures():
    """
    Imports every module of this package and registers the closure schemes it defines.
    """
    for _, module_name, _ in pkgutil.iter_modules(__path__):
        module = __import__(f"{__name__}.{module_name}", fromlist=["*"])
        for _, obj in inspect.getmembers(module, inspect.isclass):
            register_closure(obj)


discover_closures()


def get_closure(closure_name: str) -> BaseClosure:
    """
    Returns the registered closure scheme called ``closure_name``.
    """
    closure = CLOSURES.get(closure_name)
    if not closure:
        sentry_logger.error(
            'Closure scheme not found',
            attributes={
                'closure.name': closure_name,
                'available.closures': list(CLOSURES.keys())
            }
        )
        raise InvalidConfigError("closure", f"closure scheme '{closure_name}' is not available")
    return closure
