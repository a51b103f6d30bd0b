import os

from thickwalk.config import config

wsgi_app = "thickwalk.main:app"
proc_name = "thickwalk-api"

bind = f"{config.HOST}:{config.PORT}"
workers = config.WORKERS
worker_class = "uvicorn.workers.UvicornWorker"

# Spectra of long walks with many closures run for minutes
timeout = config.TIMEOUT
graceful_timeout = int(os.getenv("GRACEFUL_TIMEOUT", "60"))

# Recycle workers; sympy caches grow with every classified diagram
max_requests = int(os.getenv("MAX_REQUESTS", "500"))
max_requests_jitter = int(os.getenv("MAX_REQUESTS_JITTER", "50"))

loglevel = config.LOG_LEVEL.lower()
accesslog = "-" if os.getenv("ACCESS_LOG", "true").lower() == "true" else None
errorlog = "-"

keyfile = os.getenv("SSL_KEYFILE")
certfile = os.getenv("SSL_CERTFILE")


def on_starting(server):
    server.log.info(
        f"thickwalk API: {workers} workers, timeout {timeout}s, closures {config.get_enabled_closures()}"
    )


def worker_exit(server, worker):
    server.log.info(f"Worker {worker.pid} exited")
