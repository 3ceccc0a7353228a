"""HTTP session service, CWQ ingestion, remote-model clients and the CLI."""

from .app import create_app
from .config import GatewayConfig, load_config

__all__ = ["create_app", "GatewayConfig", "load_config"]
