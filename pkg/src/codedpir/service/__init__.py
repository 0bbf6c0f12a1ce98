"""Networked coded PIR: wire frames, storage daemons, and the retrieval client."""

from .client import (
    InProcessTransport,
    ServerUnreachable,
    ServiceError,
    TcpTransport,
    Transport,
    WireAccounting,
    array_client_retrieve,
    client_retrieve,
    client_retrieve_async,
    in_process,
    upload,
)
from .config import ConfigError, ServiceConfig, parse_endpoint
from .server import ServerPool, ServerState, handle, start_server
from .wire import FrameError, Kind, WireFrame

__all__ = [
    "ConfigError",
    "FrameError",
    "InProcessTransport",
    "Kind",
    "ServerPool",
    "ServerState",
    "ServerUnreachable",
    "ServiceConfig",
    "ServiceError",
    "TcpTransport",
    "Transport",
    "WireAccounting",
    "WireFrame",
    "array_client_retrieve",
    "client_retrieve",
    "client_retrieve_async",
    "handle",
    "in_process",
    "parse_endpoint",
    "start_server",
    "upload",
]
