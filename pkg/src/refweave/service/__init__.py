from .config import Config, load_config
from .egress import EgressPolicy
from .journal import Journal
from .engine import ServiceEngine
from .app import build_app

__all__ = [
    "Config",
    "load_config",
    "EgressPolicy",
    "Journal",
    "ServiceEngine",
    "build_app",
]
