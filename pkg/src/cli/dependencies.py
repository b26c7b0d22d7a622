"""Process-wide holders for the store and run configuration used by commands."""

from src.config import RunConfig
from src.datasources import DocumentStore

# Set by the app before a command runs
_store: DocumentStore | None = None
_config: RunConfig | None = None


def set_store(store: DocumentStore) -> None:
    """Set the global document store."""
    global _store
    _store = store


def get_store() -> DocumentStore:
    """Get the global document store for command handlers."""
    if _store is None:
        raise RuntimeError("DocumentStore not initialized. Call set_store() first.")
    return _store


def set_config(config: RunConfig) -> None:
    global _config
    _config = config


def get_config() -> RunConfig:
    if _config is None:
        raise RuntimeError("RunConfig not initialized. Call set_config() first.")
    return _config
