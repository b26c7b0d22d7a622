from .base import DocumentStore
from .filesystem import FileSystemStore

__all__ = ["DocumentStore", "FileSystemStore"]
