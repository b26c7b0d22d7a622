from .commands import router

__all__ = ["router"]
