from .core.config import settings


__version__ = settings.VERSION

__all__ = ("__version__",)
