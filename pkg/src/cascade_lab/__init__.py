from cascade_lab.settings import settings

__all__ = ["settings"]
