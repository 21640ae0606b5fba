# causalnet/controllers/__init__.py
from typing import Any, Dict, Optional

from causalnet.utils.event_bus import EventBus
from causalnet.utils.logger import get_logger


class BaseController:
    """
    Base dos controladores de treinamento, seleção, estimação e simulação.

    Cada controlador tem seu logger (``causalnet.<Classe>``) e publica
    progresso num ``EventBus``, próprio ou compartilhado com quem o criou.
    """

    def __init__(self, event_bus: Optional[EventBus] = None):
        """
        Args:
            event_bus: Barramento compartilhado; sem ele, cria um privado.
        """
        self.logger = get_logger(self.__class__.__name__)
        self.event_bus = event_bus or EventBus()

    def publish_event(self, event_type: str, event_data: Dict[str, Any] = None) -> None:
        """Publica ``event_data`` marcado com o nome do controlador em ``publisher``."""
        event_data = dict(event_data or {})
        event_data["publisher"] = self.__class__.__name__
        self.event_bus.publish(event_type, event_data)

    def log_action(self, action: str, details: Dict[str, Any] = None) -> None:
        """Registra em INFO o início de uma etapa com seus parâmetros."""
        params = ", ".join(f"{k}={v}" for k, v in (details or {}).items())
        self.logger.info(f"{action}: {params}" if params else action)
