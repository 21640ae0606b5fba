"""
Barramento de eventos de progresso (treinamento e Monte Carlo).
"""
import threading
from typing import Any, Callable, Dict, List

from causalnet.utils.logger import get_logger

REPLICATION_COMPLETED = "replication.completed"
REPLICATION_FAILED = "replication.failed"
TRAINING_FINISHED = "training.finished"


class EventBus:
    """
    Publicação/assinatura de eventos de progresso.

    Replicações rodando em threads distintas podem publicar ao mesmo tempo;
    as chamadas aos inscritos são serializadas por um lock.
    """

    def __init__(self):
        """Inicializa o barramento de eventos."""
        self.subscribers: Dict[str, List[Callable]] = {}
        self.logger = get_logger(self.__class__.__name__)
        self._lock = threading.Lock()

    def subscribe(self, event_type: str, callback: Callable) -> None:
        """
        Inscreve uma função de callback para um tipo de evento ("*" recebe todos).

        Args:
            event_type: Tipo de evento para se inscrever
            callback: Função chamada com o dicionário do evento
        """
        callbacks = self.subscribers.setdefault(event_type, [])
        if callback not in callbacks:
            callbacks.append(callback)
            self.logger.debug(f"Inscrito em evento '{event_type}': {getattr(callback, '__name__', callback)}")

    def unsubscribe(self, event_type: str, callback: Callable) -> None:
        """Cancela a inscrição de um callback."""
        if callback in self.subscribers.get(event_type, []):
            self.subscribers[event_type].remove(callback)

    def publish(self, event_type: str, event_data: Dict[str, Any] = None) -> None:
        """
        Publica um evento para todos os inscritos.

        Erros nos callbacks são registrados e não interrompem o cálculo.

        Args:
            event_type: Tipo de evento a ser publicado
            event_data: Dados associados ao evento (opcional)
        """
        payload = dict(event_data or {})
        payload["event_type"] = event_type
        with self._lock:
            for callback in self.subscribers.get(event_type, []) + self.subscribers.get("*", []):
                try:
                    callback(payload)
                except Exception as e:
                    self.logger.error(f"Erro ao processar evento '{event_type}' em {getattr(callback, '__name__', callback)}: {e}")
