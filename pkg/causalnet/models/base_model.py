import dataclasses
import enum
import math
from typing import Any, Dict, Type, TypeVar

import numpy as np


T = TypeVar('T', bound='BaseModel')


def to_plain(value: Any) -> Any:
    """
    Converte recursivamente um valor para tipos serializáveis em JSON.

    Arrays viram listas, enums viram seus valores, NaN/Inf viram None.
    """
    if isinstance(value, BaseModel):
        return value.to_dict()
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if hasattr(value, 'model_dump'):
        return to_plain(value.model_dump(mode='python'))
    return value


class BaseModel:
    """
    Classe base para os registros de resultado (dataclasses), com
    serialização/deserialização recursiva e validação básica.
    """
    required_fields: tuple = ()  # Pode ser sobrescrito nas subclasses

    def to_dict(self) -> Dict[str, Any]:
        """Representação em dicionário, na ordem de declaração dos campos."""
        return {f.name: to_plain(getattr(self, f.name)) for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls: Type[T], data: Dict[str, Any]) -> T:
        """
        Reconstrói a instância a partir de ``to_dict``.

        Campos ausentes usam o default da dataclass; None volta a ser NaN
        em campos float.

        Raises:
            KeyError: Falta algum campo de ``required_fields``.
        """
        missing = [name for name in cls.required_fields if name not in data]
        if missing:
            raise KeyError(f"Campos obrigatórios ausentes em {cls.__name__}: {', '.join(missing)}")
        kwargs = {}
        for f in dataclasses.fields(cls):
            if f.name not in data:
                continue
            value = data[f.name]
            if value is None and f.type in (float, 'float'):
                value = float('nan')
            kwargs[f.name] = value
        return cls(**kwargs)
