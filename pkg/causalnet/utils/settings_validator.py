from typing import Any, Dict, List, Optional, Tuple
import logging
import os

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from causalnet.controllers.lasso_controller import LassoSettings
from causalnet.controllers.training_controller import TrainConfig
from causalnet.models.network import CnnVariant
from causalnet.utils import load_mapping

DEFAULT_SETTINGS_PATH = os.path.join(
    os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
    'data', 'nuisance_settings.json',
)


class CnnArchitecture(BaseModel):
    """
    CNN de uma função incômoda.

    A variante prática usa ``channels_per_layer``; a teórica usa E e L,
    que, omitidos, saem de ``rate_schedule(n, d, c_E, c_L)``.
    """
    model_config = ConfigDict(extra='forbid')

    variant: CnnVariant = CnnVariant.PRACTICAL
    channels_per_layer: List[int] = Field(default_factory=lambda: [128, 16], min_length=1)
    S: int = Field(default=2, ge=1)
    static_branch_widths: List[int] = Field(default_factory=lambda: [16])
    head_widths: List[int] = Field(default_factory=list)
    E: Optional[int] = Field(default=None, ge=1)
    L: Optional[int] = Field(default=None, ge=1)
    c_E: float = Field(default=1.0, gt=0)
    c_L: float = Field(default=1.0, gt=0)

    @model_validator(mode='after')
    def _check_variant(self):
        if self.variant == CnnVariant.PRACTICAL and (self.E is not None or self.L is not None):
            raise ValueError("E e L só se aplicam à variante teórica")
        if self.variant == CnnVariant.THEORETICAL and self.S < 2:
            raise ValueError(f"variante teórica exige S >= 2 (S={self.S})")
        return self


class MlpArchitecture(BaseModel):
    model_config = ConfigDict(extra='forbid')

    widths: Tuple[int, int]


class ArchitectureSettings(BaseModel):
    model_config = ConfigDict(extra='forbid')

    outcome_cnn: CnnArchitecture
    propensity_cnn: CnnArchitecture
    outcome_mlp: MlpArchitecture
    propensity_mlp: MlpArchitecture


class NuisanceSettings(BaseModel):
    model_config = ConfigDict(extra='forbid')

    architectures: ArchitectureSettings
    training: TrainConfig = Field(default_factory=TrainConfig)
    lasso: LassoSettings = Field(default_factory=LassoSettings)

    def architecture_overrides(self) -> Dict[str, Dict[str, Any]]:
        """Arquiteturas no formato aceito por ``EstimationController``."""
        return self.architectures.model_dump(exclude_none=True)


def validate_architectures(architectures: Dict[str, Dict[str, Any]]) -> Dict[str, Dict[str, Any]]:
    """
    Valida as quatro arquiteturas já mescladas.

    Raises:
        ValidationError: Chave desconhecida, valor inválido ou E/L fora da
            variante teórica.
    """
    return ArchitectureSettings(**architectures).model_dump(exclude_none=True)


def deep_update(base: dict, override: dict) -> dict:
    """Mescla ``override`` sobre ``base`` recursivamente (altera ``base``)."""
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            deep_update(base[k], v)
        else:
            base[k] = v
    return base


def load_and_validate_settings(settings_path: str = DEFAULT_SETTINGS_PATH,
                               user_path: Optional[str] = None) -> NuisanceSettings:
    """
    Carrega e valida as configurações das funções incômodas, mesclando com
    as do usuário (JSON ou YAML) se existirem.

    Raises:
        ConfigurationError: Arquivo base ausente ou ilegível.
        ValidationError: Valores inválidos ou chaves desconhecidas.
    """
    base = load_mapping(settings_path, missing_ok=False)
    if user_path:
        deep_update(base, load_mapping(user_path, missing_ok=False))
    try:
        return NuisanceSettings(**base)
    except ValidationError as e:
        logging.getLogger("causalnet.settings_validator").error(f'Erro de validação nas configurações: {e}')
        raise
