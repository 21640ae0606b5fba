"""
Configurações de execução da ferramenta.

Os valores padrão podem ser sobrescritos por ``data/user_config.json`` (ou
``.yaml``/``.yml``); chaves desconhecidas e valores inválidos são ignorados
com aviso no log. Este módulo nunca grava arquivos.
"""
import os
import logging
from typing import Dict, Any, List

from causalnet.utils import load_mapping
from causalnet.utils.errors import ConfigurationError

# Configurações padrão
DEFAULT_CONFIG = {
    # Inferência
    "ALPHA": 0.05,
    "TRIM_EPSILON": 0.01,

    # Execução
    "THREADS": 1,
    "LOG_LEVEL": "INFO",

    # Monte Carlo
    "ORACLE_MC_SIZE": 1_000_000,
    "FAILURE_THRESHOLD": 0.05,

    # Saída
    "REPORT_FORMAT": "json",
}


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_real(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


# Validação de configurações
CONFIG_VALIDATORS = {
    "ALPHA": lambda x: _is_real(x) and 0.0 < x < 1.0,
    "TRIM_EPSILON": lambda x: _is_real(x) and 0.0 < x < 0.5,
    "THREADS": lambda x: _is_int(x) and 1 <= x <= 256,
    "LOG_LEVEL": lambda x: x in ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
    "ORACLE_MC_SIZE": lambda x: _is_int(x) and x >= 1,
    "FAILURE_THRESHOLD": lambda x: _is_real(x) and 0.0 <= x <= 1.0,
    "REPORT_FORMAT": lambda x: x in ["json", "csv"],
}

DEFAULT_USER_CONFIG = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "user_config.json")


class ConfigManager:
    """
    Valores padrão de execução sobrescritos pelo arquivo do usuário.

    Args:
        config_file: Arquivo do usuário (JSON, ou YAML pela extensão).
    """

    def __init__(self, config_file: str = DEFAULT_USER_CONFIG):
        self.logger = logging.getLogger(__name__)
        self.config_file = config_file
        self.config = DEFAULT_CONFIG.copy()
        self.load_config()

    def load_config(self) -> None:
        """Volta aos padrões e aplica o arquivo do usuário, se existir."""
        self.config = DEFAULT_CONFIG.copy()
        try:
            user_config = load_mapping(self.config_file, missing_ok=True)
        except ConfigurationError as e:
            self.logger.error(f"Erro ao carregar configurações: {e}")
            self.logger.info("Usando configurações padrão.")
            return
        if not user_config:
            self.logger.debug(f"Sem configurações do usuário em {self.config_file}; usando padrões.")
            return
        rejected = self.update(user_config)
        if rejected:
            self.logger.warning(f"Configurações ignoradas: {', '.join(rejected)}")
        self.logger.info(f"Configurações do usuário carregadas de {self.config_file}")

    def get(self, key: str, default: Any = None) -> Any:
        """Valor de ``key``, ou ``default`` para chaves desconhecidas."""
        return self.config.get(key, default)

    def set(self, key: str, value: Any) -> bool:
        """
        Altera uma configuração em memória.

        Returns:
            False (sem alterar nada) se a chave é desconhecida ou o valor
            não passa em ``CONFIG_VALIDATORS``.
        """
        if key not in self.config:
            self.logger.warning(f"Configuração desconhecida: {key}")
            return False
        if not self._validate_config_value(key, value):
            self.logger.warning(f"Valor inválido para {key}: {value!r}. Mantendo {self.config[key]!r}.")
            return False
        self.config[key] = value
        return True

    def update(self, config_dict: Dict[str, Any]) -> List[str]:
        """
        Aplica várias configurações.

        Returns:
            Chaves rejeitadas, na ordem recebida.
        """
        return [key for key, value in config_dict.items() if not self.set(key, value)]

    def _validate_config_value(self, key: str, value: Any) -> bool:
        validator = CONFIG_VALIDATORS.get(key)
        if validator is None:
            return True
        try:
            return bool(validator(value))
        except Exception:
            return False


# Cria uma instância global do gerenciador de configurações
_config_manager = ConfigManager()


def get_config(key: str, default: Any = None) -> Any:
    """Obtém o valor de uma configuração."""
    return _config_manager.get(key, default)


def set_config(key: str, value: Any) -> bool:
    """Altera uma configuração da instância global."""
    return _config_manager.set(key, value)


def reload_config() -> None:
    """Descarta alterações em memória e relê o arquivo do usuário."""
    _config_manager.load_config()
