# causalnet/utils/__init__.py
"""
Utilitários: logging, erros, números aleatórios, eventos e IO.
"""
import json
import logging
import os

import yaml

from causalnet.utils.errors import ConfigurationError

YAML_SUFFIXES = ('.yaml', '.yml')


def load_mapping(file_path, missing_ok=True):
    """
    Carrega um dicionário de um arquivo JSON ou YAML (pela extensão).

    Args:
        file_path (str): Caminho do arquivo.
        missing_ok (bool): Se True, arquivo inexistente retorna {}.

    Returns:
        dict: Conteúdo do arquivo.

    Raises:
        ConfigurationError: Arquivo ausente (com ``missing_ok=False``),
            inválido ou cujo conteúdo não é um objeto.
    """
    if not os.path.exists(file_path):
        if missing_ok:
            return {}
        raise ConfigurationError(f"Arquivo de configuração não encontrado: {file_path}")
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            if str(file_path).lower().endswith(YAML_SUFFIXES):
                data = yaml.safe_load(f)
            else:
                data = json.load(f)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        logging.error(f"Erro ao carregar arquivo {file_path}: {e}")
        raise ConfigurationError(f"Arquivo inválido {file_path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Conteúdo de {file_path} deve ser um objeto")
    return data
