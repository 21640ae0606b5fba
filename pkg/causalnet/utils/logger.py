# causalnet/utils/logger.py
import logging
import os
import sys
from logging.handlers import RotatingFileHandler

from colorama import Fore, Style

CONSOLE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
# replicações podem rodar em threads; o arquivo registra qual
FILE_FORMAT = '%(asctime)s - %(threadName)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

LEVEL_COLORS = {
    logging.DEBUG: Style.DIM,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Style.BRIGHT,
}


class ColorFormatter(logging.Formatter):
    """Colore o nível da mensagem no console (stderr interativo)."""

    def format(self, record):
        text = super().format(record)
        color = LEVEL_COLORS.get(record.levelno)
        if color:
            text = text.replace(record.levelname, f"{color}{record.levelname}{Style.RESET_ALL}", 1)
        return text


def resolve_level(log_level=None):
    """
    Converte o nível pedido em constante do ``logging``.

    Args:
        log_level (int|str|None): Nível numérico, nome (DEBUG, INFO, ...) ou
            None para ler a variável de ambiente LOG_LEVEL.

    Returns:
        int: Nível; nomes desconhecidos caem em INFO.
    """
    if log_level is None:
        log_level = os.environ.get('LOG_LEVEL', 'INFO')
    if isinstance(log_level, str):
        return getattr(logging, log_level.upper(), logging.INFO)
    return int(log_level)


def setup_logger(log_level=None, log_file=None, max_bytes=2*1024*1024, backup_count=5):
    """
    Configura o logger raiz: console em stderr (o stdout fica livre para
    relatórios) e arquivo opcional com rotação.

    Args:
        log_level (int|str|None): Nível de logging ou None para ler de env LOG_LEVEL.
        log_file (str): Arquivo de log. Se None, logs vão apenas para o console.
        max_bytes (int): Tamanho máximo do arquivo antes da rotação (default 2MB).
        backup_count (int): Quantidade de arquivos de backup mantidos.

    Returns:
        logging.Logger: Logger raiz configurado.
    """
    level = resolve_level(log_level)
    root = logging.getLogger()
    root.setLevel(level)
    for handler in root.handlers[:]:
        root.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stderr)
    formatter_cls = ColorFormatter if getattr(sys.stderr, 'isatty', lambda: False)() else logging.Formatter
    console_handler.setFormatter(formatter_cls(CONSOLE_FORMAT, DATE_FORMAT))
    root.addHandler(console_handler)

    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        file_handler = RotatingFileHandler(log_file, maxBytes=max_bytes, backupCount=backup_count, encoding='utf-8')
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT, DATE_FORMAT))
        root.addHandler(file_handler)

    root.debug(f"Logger configurado. Nível: {logging.getLevelName(level)} | Arquivo: {log_file or 'console'}")
    return root


def get_logger(name):
    """Logger de um componente da biblioteca, sob o prefixo ``causalnet``."""
    return logging.getLogger(f"causalnet.{name}")
