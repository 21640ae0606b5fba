"""
Hierarquia de exceções da biblioteca.

Cada classe corresponde a um código de saída da linha de comando
(ver ``EXIT_CODES``).
"""


class CausalNetError(Exception):
    """Classe base para todos os erros da biblioteca."""


class DomainError(CausalNetError, ValueError):
    """Argumento fora do domínio matemático da operação."""


class StructuralError(CausalNetError, ValueError):
    """Dimensões incompatíveis ou arquitetura inválida."""


class ConfigurationError(CausalNetError, ValueError):
    """Componente ausente ou configuração inconsistente."""


class DataError(CausalNetError):
    """Dados insuficientes ou mal formados (braço vazio, CSV inválido...)."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class NumericalError(CausalNetError):
    """Base para falhas numéricas."""


class DivergenceError(NumericalError):
    """Perda não finita durante o treinamento."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class ConvergenceError(NumericalError):
    """Otimizador iterativo não convergiu."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class MonteCarloError(NumericalError):
    """Proporção de replicações com falha acima do limite."""


class ReportWriteError(CausalNetError, OSError):
    """Falha de IO ao gravar um relatório ou checkpoint."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

# Ordem importa: a primeira classe compatível define o código
EXIT_CODES = [
    (StructuralError, EXIT_USAGE),
    (ConfigurationError, EXIT_USAGE),
    (DataError, EXIT_DATA),
    (ReportWriteError, EXIT_DATA),
    (DomainError, EXIT_NUMERICAL),
    (NumericalError, EXIT_NUMERICAL),
]


def exit_code_for(error):
    """
    Mapeia uma exceção para o código de saída documentado.
    
    Args:
        error (BaseException): Exceção capturada.
        
    Returns:
        int: Código de saída (2, 3 ou 4).
    """
    for error_type, code in EXIT_CODES:
        if isinstance(error, error_type):
            return code
    return EXIT_NUMERICAL
