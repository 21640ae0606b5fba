"""
Estruturas de dados de entrada dos estimadores.
"""
import enum
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from causalnet.utils.errors import DataError, DomainError, StructuralError
from causalnet.utils.numeric import check_finite


class Estimand(str, enum.Enum):
    """Parâmetro causal alvo."""
    ACE = "ACE"
    ACET = "ACET"

    @classmethod
    def parse(cls, value) -> "Estimand":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise DomainError(f"Estimando desconhecido: {value}") from None


@dataclass(frozen=True)
class SeriesLayout:
    """
    Partição das covariáveis em séries temporais e covariáveis estáticas.

    Attributes:
        series: Pares (nome da série, colunas em ordem temporal).
        static: Colunas que não são séries.
    """
    series: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()
    static: Tuple[str, ...] = ()

    def __post_init__(self):
        series = tuple((str(name), tuple(cols)) for name, cols in self.series)
        object.__setattr__(self, 'series', series)
        object.__setattr__(self, 'static', tuple(self.static))
        seen = set()
        for name, cols in series:
            if len(cols) < 2:
                raise StructuralError(f"Série '{name}' precisa de pelo menos 2 pontos no tempo")
            for col in cols:
                if col in seen:
                    raise StructuralError(f"Coluna '{col}' aparece mais de uma vez no layout")
                seen.add(col)
        for col in self.static:
            if col in seen:
                raise StructuralError(f"Coluna '{col}' aparece mais de uma vez no layout")
            seen.add(col)

    @property
    def columns(self) -> List[str]:
        """Colunas em ordem série-maior (cada série contígua), estáticas por último."""
        ordered = [col for _, cols in self.series for col in cols]
        return ordered + list(self.static)

    @property
    def n_series(self) -> int:
        return len(self.series)

    @property
    def series_lengths(self) -> List[int]:
        return [len(cols) for _, cols in self.series]

    @property
    def n_static(self) -> int:
        return len(self.static)


@dataclass
class Dataset:
    """
    Amostra (y_i, t_i, x_i), i = 1..n.

    Attributes:
        y: Desfecho (contínuo ou binário).
        t: Tratamento em {0, 1}.
        x: Matriz de covariáveis n × d.
        columns: Nomes das colunas de ``x``.
        layout: Layout de séries opcional, coerente com ``columns``.
    """
    y: np.ndarray
    t: np.ndarray
    x: np.ndarray
    columns: Optional[List[str]] = None
    layout: Optional[SeriesLayout] = None

    def __post_init__(self):
        self.y = check_finite(self.y, 'y').reshape(-1)
        self.x = check_finite(self.x, 'x')
        if self.x.ndim == 1:
            self.x = self.x.reshape(-1, 1)
        t = np.asarray(self.t)
        if t.size and not np.all(np.isin(t, (0, 1))):
            raise DomainError("Tratamento deve conter apenas 0 e 1")
        self.t = t.astype(np.int64).reshape(-1)
        if not (len(self.y) == len(self.t) == self.x.shape[0]):
            raise StructuralError(
                f"Tamanhos incompatíveis: y={len(self.y)}, t={len(self.t)}, x={self.x.shape[0]}"
            )
        if self.columns is None:
            self.columns = [f"x{j + 1}" for j in range(self.x.shape[1])]
        if len(self.columns) != self.x.shape[1]:
            raise StructuralError("Número de nomes de colunas difere de x")
        if self.layout is not None and self.layout.columns != list(self.columns):
            raise StructuralError("Layout de séries não corresponde às colunas de x")

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def n1(self) -> int:
        return int(self.t.sum())

    @property
    def n0(self) -> int:
        return self.n - self.n1

    def require_both_arms(self) -> None:
        """Garante ao menos uma unidade tratada e uma controle."""
        if self.n1 == 0 or self.n0 == 0:
            raise DataError(f"Os dois braços precisam de observações (n1={self.n1}, n0={self.n0})")

    def subset(self, mask: np.ndarray) -> "Dataset":
        """Subamostra pelas linhas de ``mask``."""
        return Dataset(y=self.y[mask], t=self.t[mask], x=self.x[mask],
                       columns=list(self.columns), layout=self.layout)


@dataclass
class NuisanceFit:
    """
    Valores ajustados das funções incômodas em cada observação.

    Attributes:
        mu0: μ̂₀(x_i).
        p: p̂(x_i) = P̂[T=1|X=x_i], em (0, 1).
        p_marginal: P̂[T=1] = n₁/n.
        mu1: μ̂₁(x_i) (obrigatório para o ACE).
        models: Preditores treinados, por nome (opcional).
        notes: Avisos registrados durante o ajuste.
    """
    mu0: np.ndarray
    p: np.ndarray
    p_marginal: float
    mu1: Optional[np.ndarray] = None
    models: dict = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.mu0 = check_finite(self.mu0, 'mu0').reshape(-1)
        self.p = check_finite(self.p, 'p').reshape(-1)
        if self.mu1 is not None:
            self.mu1 = check_finite(self.mu1, 'mu1').reshape(-1)
        if np.any(self.p <= 0) or np.any(self.p >= 1):
            raise DomainError("p̂ deve estar estritamente entre 0 e 1")
        if not (0.0 < self.p_marginal < 1.0):
            raise DomainError(f"P̂[T=1] deve estar em (0, 1): {self.p_marginal}")

    @classmethod
    def from_vectors(cls, data: Dataset, mu0, p, mu1=None, **kwargs) -> "NuisanceFit":
        """Monta o ajuste usando P̂[T=1] = n₁/n da própria amostra."""
        data.require_both_arms()
        return cls(mu0=mu0, p=p, mu1=mu1, p_marginal=data.n1 / data.n, **kwargs)
