"""
Núcleo numérico: gerador pseudoaleatório determinístico, amostragem de
distribuições e quantil da normal padrão.

O gerador é um PCG64 alimentado por ``numpy.random.SeedSequence``. Um
subfluxo é identificado pela semente base mais uma tupla de índices
(``spawn_key``), de modo que a replicação ``r`` de um Monte Carlo usa
``Rng(seed).substream(r)`` independentemente de quais outras replicações
rodam.
"""
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import ndtr, ndtri

from causalnet.utils.errors import DomainError

ArrayLike = Union[float, np.ndarray]

SEED_MASK = 0xFFFF_FFFF_FFFF_FFFF
_TWO_POW_53 = float(2 ** 53)


class Rng:
    """
    Gerador determinístico com subfluxos derivados de (semente, índices).

    Cada instância deve pertencer a uma única thread.
    """

    def __init__(self, seed: int, stream: Tuple[int, ...] = ()):
        """
        Inicializa o gerador.

        Args:
            seed: Semente de 64 bits (valores maiores são truncados).
            stream: Índices do subfluxo; ``()`` é o fluxo raiz.
        """
        if int(seed) < 0:
            raise DomainError(f"Semente deve ser não negativa: {seed}")
        self.seed = int(seed) & SEED_MASK
        self.stream = tuple(int(i) for i in stream)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream)
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def substream(self, index: int) -> "Rng":
        """Retorna o subfluxo ``index`` deste gerador (novo estado, independente)."""
        if index < 0:
            raise DomainError(f"Índice de subfluxo deve ser não negativo: {index}")
        return Rng(self.seed, self.stream + (int(index),))

    def uniform(self, size=None) -> ArrayLike:
        """
        Sorteia uniformes no intervalo aberto (0, 1).

        Os valores são pontos médios da grade de 2^-53, nunca 0 nem 1.
        """
        raw = self._generator.random(size)
        return (np.floor(raw * _TWO_POW_53) + 0.5) / _TWO_POW_53

    def uniform_range(self, low: float, high: float, size=None) -> ArrayLike:
        """Uniformes em (low, high)."""
        return low + (high - low) * self.uniform(size)

    def normal(self, mean: ArrayLike = 0.0, sd: ArrayLike = 1.0, size=None) -> ArrayLike:
        """
        Sorteia da normal por inversão da CDF.

        Args:
            mean: Média (escalar ou array compatível com ``size``).
            sd: Desvio padrão, >= 0.
            size: Forma da amostra.

        Returns:
            Amostra(s) de N(mean, sd²).
        """
        sd_arr = np.asarray(sd, dtype=float)
        if np.any(sd_arr < 0):
            raise DomainError(f"Desvio padrão negativo: {sd}")
        if size is None:
            size = np.broadcast(np.asarray(mean), sd_arr).shape or None
        z = ndtri(self.uniform(size))
        return mean + sd_arr * z

    def bernoulli(self, p: ArrayLike, size=None) -> ArrayLike:
        """Sorteia 0/1 com probabilidade de sucesso ``p``."""
        p_arr = np.asarray(p, dtype=float)
        if np.any(~np.isfinite(p_arr)) or np.any(p_arr < 0) or np.any(p_arr > 1):
            raise DomainError(f"Probabilidade fora de [0, 1]: {p}")
        if size is None:
            size = p_arr.shape or None
        return (self.uniform(size) < p_arr).astype(np.int64)

    def permutation(self, n: int) -> np.ndarray:
        """Permutação aleatória de ``range(n)``."""
        return self._generator.permutation(n)

    def __repr__(self):
        return f"Rng(seed={self.seed}, stream={self.stream})"


def std_normal_quantile(p: float) -> float:
    """
    Quantil da normal padrão, Φ⁻¹(p).

    Args:
        p: Probabilidade em (0, 1).

    Returns:
        float: z tal que Φ(z) = p.

    Raises:
        DomainError: Se p estiver fora de (0, 1).
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"Probabilidade fora de (0, 1): {p}")
    return float(ndtri(p))


def std_normal_cdf(z: ArrayLike) -> ArrayLike:
    """CDF da normal padrão, Φ(z)."""
    result = ndtr(z)
    return float(result) if np.ndim(result) == 0 else result


def sample_normal(rng: Rng, mean: float, sd: float) -> float:
    """
    Um sorteio de N(mean, sd²); com sd = 0 retorna exatamente ``mean``.

    Raises:
        DomainError: Se sd < 0.
    """
    if sd < 0:
        raise DomainError(f"Desvio padrão negativo: {sd}")
    if sd == 0:
        return float(mean)
    return float(rng.normal(mean, sd))


def sample_bernoulli(rng: Rng, p: float) -> int:
    """
    Um sorteio de Bernoulli(p).

    Raises:
        DomainError: Se p estiver fora de [0, 1].
    """
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"Probabilidade fora de [0, 1]: {p}")
    return int(rng.bernoulli(p))


def check_finite(values: np.ndarray, name: str) -> np.ndarray:
    """Converte para float64 e rejeita NaN/Inf."""
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"'{name}' contém valores não finitos")
    return arr
