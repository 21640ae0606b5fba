"""
Redes neurais implementadas do zero (numpy) para o ajuste das funções
incômodas.

Três arquiteturas:

* ``StructuredCnn`` (variante teórica): E cadeias paralelas de convoluções
  completas de um canal, ``h_e^l = σ(W_e^l h_e^{l-1} − b_e^l)``, com vetores
  de tamanho ``d_l = d + S·l`` e leitura linear ``Σ_e c_e' h_e^L``.
* ``ChannelCnn`` (variante prática): convoluções multicanal (cada canal da
  camada l soma os filtros aplicados a todos os canais da camada l−1),
  ramo denso para covariáveis estáticas, achatamento e cabeça densa.
* ``Mlp``: rede totalmente conectada com duas camadas ocultas.

Todas expõem ``params`` (dicionário ordenado de arrays), ``forward`` e
``backward`` por lote; a saída é o escore bruto, sem corte nem link.
"""
import enum
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel as PydanticModel, ConfigDict, Field, model_validator

from causalnet.utils.errors import StructuralError
from causalnet.utils.numeric import Rng

Params = Dict[str, np.ndarray]


class CnnVariant(str, enum.Enum):
    THEORETICAL = "theoretical"
    PRACTICAL = "practical"


class OutputKind(str, enum.Enum):
    REGRESSION = "regression"
    PROPENSITY_LOGIT = "propensity-logit"


class CnnSpec(PydanticModel):
    """
    Descrição de uma CNN.

    Attributes:
        d: Comprimento da entrada (variante prática: comprimento de cada série).
        S: Alcance do filtro menos um; máscaras têm S+1 coeficientes.
        L: Profundidade (variante teórica).
        E: Cadeias paralelas (variante teórica).
        M_prime: Limite de corte da saída (= 2M); None desliga o corte.
        variant: "theoretical" ou "practical".
        channels_per_layer: Canais por camada oculta (variante prática).
        n_series: Séries de entrada (canais da camada 0, variante prática).
        n_static: Covariáveis estáticas (variante prática).
        static_branch_widths: Larguras do ramo denso das estáticas.
        head_widths: Larguras ocultas da cabeça densa após o achatamento.
        require_approximation_regime: Exige L >= 2d/(S−1).
    """
    model_config = ConfigDict(extra='forbid', frozen=True)

    d: int = Field(ge=1)
    S: int = Field(default=2, ge=1)
    L: int = Field(default=2, ge=1)
    E: int = Field(default=1, ge=1)
    M_prime: Optional[float] = Field(default=None, gt=0)
    variant: CnnVariant = CnnVariant.THEORETICAL
    channels_per_layer: List[int] = Field(default_factory=lambda: [128, 16])
    n_series: int = Field(default=1, ge=1)
    n_static: int = Field(default=0, ge=0)
    static_branch_widths: List[int] = Field(default_factory=lambda: [16])
    head_widths: List[int] = Field(default_factory=list)
    require_approximation_regime: bool = False

    @model_validator(mode='after')
    def _check_architecture(self):
        if self.variant == CnnVariant.THEORETICAL:
            if not (2 <= self.S <= self.d):
                raise ValueError(f"variante teórica exige 2 <= S <= d (S={self.S}, d={self.d})")
            if self.require_approximation_regime and self.L < 2 * self.d / (self.S - 1):
                raise ValueError(f"L={self.L} abaixo de 2d/(S-1)={2 * self.d / (self.S - 1):.2f}")
        else:
            if not self.channels_per_layer or min(self.channels_per_layer) < 1:
                raise ValueError("channels_per_layer precisa de larguras >= 1")
        for widths in (self.static_branch_widths, self.head_widths):
            if any(w < 1 for w in widths):
                raise ValueError("larguras devem ser >= 1")
        return self

    @property
    def input_dim(self) -> int:
        """Número de colunas de x que a rede consome."""
        if self.variant == CnnVariant.PRACTICAL:
            return self.n_series * self.d + self.n_static
        return self.d

    def layer_length(self, layer: int) -> int:
        """d_l = d + S·l."""
        return self.d + self.S * layer


class MlpSpec(PydanticModel):
    """Rede totalmente conectada com duas camadas ocultas."""
    model_config = ConfigDict(extra='forbid', frozen=True)

    input_dim: int = Field(ge=1)
    widths: Tuple[int, int] = (128, 80)
    output_kind: OutputKind = OutputKind.REGRESSION
    M_prime: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode='after')
    def _check_widths(self):
        if min(self.widths) < 1:
            raise ValueError("larguras devem ser >= 1")
        return self


Architecture = Union[CnnSpec, MlpSpec]


@dataclass(frozen=True)
class FilterMask:
    """Coeficientes (w_0, ..., w_S) de um filtro convolucional."""
    taps: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'taps', tuple(float(w) for w in self.taps))
        if len(self.taps) < 1:
            raise StructuralError("Máscara precisa de pelo menos um coeficiente")

    @property
    def S(self) -> int:
        return len(self.taps) - 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.taps, dtype=float)


@dataclass(frozen=True)
class StructuredBias:
    """
    Viés (b_1..b_S, b_{S+1} repetido d_l − 2S vezes, b_{d_l−S+1}..b_{d_l}).
    """
    head: Tuple[float, ...]
    middle: float
    tail: Tuple[float, ...]
    layer_size: int

    def __post_init__(self):
        object.__setattr__(self, 'head', tuple(float(v) for v in self.head))
        object.__setattr__(self, 'tail', tuple(float(v) for v in self.tail))
        if len(self.head) != len(self.tail):
            raise StructuralError("Cabeça e cauda do viés precisam ter S elementos")
        if self.layer_size < 2 * len(self.head):
            raise StructuralError(f"Camada de tamanho {self.layer_size} menor que 2S={2 * len(self.head)}")

    def materialize(self) -> np.ndarray:
        """Vetor de tamanho d_l."""
        middle = np.full(self.layer_size - 2 * len(self.head), self.middle)
        return np.concatenate([np.asarray(self.head), middle, np.asarray(self.tail)])


def toeplitz_matrix(mask: Union[FilterMask, Sequence[float]], in_len: int) -> np.ndarray:
    """
    Matriz (in_len + S) × in_len da convolução completa com a máscara.

    Entrada (i, j) = w_{i−j} para 0 <= i − j <= S, zero fora da banda.
    """
    taps = mask.as_array() if isinstance(mask, FilterMask) else np.asarray(mask, dtype=float)
    S = len(taps) - 1
    W = np.zeros((in_len + S, in_len))
    for j in range(in_len):
        W[j:j + S + 1, j] = taps
    return W


def _full_windows(h: np.ndarray, S: int) -> np.ndarray:
    """Janelas (..., len + S, S + 1) de h preenchido com S zeros em cada ponta."""
    pad = [(0, 0)] * (h.ndim - 1) + [(S, S)]
    return sliding_window_view(np.pad(h, pad), S + 1, axis=-1)


def conv_layer_forward(h_prev, mask, bias) -> np.ndarray:
    """
    Uma camada convolucional de um canal: σ(W h_prev − b).

    Args:
        h_prev: Vetor de tamanho d_{l−1}.
        mask: ``FilterMask`` ou sequência com S+1 coeficientes.
        bias: ``StructuredBias``, vetor de tamanho d_{l−1} + S ou escalar.

    Returns:
        np.ndarray: Vetor de tamanho d_{l−1} + S.

    Raises:
        StructuralError: Se as dimensões não forem compatíveis.
    """
    h = np.asarray(h_prev, dtype=float)
    if h.ndim != 1:
        raise StructuralError(f"h_prev deve ser um vetor, recebido shape {h.shape}")
    taps = mask.as_array() if isinstance(mask, FilterMask) else np.asarray(mask, dtype=float)
    S = len(taps) - 1
    out_len = len(h) + S
    b = bias.materialize() if isinstance(bias, StructuredBias) else np.asarray(bias, dtype=float)
    if b.ndim == 0:
        b = np.full(out_len, float(b))
    if b.shape != (out_len,):
        raise StructuralError(f"Viés de tamanho {b.shape} incompatível com a saída {out_len}")
    z = _full_windows(h, S) @ taps[::-1] - b
    return np.maximum(z, 0.0)


class _StructuredConv:
    """Camada de E cadeias paralelas (convolução por canal, sem mistura)."""

    def __init__(self, index: int, S: int, in_len: int, channels: int, structured_bias: bool):
        self.index = index
        self.S = S
        self.in_len = in_len
        self.out_len = in_len + S
        self.channels = channels
        self.structured_bias = structured_bias
        self.prefix = f"conv{index}"
        if structured_bias and self.out_len < 2 * S:
            raise StructuralError(f"Camada {index}: d_l={self.out_len} menor que 2S")

    def init_params(self, params: Params, rng: Rng) -> None:
        E, S = self.channels, self.S
        limit = math.sqrt(6.0 / (S + 1))
        params[f"{self.prefix}.mask"] = rng.uniform_range(-limit, limit, (E, S + 1))
        if self.structured_bias:
            params[f"{self.prefix}.bias_head"] = np.zeros((E, S))
            params[f"{self.prefix}.bias_middle"] = np.zeros(E)
            params[f"{self.prefix}.bias_tail"] = np.zeros((E, S))
        else:
            params[f"{self.prefix}.bias"] = np.zeros((E, self.out_len))

    def bias(self, params: Params) -> np.ndarray:
        if not self.structured_bias:
            return params[f"{self.prefix}.bias"]
        E, S = self.channels, self.S
        middle = np.repeat(params[f"{self.prefix}.bias_middle"][:, None], self.out_len - 2 * S, axis=1)
        return np.concatenate([params[f"{self.prefix}.bias_head"], middle,
                               params[f"{self.prefix}.bias_tail"]], axis=1)

    def forward(self, h: np.ndarray, params: Params):
        windows = _full_windows(h, self.S)
        mask = params[f"{self.prefix}.mask"]
        z = np.einsum('bejm,em->bej', windows, mask[:, ::-1]) - self.bias(params)[None]
        return np.maximum(z, 0.0), (windows, z)

    def backward(self, dout: np.ndarray, cache, params: Params, grads: Params, need_input: bool):
        windows, z = cache
        S = self.S
        dz = dout * (z > 0)
        grads[f"{self.prefix}.mask"] = np.einsum('bej,bejm->em', dz, windows)[:, ::-1]
        db = -dz.sum(axis=0)
        if self.structured_bias:
            grads[f"{self.prefix}.bias_head"] = db[:, :S]
            grads[f"{self.prefix}.bias_middle"] = db[:, S:self.out_len - S].sum(axis=1)
            grads[f"{self.prefix}.bias_tail"] = db[:, self.out_len - S:]
        else:
            grads[f"{self.prefix}.bias"] = db
        if not need_input:
            return None
        mask = params[f"{self.prefix}.mask"]
        return np.einsum('beik,ek->bei', sliding_window_view(dz, S + 1, axis=-1), mask)


class _ChannelConv:
    """Convolução completa multicanal com um viés escalar por canal de saída."""

    def __init__(self, index: int, S: int, in_len: int, in_channels: int, out_channels: int):
        self.index = index
        self.S = S
        self.in_len = in_len
        self.out_len = in_len + S
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.prefix = f"conv{index}"

    def init_params(self, params: Params, rng: Rng) -> None:
        limit = math.sqrt(6.0 / (self.in_channels * (self.S + 1)))
        params[f"{self.prefix}.kernel"] = rng.uniform_range(
            -limit, limit, (self.out_channels, self.in_channels, self.S + 1))
        params[f"{self.prefix}.bias"] = np.zeros(self.out_channels)

    def forward(self, h: np.ndarray, params: Params):
        windows = _full_windows(h, self.S)
        kernel = params[f"{self.prefix}.kernel"]
        z = np.einsum('bcjm,ocm->boj', windows, kernel[:, :, ::-1], optimize=True)
        z = z + params[f"{self.prefix}.bias"][None, :, None]
        return np.maximum(z, 0.0), (windows, z)

    def backward(self, dout: np.ndarray, cache, params: Params, grads: Params, need_input: bool):
        windows, z = cache
        dz = dout * (z > 0)
        grads[f"{self.prefix}.kernel"] = np.einsum('boj,bcjm->ocm', dz, windows, optimize=True)[:, :, ::-1]
        grads[f"{self.prefix}.bias"] = dz.sum(axis=(0, 2))
        if not need_input:
            return None
        kernel = params[f"{self.prefix}.kernel"]
        return np.einsum('bojk,ock->bcj', sliding_window_view(dz, self.S + 1, axis=-1), kernel, optimize=True)


class _Dense:
    """Camada densa, com ReLU opcional."""

    def __init__(self, name: str, in_dim: int, out_dim: int, relu: bool):
        self.name = name
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.relu = relu

    def init_params(self, params: Params, rng: Rng) -> None:
        gain = 6.0 if self.relu else 3.0
        limit = math.sqrt(gain / self.in_dim)
        params[f"{self.name}.weight"] = rng.uniform_range(-limit, limit, (self.in_dim, self.out_dim))
        params[f"{self.name}.bias"] = np.zeros(self.out_dim)

    def forward(self, x: np.ndarray, params: Params):
        z = x @ params[f"{self.name}.weight"] + params[f"{self.name}.bias"]
        return (np.maximum(z, 0.0) if self.relu else z), (x, z)

    def backward(self, dout: np.ndarray, cache, params: Params, grads: Params, need_input: bool):
        x, z = cache
        dz = dout * (z > 0) if self.relu else dout
        grads[f"{self.name}.weight"] = x.T @ dz
        grads[f"{self.name}.bias"] = dz.sum(axis=0)
        if not need_input:
            return None
        return dz @ params[f"{self.name}.weight"].T


def _dense_stack(prefix: str, in_dim: int, widths: Sequence[int]) -> Tuple[List[_Dense], int]:
    layers = []
    for k, width in enumerate(widths, start=1):
        layers.append(_Dense(f"{prefix}{k}", in_dim, width, relu=True))
        in_dim = width
    return layers, in_dim


class Network:
    """Base das redes: parâmetros nomeados, inicialização e contagem."""

    def __init__(self, spec: Architecture):
        self.spec = spec
        self.params: Params = {}

    @property
    def input_dim(self) -> int:
        return self.spec.input_dim

    def initialize(self, rng: Rng) -> "Network":
        """Inicialização uniforme escalada pelo fan-in (He para ReLU)."""
        self.params = {}
        for layer in self._all_layers():
            layer.init_params(self.params, rng)
        return self

    def _check_input(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.input_dim:
            raise StructuralError(f"Entrada com {X.shape[1]} colunas; a rede espera {self.input_dim}")
        return X

    def predict_raw(self, X: np.ndarray) -> np.ndarray:
        """Escores brutos, sem guardar caches."""
        return self.forward(X)[0]

    def copy_params(self) -> Params:
        return {k: v.copy() for k, v in self.params.items()}

    def _all_layers(self):
        raise NotImplementedError

    def forward(self, X: np.ndarray):
        raise NotImplementedError

    def backward(self, grad_raw: np.ndarray, caches) -> Params:
        raise NotImplementedError


class StructuredCnn(Network):
    """CNN teórica: E cadeias paralelas, vieses estruturados nas camadas 1..L−1."""

    def __init__(self, spec: CnnSpec):
        super().__init__(spec)
        if spec.variant != CnnVariant.THEORETICAL:
            raise StructuralError("StructuredCnn exige a variante teórica")
        self.layers = [
            _StructuredConv(l, spec.S, spec.layer_length(l - 1), spec.E, structured_bias=l < spec.L)
            for l in range(1, spec.L + 1)
        ]
        self.out_len = spec.layer_length(spec.L)

    def _all_layers(self):
        return self.layers + [self]

    def init_params(self, params: Params, rng: Rng) -> None:
        limit = math.sqrt(3.0 / (self.spec.E * self.out_len))
        params["readout"] = rng.uniform_range(-limit, limit, (self.spec.E, self.out_len))

    def layer_lengths(self, X: np.ndarray) -> List[int]:
        """Comprimentos de h^0..h^L observados num passe direto."""
        X = self._check_input(X)
        h = np.broadcast_to(X[:, None, :], (X.shape[0], self.spec.E, X.shape[1]))
        lengths = [h.shape[-1]]
        for layer in self.layers:
            h, _ = layer.forward(h, self.params)
            lengths.append(h.shape[-1])
        return lengths

    def forward(self, X: np.ndarray):
        X = self._check_input(X)
        h = np.broadcast_to(X[:, None, :], (X.shape[0], self.spec.E, X.shape[1]))
        caches = []
        for layer in self.layers:
            h, cache = layer.forward(h, self.params)
            caches.append(cache)
        raw = np.einsum('bej,ej->b', h, self.params["readout"])
        return raw, (caches, h)

    def backward(self, grad_raw: np.ndarray, caches) -> Params:
        layer_caches, h_last = caches
        grads: Params = {"readout": np.einsum('b,bej->ej', grad_raw, h_last)}
        dh = grad_raw[:, None, None] * self.params["readout"][None]
        for k in range(len(self.layers) - 1, -1, -1):
            dh = self.layers[k].backward(dh, layer_caches[k], self.params, grads, need_input=k > 0)
        return grads


class ChannelCnn(Network):
    """CNN prática: convoluções multicanal, ramo estático e cabeça densa."""

    def __init__(self, spec: CnnSpec):
        super().__init__(spec)
        if spec.variant != CnnVariant.PRACTICAL:
            raise StructuralError("ChannelCnn exige a variante prática")
        self.convs = []
        in_channels, length = spec.n_series, spec.d
        for l, channels in enumerate(spec.channels_per_layer, start=1):
            self.convs.append(_ChannelConv(l, spec.S, length, in_channels, channels))
            in_channels, length = channels, length + spec.S
        self.flat_dim = in_channels * length
        self.static_layers, static_dim = (
            _dense_stack("static", spec.n_static, spec.static_branch_widths) if spec.n_static else ([], 0)
        )
        self.has_static = spec.n_static > 0
        self.head_layers, head_in = _dense_stack("head", self.flat_dim + static_dim, spec.head_widths)
        self.output = _Dense("output", head_in, 1, relu=False)

    def _all_layers(self):
        return self.convs + self.static_layers + self.head_layers + [self.output]

    def layer_lengths(self, X: np.ndarray) -> List[int]:
        X = self._check_input(X)
        return [self.spec.layer_length(l) for l in range(len(self.convs) + 1)]

    def forward(self, X: np.ndarray):
        X = self._check_input(X)
        spec = self.spec
        B = X.shape[0]
        h = X[:, :spec.n_series * spec.d].reshape(B, spec.n_series, spec.d)
        conv_caches = []
        for conv in self.convs:
            h, cache = conv.forward(h, self.params)
            conv_caches.append(cache)
        features = h.reshape(B, -1)
        static_caches = []
        if self.has_static:
            s = X[:, spec.n_series * spec.d:]
            for layer in self.static_layers:
                s, cache = layer.forward(s, self.params)
                static_caches.append(cache)
            features = np.concatenate([features, s], axis=1)
        head_caches = []
        for layer in self.head_layers:
            features, cache = layer.forward(features, self.params)
            head_caches.append(cache)
        raw, out_cache = self.output.forward(features, self.params)
        return raw[:, 0], (conv_caches, static_caches, head_caches, out_cache, h.shape)

    def backward(self, grad_raw: np.ndarray, caches) -> Params:
        conv_caches, static_caches, head_caches, out_cache, conv_shape = caches
        grads: Params = {}
        d = self.output.backward(grad_raw[:, None], out_cache, self.params, grads, need_input=True)
        for layer, cache in zip(reversed(self.head_layers), reversed(head_caches)):
            d = layer.backward(d, cache, self.params, grads, need_input=True)
        if self.has_static:
            ds = d[:, self.flat_dim:]
            d = d[:, :self.flat_dim]
            for k in range(len(self.static_layers) - 1, -1, -1):
                ds = self.static_layers[k].backward(ds, static_caches[k], self.params, grads, need_input=k > 0)
        dh = d.reshape(conv_shape)
        for k in range(len(self.convs) - 1, -1, -1):
            dh = self.convs[k].backward(dh, conv_caches[k], self.params, grads, need_input=k > 0)
        return grads


class Mlp(Network):
    """Rede ReLU com duas camadas ocultas e saída linear."""

    def __init__(self, spec: MlpSpec):
        super().__init__(spec)
        self.hidden, last = _dense_stack("hidden", spec.input_dim, spec.widths)
        self.output = _Dense("output", last, 1, relu=False)

    def _all_layers(self):
        return self.hidden + [self.output]

    def forward(self, X: np.ndarray):
        h = self._check_input(X)
        caches = []
        for layer in self.hidden:
            h, cache = layer.forward(h, self.params)
            caches.append(cache)
        raw, out_cache = self.output.forward(h, self.params)
        return raw[:, 0], (caches, out_cache)

    def backward(self, grad_raw: np.ndarray, caches) -> Params:
        hidden_caches, out_cache = caches
        grads: Params = {}
        d = self.output.backward(grad_raw[:, None], out_cache, self.params, grads, need_input=True)
        for k in range(len(self.hidden) - 1, -1, -1):
            d = self.hidden[k].backward(d, hidden_caches[k], self.params, grads, need_input=k > 0)
        return grads


def build_network(arch: Architecture) -> Network:
    """Instancia a rede descrita por ``arch`` (sem inicializar)."""
    if isinstance(arch, MlpSpec):
        return Mlp(arch)
    if arch.variant == CnnVariant.PRACTICAL:
        return ChannelCnn(arch)
    return StructuredCnn(arch)


def cnn_forward(net: Network, x: np.ndarray) -> float:
    """
    Avalia uma CNN em um único vetor de entrada.

    A saída é cortada em [−M', M'] quando a especificação define ``M_prime``
    (modelos de desfecho).

    Raises:
        StructuralError: Se o tamanho de x não corresponder a ``spec.input_dim``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) != net.input_dim:
        raise StructuralError(f"x de tamanho {x.shape} incompatível com d={net.input_dim}")
    value = float(net.predict_raw(x[None, :])[0])
    m_prime = net.spec.M_prime
    if m_prime is not None:
        value = min(max(value, -m_prime), m_prime)
    return value


def parameter_count(spec: CnnSpec) -> int:
    """
    Q = E(d(1+s)(L−1) + s(1+s)L(L−1)/2 + (s+3)(d+sL)).

    Pesos compartilhados contam uma vez por linha da matriz de Toeplitz.

    Raises:
        StructuralError: Para a variante prática.
    """
    if spec.variant != CnnVariant.THEORETICAL:
        raise StructuralError("parameter_count só é definido para a variante teórica")
    E, d, s, L = spec.E, spec.d, spec.S, spec.L
    return E * (d * (1 + s) * (L - 1) + s * (1 + s) * L * (L - 1) // 2 + (s + 3) * (d + s * L))


def enumerate_parameter_slots(spec: CnnSpec) -> int:
    """
    Contagem por enumeração, na mesma convenção de ``parameter_count``.

    Por canal: cada uma das d_l linhas de W^l, l = 1..L, ocupa S+1 posições
    de máscara; a camada L soma d_L posições de viés e d_L de leitura. Os
    vieses estruturados das camadas 1..L−1 não entram na contagem.
    """
    if spec.variant != CnnVariant.THEORETICAL:
        raise StructuralError("enumeração só é definida para a variante teórica")
    total = 0
    for _channel in range(spec.E):
        for layer in range(1, spec.L + 1):
            rows = toeplitz_matrix(np.ones(spec.S + 1), spec.layer_length(layer - 1)).shape[0]
            total += rows * (spec.S + 1)
        d_last = spec.layer_length(spec.L)
        total += d_last  # viés livre da última camada
        total += d_last  # leitura c_e
    return total


def rate_schedule(n: int, d: int, c_E: float = 1.0, c_L: float = 1.0) -> Tuple[int, int]:
    """
    Largura e profundidade sugeridas para n observações.

    E = max(1, round(c_E·n^{d/(2d+4)})), L = max(1, round(c_L·n^{1/(4d+8)}·(ln n)²)).

    Returns:
        Tuple[int, int]: (E, L).
    """
    if n < 2 or d < 2:
        raise StructuralError(f"rate_schedule exige n >= 2 e d >= 2 (n={n}, d={d})")
    if c_E <= 0 or c_L <= 0:
        raise StructuralError("constantes c_E e c_L devem ser positivas")
    E = c_E * n ** (d / (2 * d + 4))
    L = c_L * n ** (1 / (4 * d + 8)) * math.log(n) ** 2
    return max(1, int(math.floor(E + 0.5))), max(1, int(math.floor(L + 0.5)))
