"""
Treinamento das redes por minimização do risco empírico, com corte da
saída em [−M', M'] (desfecho) e link logístico com aparo em [ε, 1−ε]
(propensão).
"""
import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel as PydanticModel, ConfigDict, Field
from scipy.special import expit

from causalnet.controllers import BaseController
from causalnet.models.dataset import Dataset
from causalnet.models.network import Architecture, Network, Params, build_network
from causalnet.utils.errors import ConfigurationError, DataError, DivergenceError, DomainError, StructuralError
from causalnet.utils.event_bus import TRAINING_FINISHED, EventBus
from causalnet.utils.numeric import Rng


class LossKind(str, enum.Enum):
    SQUARED = "squared"
    LOGISTIC = "logistic"


class NuisanceKind(str, enum.Enum):
    OUTCOME = "outcome"
    PROPENSITY = "propensity"


class TrainConfig(PydanticModel):
    """
    Hiperparâmetros de treinamento.

    Attributes:
        loss: Perda; None escolhe pelo tipo do modelo (quadrática/logística).
        learning_rate, beta1, beta2, adam_eps: Parâmetros do Adam.
        batch_size: Tamanho do mini-lote.
        epochs: Máximo de épocas.
        patience: Épocas sem melhora antes da parada antecipada.
        min_improvement: Melhora mínima da perda de treino em ``patience`` épocas.
        M_prime: Limite de corte; None usa 2·max|y| do treino.
        epsilon: Aparo da propensão, ε ∈ (0, 0.5).
        seed: Semente usada quando nenhum ``Rng`` é fornecido.
    """
    model_config = ConfigDict(extra='forbid', frozen=True)

    loss: Optional[LossKind] = None
    learning_rate: float = Field(default=1e-3, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)
    batch_size: int = Field(default=64, ge=1)
    epochs: int = Field(default=200, ge=1)
    patience: int = Field(default=10, ge=1)
    min_improvement: float = Field(default=1e-6, ge=0)
    M_prime: Optional[float] = Field(default=None, gt=0)
    epsilon: float = Field(default=0.01, gt=0, lt=0.5)
    seed: int = Field(default=0, ge=0)


def loss_value(kind, prediction: float, target: float) -> float:
    """
    Perda de uma observação.

    squared: (f − y)²; logistic (f = escore): ln(1 + e^f) − y·f.

    Raises:
        DomainError: Alvo não binário na perda logística.
    """
    kind = LossKind(kind)
    if kind == LossKind.SQUARED:
        return float((prediction - target) ** 2)
    if target not in (0, 1):
        raise DomainError(f"Perda logística exige alvo em {{0, 1}}: {target}")
    return float(np.logaddexp(0.0, prediction) - target * prediction)


class Adam:
    """
    Gradiente estocástico com momentos adaptativos.

    Atualiza ``params`` in-place; as somas seguem a ordem das chaves.
    """

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m: Params = {}
        self.v: Params = {}
        self.t = 0

    def step(self, params: Params, grads: Params) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        step_size = self.lr / bc1
        for k in params:
            g = grads[k]
            if k not in self.m:
                self.m[k] = np.zeros_like(params[k])
                self.v[k] = np.zeros_like(params[k])
            self.m[k] *= self.beta1
            self.m[k] += (1.0 - self.beta1) * g
            self.v[k] *= self.beta2
            self.v[k] += (1.0 - self.beta2) * (g * g)
            params[k] -= step_size * self.m[k] / (np.sqrt(self.v[k] / bc2) + self.epsilon)


@dataclass(frozen=True)
class InputScaler:
    """Escala min-max de cada coluna para [−1, 1] com estatísticas do treino."""
    low: np.ndarray
    high: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "InputScaler":
        return cls(low=X.min(axis=0), high=X.max(axis=0))

    def transform(self, X: np.ndarray) -> np.ndarray:
        span = self.high - self.low
        safe = np.where(span > 0, span, 1.0)
        scaled = 2.0 * (X - self.low) / safe - 1.0
        # colunas constantes no treino ficam em 0
        return np.where(span > 0, scaled, 0.0)


@dataclass
class NuisanceModel:
    """
    Preditor treinado de μ_t(x) (desfecho) ou p(x) (propensão).

    Attributes:
        kind: "outcome" ou "propensity".
        network: Rede com os parâmetros finais.
        scaler: Escala das covariáveis.
        m_prime: Corte da saída (desfecho).
        epsilon: Aparo da propensão.
        target_shift, target_scale: Padronização interna do alvo (desfecho).
        loss_history: Perda de treino após cada época (índice 0 = inicialização).
    """
    kind: NuisanceKind
    network: Network
    scaler: InputScaler
    m_prime: float
    epsilon: float
    target_shift: float = 0.0
    target_scale: float = 1.0
    loss: LossKind = LossKind.SQUARED
    loss_history: List[float] = field(default_factory=list)

    @property
    def initial_loss(self) -> float:
        return self.loss_history[0]

    @property
    def final_loss(self) -> float:
        return min(self.loss_history)

    def score(self, X: np.ndarray) -> np.ndarray:
        """Escore bruto da rede nas covariáveis originais."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        return self.network.predict_raw(self.scaler.transform(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        """
        Previsões: desfecho cortado em [−M', M'] ou propensão em [ε, 1−ε].
        """
        raw = self.score(X)
        if self.kind == NuisanceKind.OUTCOME and self.loss == LossKind.LOGISTIC:
            return expit(raw)
        if self.kind == NuisanceKind.OUTCOME:
            return np.clip(self.target_shift + self.target_scale * raw, -self.m_prime, self.m_prime)
        return np.clip(expit(raw), self.epsilon, 1.0 - self.epsilon)


class _Objective:
    """Perda média e gradiente em relação ao escore bruto."""

    def __init__(self, loss: LossKind, shift: float, scale: float, m_prime: float):
        self.loss = loss
        self.shift = shift
        self.scale = scale
        self.m_prime = m_prime

    def __call__(self, raw: np.ndarray, target: np.ndarray):
        B = len(raw)
        if self.loss == LossKind.LOGISTIC:
            value = float(np.mean(np.logaddexp(0.0, raw) - target * raw))
            return value, (expit(raw) - target) / B
        out = self.shift + self.scale * raw
        inside = (out > -self.m_prime) & (out < self.m_prime)
        residual = (np.clip(out, -self.m_prime, self.m_prime) - target) / self.scale
        value = float(np.mean(residual ** 2))
        return value, 2.0 * residual * inside / B


class NuisanceTrainer(BaseController):
    """Treina uma rede para uma função incômoda."""

    def __init__(self, config: Optional[TrainConfig] = None, event_bus: Optional[EventBus] = None):
        super().__init__(event_bus)
        self.config = config or TrainConfig()

    def fit(self, data: Dataset, arch: Architecture, rng: Optional[Rng] = None,
            kind: NuisanceKind = NuisanceKind.OUTCOME, arm: Optional[int] = None) -> NuisanceModel:
        """
        Ajusta o modelo por ERM com Adam em mini-lotes.

        Args:
            data: Amostra completa.
            arch: Arquitetura (``CnnSpec`` ou ``MlpSpec``).
            rng: Gerador (inicialização e embaralhamento).
            kind: Desfecho (alvo y) ou propensão (alvo t, todas as observações).
            arm: Para desfecho, treina só com t_i == arm (ex.: 0 para μ̂₀).

        Returns:
            NuisanceModel: Parâmetros com a menor perda de treino observada.

        Raises:
            DataError: Conjunto de treino vazio.
            DivergenceError: Perda não finita (indica a época).
        """
        cfg = self.config
        kind = NuisanceKind(kind)
        rng = rng or Rng(cfg.seed)
        train = data.subset(data.t == arm) if (kind == NuisanceKind.OUTCOME and arm is not None) else data
        if train.n == 0:
            raise DataError(f"Conjunto de treino vazio para o modelo {kind.value} (braço {arm})")

        network = build_network(arch)
        if network.input_dim != train.d:
            raise StructuralError(f"Arquitetura espera {network.input_dim} covariáveis; dados têm {train.d}")
        network.initialize(rng.substream(0))
        scaler = InputScaler.fit(train.x)
        X = scaler.transform(train.x)

        if kind == NuisanceKind.OUTCOME:
            target = train.y
            loss = cfg.loss or LossKind.SQUARED
            m_prime = cfg.M_prime or arch.M_prime or default_outcome_m_prime(target)
            shift = float(np.mean(target))
            sd = float(np.std(target))
            scale = sd if sd > 0 else 1.0
            if loss == LossKind.LOGISTIC:
                shift, scale = 0.0, 1.0
        else:
            target = train.t.astype(float)
            loss = cfg.loss or LossKind.LOGISTIC
            if loss != LossKind.LOGISTIC:
                raise ConfigurationError("Modelo de propensão exige perda logística")
            m_prime, shift, scale = math.inf, 0.0, 1.0
        if loss == LossKind.LOGISTIC and not np.all(np.isin(target, (0.0, 1.0))):
            raise DomainError("Perda logística exige alvo binário")

        objective = _Objective(loss, shift, scale, m_prime)
        optimizer = Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps)
        shuffle_rng = rng.substream(1)

        def full_loss(epoch: int) -> float:
            value, _ = objective(network.predict_raw(X), target)
            if not math.isfinite(value):
                raise DivergenceError(f"Perda não finita na época {epoch}", epoch=epoch)
            return value

        history = [full_loss(0)]
        best_loss, best_params, best_epoch = history[0], network.copy_params(), 0
        for epoch in range(1, cfg.epochs + 1):
            order = shuffle_rng.permutation(train.n)
            for start in range(0, train.n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                raw, caches = network.forward(X[idx])
                value, grad_raw = objective(raw, target[idx])
                if not math.isfinite(value):
                    raise DivergenceError(f"Perda não finita na época {epoch}", epoch=epoch)
                optimizer.step(network.params, network.backward(grad_raw, caches))
            current = full_loss(epoch)
            history.append(current)
            self.logger.debug(f"Época {epoch}: perda de treino {current:.6g}")
            if current < best_loss:
                if best_loss - current >= cfg.min_improvement:
                    best_epoch = epoch
                best_loss, best_params = current, network.copy_params()
            if epoch - best_epoch >= cfg.patience:
                self.logger.debug(f"Parada antecipada na época {epoch}")
                break

        network.params = best_params
        if loss == LossKind.SQUARED:
            history = [v * scale ** 2 for v in history]
        model = NuisanceModel(kind=kind, network=network, scaler=scaler, m_prime=m_prime,
                              epsilon=cfg.epsilon, target_shift=shift, target_scale=scale,
                              loss=loss, loss_history=history)
        self.publish_event(TRAINING_FINISHED, {"kind": kind.value, "epochs": len(history) - 1,
                                               "final_loss": model.final_loss})
        return model


def train_nuisance(data: Dataset, arch: Architecture, cfg: Optional[TrainConfig] = None,
                   rng: Optional[Rng] = None, kind: NuisanceKind = NuisanceKind.OUTCOME,
                   arm: Optional[int] = None) -> NuisanceModel:
    """Atalho funcional para ``NuisanceTrainer(cfg).fit(...)``."""
    return NuisanceTrainer(cfg).fit(data, arch, rng=rng, kind=kind, arm=arm)


def default_outcome_m_prime(y: np.ndarray) -> float:
    """M' = 2M com M = max|y|."""
    bound = float(np.max(np.abs(y)))
    return 2.0 * bound if bound > 0 else 1.0
