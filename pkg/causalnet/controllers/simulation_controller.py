"""
Processos geradores de dados dos dois cenários de simulação, oráculo do
efeito verdadeiro e executor de Monte Carlo.

Dez covariáveis independentes X_j ~ N(m_j, s_j²) com médias crescentes;
os desfechos e o tratamento dependem de diferenças entre vizinhas
(cenário 1) ou de padrões de subida e descida em janelas de quatro
(cenário 2). Os erros e₀, e₁ são N(0, 1) independentes.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel as PydanticModel, ConfigDict, Field, field_validator
from scipy.special import expit

from causalnet.controllers import BaseController
from causalnet.controllers.estimation_controller import Method, EstimationController, parse_method
from causalnet.controllers.lasso_controller import LassoSettings
from causalnet.controllers.training_controller import NuisanceKind, TrainConfig
from causalnet.models.dataset import Dataset, Estimand, NuisanceFit
from causalnet.models.reports import EstimatorSummary, MonteCarloReport
from causalnet.utils.errors import CausalNetError, DomainError, MonteCarloError
from causalnet.utils.event_bus import REPLICATION_COMPLETED, REPLICATION_FAILED, EventBus
from causalnet.utils.numeric import Rng

COVARIATE_MOMENTS: Tuple[Tuple[float, float], ...] = (
    (100.0, 20.0), (102.0, 15.0), (105.0, 13.0), (107.0, 11.0), (109.0, 8.0),
    (110.0, 20.0), (112.0, 15.0), (115.0, 13.0), (117.0, 11.0), (119.0, 8.0),
)
N_COVARIATES = len(COVARIATE_MOMENTS)

# E[D] do cenário 1, somando os momentos de cada par: 629 + 1748 + 465 + 3573 + 189
SETTING1_MEAN_D = 6604.0

# Ordem canônica; o estimador k da replicação r usa o subfluxo (r, 1 + k)
CANONICAL_ESTIMATORS: Tuple[Method, ...] = (
    Method.DRCNN, Method.DRMLP, Method.DRSS, Method.DRDS, Method.ORDS, Method.NAIVE, Method.DRORACLE,
)
DEFAULT_ESTIMATORS = [m.label for m in CANONICAL_ESTIMATORS[:-1]]

ORACLE_CHUNK = 100_000


def gen_covariates(rng: Rng, n: int) -> np.ndarray:
    """
    Sorteia a matriz n × 10 de covariáveis independentes.

    Raises:
        DomainError: n < 1.
    """
    if n < 1:
        raise DomainError(f"n deve ser >= 1: {n}")
    means = np.array([m for m, _ in COVARIATE_MOMENTS])
    sds = np.array([s for _, s in COVARIATE_MOMENTS])
    return rng.normal(means, sds, size=(n, N_COVARIATES))


def setting1_signal(X: np.ndarray) -> np.ndarray:
    """D(X) = (X₂−X₁)² + (X₄−X₃)³ + (X₆−X₅)² + (X₈−X₇)³ + (X₁₀−X₉)²."""
    X = np.atleast_2d(X)
    return ((X[:, 1] - X[:, 0]) ** 2 + (X[:, 3] - X[:, 2]) ** 3 + (X[:, 5] - X[:, 4]) ** 2
            + (X[:, 7] - X[:, 6]) ** 3 + (X[:, 9] - X[:, 8]) ** 2)


def l1(x, y, z, w):
    """10 se as três razões consecutivas passam de 1.15; senão 0."""
    rising = (np.divide(y, x) > 1.15) & (np.divide(z, y) > 1.15) & (np.divide(w, z) > 1.15)
    return np.where(rising, 10.0, 0.0)


def l2(x, y, z, w):
    """5 se as três razões consecutivas ficam abaixo de 1.05; senão 0."""
    flat = (np.divide(y, x) < 1.05) & (np.divide(z, y) < 1.05) & (np.divide(w, z) < 1.05)
    return np.where(flat, 5.0, 0.0)


def l3(x, y, z, w):
    """3 se (y − 1.1x)(z − 1.1y)(w − 1.1z) < 0; senão 0."""
    x, y, z, w = (np.asarray(v, dtype=float) for v in (x, y, z, w))
    product = (y - 1.1 * x) * (z - 1.1 * y) * (w - 1.1 * z)
    return np.where(product < 0, 3.0, 0.0)


def setting2_signal(X: np.ndarray) -> np.ndarray:
    """G(X) = l₁(X₁..X₄) + l₂(X₄..X₇) + l₃(X₆..X₉), com valores em {0,3,5,8,10,13,15,18}."""
    X = np.atleast_2d(X)
    c = [X[:, j] for j in range(N_COVARIATES)]
    return l1(c[0], c[1], c[2], c[3]) + l2(c[3], c[4], c[5], c[6]) + l3(c[5], c[6], c[7], c[8])


def _nuisances(setting: int, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(μ₀, μ₁, p) verdadeiros do cenário."""
    if setting == 1:
        D = setting1_signal(X)
        return 1.0 + 0.001 * D, 2.0 - 0.001 * D, expit(-5e-6 * D)
    if setting == 2:
        G = setting2_signal(X)
        return 1.0 + G, 2.0 - G, expit(0.1 * G - 0.05 * X[:, 4])
    raise DomainError(f"Cenário desconhecido: {setting}")


@dataclass
class SimulatedSample:
    """
    Uma amostra simulada com desfechos potenciais e funções verdadeiras.

    ``Y = T·Y1 + (1 − T)·Y0`` elemento a elemento.
    """
    X: np.ndarray
    T: np.ndarray
    Y: np.ndarray
    Y0: np.ndarray
    Y1: np.ndarray
    p_true: np.ndarray
    mu0_true: np.ndarray
    mu1_true: np.ndarray

    @property
    def n(self) -> int:
        return len(self.Y)

    def to_dataset(self) -> Dataset:
        return Dataset(y=self.Y, t=self.T, x=self.X)

    def oracle_fit(self, data: Optional[Dataset] = None) -> NuisanceFit:
        """Funções incômodas verdadeiras no formato de ``NuisanceFit``."""
        data = data or self.to_dataset()
        return NuisanceFit.from_vectors(data, mu0=self.mu0_true, p=self.p_true, mu1=self.mu1_true,
                                        notes=["funções incômodas verdadeiras"])


def simulate(setting: int, rng: Rng, n: int) -> SimulatedSample:
    """
    Gera uma amostra do cenário pedido.

    Subfluxos: 0 covariáveis, 1 e₀, 2 e₁, 3 tratamento.
    """
    X = gen_covariates(rng.substream(0), n)
    mu0, mu1, p = _nuisances(setting, X)
    Y0 = mu0 + rng.substream(1).normal(0.0, 1.0, size=n)
    Y1 = mu1 + rng.substream(2).normal(0.0, 1.0, size=n)
    T = rng.substream(3).bernoulli(p)
    Y = np.where(T == 1, Y1, Y0)
    return SimulatedSample(X=X, T=T, Y=Y, Y0=Y0, Y1=Y1, p_true=p, mu0_true=mu0, mu1_true=mu1)


def dgp_setting1(rng: Rng, n: int) -> SimulatedSample:
    """Cenário 1: funções polinomiais das diferenças entre vizinhas."""
    return simulate(1, rng, n)


def dgp_setting2(rng: Rng, n: int) -> SimulatedSample:
    """Cenário 2: funções degrau de padrões de subida, estabilidade e oscilação."""
    return simulate(2, rng, n)


def analytic_ace_setting1() -> float:
    """ACE do cenário 1 em forma fechada: 1 − 0.002·E[D]."""
    return 1.0 - 0.002 * SETTING1_MEAN_D


def oracle_estimate(setting: int, estimand: Estimand, mc_size: int, seed: int,
                    chunk: int = ORACLE_CHUNK) -> Tuple[float, float]:
    """
    Integração de Monte Carlo do efeito verdadeiro, com seu erro padrão.

    Usa μ₁ − μ₀ sem os erros (que têm média zero). O ACET pondera cada
    sorteio por p(X)/E[p] (forma de amostragem por importância).

    Returns:
        Tuple[float, float]: (estimativa, erro padrão).
    """
    estimand = Estimand.parse(estimand)
    if mc_size < 1:
        raise DomainError(f"mc_size deve ser >= 1: {mc_size}")
    root = Rng(seed)
    sums = {"w": [], "wd": [], "wd2": [], "w2": [], "w2d": [], "w2d2": []}
    done, index = 0, 0
    while done < mc_size:
        size = min(chunk, mc_size - done)
        X = gen_covariates(root.substream(index), size)
        mu0, mu1, p = _nuisances(setting, X)
        diff = mu1 - mu0
        w = p if estimand == Estimand.ACET else np.ones(size)
        sums["w"].append(float(np.sum(w)))
        sums["wd"].append(float(np.sum(w * diff)))
        sums["wd2"].append(float(np.sum(w * diff ** 2)))
        sums["w2"].append(float(np.sum(w ** 2)))
        sums["w2d"].append(float(np.sum(w ** 2 * diff)))
        sums["w2d2"].append(float(np.sum(w ** 2 * diff ** 2)))
        done += size
        index += 1
    total = {k: math.fsum(v) for k, v in sums.items()}
    estimate = total["wd"] / total["w"]
    # variância do estimador de razão pelo método delta: Σw²(d − θ)² / (Σw)²
    spread = total["w2d2"] - 2 * estimate * total["w2d"] + estimate ** 2 * total["w2"]
    return estimate, math.sqrt(max(spread, 0.0)) / total["w"]


def true_effect_oracle(setting: int, estimand: Estimand, mc_size: int = 10 ** 6, seed: int = 0) -> float:
    """Efeito verdadeiro (ACE ou ACET) do cenário por Monte Carlo de força bruta."""
    return oracle_estimate(setting, estimand, mc_size, seed)[0]


class McConfig(PydanticModel):
    """
    Configuração de um estudo de Monte Carlo.

    Attributes:
        setting: Cenário (1 ou 2).
        n: Tamanho de cada amostra.
        replications: Número de replicações R.
        estimators: Rótulos ou nomes dos estimadores.
        estimand: ACE ou ACET.
        alpha: Nível dos intervalos.
        base_seed: Semente base; replicação r usa o subfluxo r.
        threads: Replicações em paralelo.
        failure_threshold: Fração máxima de replicações com falha por estimador.
        true_effect: Efeito verdadeiro fixo; None usa o oráculo.
        oracle_mc_size, oracle_seed: Parâmetros do oráculo.
        train, lasso, architectures: Sobrescritas das funções incômodas.
    """
    model_config = ConfigDict(extra='forbid', frozen=True)

    setting: int = Field(ge=1, le=2)
    n: int = Field(ge=50)
    replications: int = Field(ge=1)
    estimators: List[str] = Field(default_factory=lambda: list(DEFAULT_ESTIMATORS))
    estimand: Estimand = Estimand.ACET
    alpha: float = Field(default=0.05, gt=0, lt=1)
    base_seed: int = Field(default=0, ge=0)
    threads: int = Field(default=1, ge=1)
    failure_threshold: float = Field(default=0.05, ge=0, le=1)
    true_effect: Optional[float] = None
    oracle_mc_size: int = Field(default=10 ** 6, ge=1)
    oracle_seed: int = Field(default=0, ge=0)
    train: TrainConfig = Field(default_factory=TrainConfig)
    lasso: LassoSettings = Field(default_factory=LassoSettings)
    architectures: Dict[str, Dict[str, Any]] = Field(default_factory=dict)

    @field_validator('estimand', mode='before')
    @classmethod
    def _parse_estimand(cls, value):
        return Estimand.parse(value) if isinstance(value, str) else value

    @field_validator('estimators')
    @classmethod
    def _check_estimators(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("lista de estimadores vazia")
        labels = []
        for name in value:
            try:
                method = Method(str(name).lower())
            except ValueError:
                raise ValueError(f"estimador desconhecido: {name}") from None
            if method.label in labels:
                raise ValueError(f"estimador repetido: {name}")
            labels.append(method.label)
        return labels

    @property
    def methods(self) -> List[Method]:
        return [parse_method(name) for name in self.estimators]


@dataclass
class ReplicationResult:
    """Estimativas de uma replicação; estimadores com falha guardam a mensagem."""
    replication: int
    estimates: Dict[str, Tuple[float, float, bool]]
    failures: Dict[str, str]


class MonteCarloRunner(BaseController):
    """Executa as replicações e agrega viés, cobertura, desvios e EQM."""

    def __init__(self, event_bus: Optional[EventBus] = None):
        super().__init__(event_bus)

    def resolve_true_effect(self, cfg: McConfig) -> float:
        if cfg.true_effect is not None:
            return float(cfg.true_effect)
        if cfg.setting == 1 and cfg.estimand == Estimand.ACE:
            return analytic_ace_setting1()
        self.logger.info(f"Calculando efeito verdadeiro por Monte Carlo ({cfg.oracle_mc_size} sorteios)")
        return true_effect_oracle(cfg.setting, cfg.estimand, cfg.oracle_mc_size, cfg.oracle_seed)

    def check_architectures(self, cfg: McConfig) -> None:
        """
        Valida as arquiteturas uma vez, antes das replicações.

        Raises:
            ConfigurationError, ValidationError: Sobrescritas inválidas.
            StructuralError: CNN incompatível com as covariáveis do cenário.
        """
        controller = EstimationController(cfg.train, cfg.lasso, cfg.architectures)
        if Method.DRCNN not in cfg.methods:
            return
        data = simulate(cfg.setting, Rng(cfg.base_seed).substream(1).substream(0), cfg.n).to_dataset()
        for kind in NuisanceKind:
            spec = controller.architecture(data, Method.DRCNN, kind)
            self.logger.debug(f"CNN de {kind.value}: {spec.variant.value}, E={spec.E}, L={spec.L}")

    def run_replication(self, cfg: McConfig, replication: int, true_effect: float) -> ReplicationResult:
        """
        Roda uma replicação isolada.

        A amostra usa o subfluxo (r, 0); o estimador de índice canônico k
        usa (r, 1 + k). O resultado não depende das outras replicações.
        """
        rep_rng = Rng(cfg.base_seed).substream(replication)
        sample = simulate(cfg.setting, rep_rng.substream(0), cfg.n)
        data = sample.to_dataset()
        controller = EstimationController(cfg.train, cfg.lasso, cfg.architectures, self.event_bus)
        estimates: Dict[str, Tuple[float, float, bool]] = {}
        failures: Dict[str, str] = {}
        for method in cfg.methods:
            rng = rep_rng.substream(1 + CANONICAL_ESTIMATORS.index(method))
            try:
                oracle = sample.oracle_fit(data) if method == Method.DRORACLE else None
                report = controller.estimate(data, method, cfg.estimand, cfg.alpha, rng=rng, oracle=oracle)
                estimates[method.label] = (report.tau_hat, report.se, report.covers(true_effect))
            except (CausalNetError, ValueError, np.linalg.LinAlgError) as e:
                failures[method.label] = f"{type(e).__name__}: {e}"
                self.logger.warning(f"Replicação {replication}, {method.label} falhou: {e}")
                self.publish_event(REPLICATION_FAILED, {"replication": replication,
                                                        "estimator": method.label, "error": str(e)})
        self.publish_event(REPLICATION_COMPLETED, {"replication": replication, "of": cfg.replications,
                                                   "estimates": {k: v[0] for k, v in estimates.items()}})
        return ReplicationResult(replication, estimates, failures)

    def aggregate(self, cfg: McConfig, results: List[ReplicationResult], true_effect: float) -> MonteCarloReport:
        """Agrega na ordem das replicações; falhas acima do limite geram erro."""
        rows = []
        for method in cfg.methods:
            label = method.label
            ok = [r.estimates[label] for r in results if label in r.estimates]
            failed = sum(1 for r in results if label in r.failures)
            if failed > cfg.failure_threshold * len(results):
                raise MonteCarloError(
                    f"{label}: {failed} de {len(results)} replicações falharam "
                    f"(limite {cfg.failure_threshold:.0%})"
                )
            rows.append(EstimatorSummary.from_estimates(
                label, [e[0] for e in ok], [e[1] for e in ok], [e[2] for e in ok], true_effect, failed,
            ))
        return MonteCarloReport(
            setting=cfg.setting, estimand=cfg.estimand.value, n=cfg.n, replications=cfg.replications,
            alpha=cfg.alpha, true_effect=true_effect, seed=cfg.base_seed, estimators=rows,
            config=cfg.model_dump(mode='json', exclude={'threads'}),
        )

    def run(self, cfg: McConfig) -> MonteCarloReport:
        """
        Executa o estudo completo.

        Raises:
            MonteCarloError: Algum estimador falhou em mais que ``failure_threshold`` das replicações.
        """
        self.check_architectures(cfg)
        true_effect = self.resolve_true_effect(cfg)
        self.log_action("Monte Carlo", {"setting": cfg.setting, "n": cfg.n, "R": cfg.replications,
                                        "estimators": cfg.estimators, "true_effect": true_effect})
        indices = range(1, cfg.replications + 1)
        if cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                results = list(pool.map(lambda r: self.run_replication(cfg, r, true_effect), indices))
        else:
            results = [self.run_replication(cfg, r, true_effect) for r in indices]
        try:
            return self.aggregate(cfg, results, true_effect)
        except MonteCarloError as e:
            self.logger.error(str(e))
            raise


def monte_carlo_run(cfg: McConfig, event_bus: Optional[EventBus] = None) -> MonteCarloReport:
    """Atalho funcional para ``MonteCarloRunner(event_bus).run(cfg)``."""
    return MonteCarloRunner(event_bus).run(cfg)
