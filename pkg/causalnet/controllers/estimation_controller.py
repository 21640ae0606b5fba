"""
Estimadores AIPW do efeito causal médio (ACE) e do efeito médio nos
tratados (ACET), suas variâncias, intervalos de confiança e os
comparadores ingênuo e de regressão do desfecho.

Os estimadores recebem os valores ajustados (``NuisanceFit``) prontos;
``EstimationController`` é quem ajusta as funções incômodas de cada método.
"""
import enum
import math
from typing import Optional, Tuple

import numpy as np
from pydantic import ValidationError

from causalnet.controllers import BaseController
from causalnet.controllers.lasso_controller import LassoSettings, PostLassoSelector, SelectionStrategy
from causalnet.controllers.training_controller import NuisanceKind, NuisanceTrainer, TrainConfig
from causalnet.models.dataset import Dataset, Estimand, NuisanceFit
from causalnet.models.network import Architecture, CnnSpec, CnnVariant, MlpSpec, OutputKind, rate_schedule
from causalnet.models.reports import EstimateReport
from causalnet.utils.errors import ConfigurationError, DomainError, StructuralError
from causalnet.utils.event_bus import EventBus
from causalnet.utils.numeric import Rng, std_normal_quantile
from causalnet.utils.settings_validator import validate_architectures


def _check_probability(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0) or np.any(arr >= 1):
        raise DomainError(f"'{name}' deve estar estritamente entre 0 e 1")
    return arr


def _scalar_or_array(value: np.ndarray):
    return float(value) if np.ndim(value) == 0 else value


def psi_ace(y_i, t_i, mu_t, p_t, t: int):
    """
    ψ̂_t = 1{t_i=t}(y_i − μ̂_t)/P̂[T=t|x_i] + μ̂_t.

    Aceita escalares ou vetores.

    Args:
        y_i: Desfecho observado.
        t_i: Tratamento observado.
        mu_t: μ̂_t(x_i).
        p_t: P̂[T=t|X=x_i] (para t=0 passe 1 − p̂).
        t: Braço do potencial desfecho.

    Raises:
        DomainError: p_t fora de (0, 1).
    """
    p_t = _check_probability(p_t, 'p_t')
    indicator = (np.asarray(t_i) == t).astype(float)
    return _scalar_or_array(indicator * (np.asarray(y_i, dtype=float) - mu_t) / p_t + np.asarray(mu_t, dtype=float))


def psi_acet(y_i, t_i, mu_t, p_i, p_marginal: float, t: int, t_prime: int):
    """
    ψ̂_{t,t′} = (P̂[T=t′|x]/P̂[T=t′])·1{t_i=t}(y_i − μ̂_t)/P̂[T=t|x] + 1{t_i=t′}μ̂_t/P̂[T=t′].

    Args:
        y_i, t_i: Observação.
        mu_t: μ̂_t(x_i).
        p_i: P̂[T=t′|X=x_i]; o termo interno usa p_i se t = t′ e 1 − p_i caso contrário.
        p_marginal: P̂[T=t′].
        t, t_prime: Braços.

    Raises:
        DomainError: Probabilidades fora de (0, 1).
    """
    p_i = _check_probability(p_i, 'p_i')
    p_marginal = float(_check_probability(p_marginal, 'p_marginal'))
    inner = p_i if t == t_prime else 1.0 - p_i
    t_arr = np.asarray(t_i)
    residual = (t_arr == t).astype(float) * (np.asarray(y_i, dtype=float) - mu_t) / inner
    value = (p_i / p_marginal) * residual + (t_arr == t_prime).astype(float) * np.asarray(mu_t, dtype=float) / p_marginal
    return _scalar_or_array(value)


def confidence_interval(tau: float, variance: float, n: int, alpha: float) -> Tuple[float, float]:
    """
    τ ± Φ⁻¹(1 − α/2)·√(variance/n).

    Raises:
        DomainError: Variância negativa, n < 1 ou α fora de (0, 1).
    """
    if variance < 0 or not math.isfinite(variance):
        raise DomainError(f"Variância inválida: {variance}")
    if n < 1:
        raise DomainError(f"n deve ser >= 1: {n}")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"α fora de (0, 1): {alpha}")
    half = std_normal_quantile(1.0 - alpha / 2.0) * math.sqrt(variance / n)
    return tau - half, tau + half


def _report(estimand: Estimand, tau: float, variance: float, data: Dataset, alpha: float,
            method: str, notes=None) -> EstimateReport:
    low, high = confidence_interval(tau, variance, data.n, alpha)
    return EstimateReport(
        estimand=estimand.value, tau_hat=tau, variance=variance, se=math.sqrt(variance / data.n),
        alpha=alpha, ci_low=low, ci_high=high, n=data.n, n1=data.n1, n0=data.n0,
        method=method, notes=list(notes or []),
    )


def _check_fit(data: Dataset, fit: NuisanceFit) -> None:
    data.require_both_arms()
    vectors = [fit.mu0, fit.p] + ([fit.mu1] if fit.mu1 is not None else [])
    if any(len(v) != data.n for v in vectors):
        raise StructuralError("Vetores do ajuste incômodo não têm o tamanho da amostra")


def aipw_ace(data: Dataset, fit: NuisanceFit, alpha: float = 0.05) -> EstimateReport:
    """
    τ̂ = E_n[ψ̂₁ − ψ̂₀] com variância

    V̂ = E_n[1(t=1)(y−μ̂₁)²/p̂²] + E_n[(μ̂₁ − E_nψ̂₁)²]
      + E_n[1(t=0)(y−μ̂₀)²/(1−p̂)²] + E_n[(μ̂₀ − E_nψ̂₀)²].

    Raises:
        ConfigurationError: ``fit.mu1`` ausente.
        DataError: Algum braço vazio.
    """
    if fit.mu1 is None:
        raise ConfigurationError("ACE exige μ̂₁ no ajuste incômodo")
    _check_fit(data, fit)
    y, t, p = data.y, data.t, fit.p
    psi1 = psi_ace(y, t, fit.mu1, p, 1)
    psi0 = psi_ace(y, t, fit.mu0, 1.0 - p, 0)
    tau = float(np.mean(psi1 - psi0))
    treated, control = (t == 1).astype(float), (t == 0).astype(float)
    variance = float(
        np.mean(treated * (y - fit.mu1) ** 2 / p ** 2)
        + np.mean((fit.mu1 - np.mean(psi1)) ** 2)
        + np.mean(control * (y - fit.mu0) ** 2 / (1.0 - p) ** 2)
        + np.mean((fit.mu0 - np.mean(psi0)) ** 2)
    )
    return _report(Estimand.ACE, tau, variance, data, alpha, "aipw", fit.notes)


def aipw_acet(data: Dataset, fit: NuisanceFit, alpha: float = 0.05) -> EstimateReport:
    """
    τ̂_t = E_n[ψ̂_{1,1} − ψ̂_{0,1}] com variância

    V̂_t = (n/n₁)²·E_n[1(t=1)(y−μ̂₀−τ̂_t)²] + (n/n₁)²·E_n[(p̂/(1−p̂))²·1(t=0)(y−μ̂₀)²].

    ψ̂_{1,1} é avaliado na forma reduzida 1{t_i=1}·y_i/P̂[T=1], em que p̂ se cancela.

    Raises:
        DataError: Algum braço vazio.
    """
    _check_fit(data, fit)
    y, t, p = data.y, data.t, fit.p
    treated, control = (t == 1).astype(float), (t == 0).astype(float)
    psi11 = treated * y / fit.p_marginal
    psi01 = psi_acet(y, t, fit.mu0, p, fit.p_marginal, 0, 1)
    tau = float(np.mean(psi11 - psi01))
    factor = (data.n / data.n1) ** 2
    variance = float(
        factor * np.mean(treated * (y - fit.mu0 - tau) ** 2)
        + factor * np.mean((p / (1.0 - p)) ** 2 * control * (y - fit.mu0) ** 2)
    )
    return _report(Estimand.ACET, tau, variance, data, alpha, "aipw", fit.notes)


def naive_diff(data: Dataset) -> float:
    """média(y | t=1) − média(y | t=0)."""
    data.require_both_arms()
    return float(np.mean(data.y[data.t == 1]) - np.mean(data.y[data.t == 0]))


def naive_variance(data: Dataset) -> float:
    """n·(s₁²/n₁ + s₀²/n₀); braço com uma única observação contribui 0."""
    data.require_both_arms()
    total = 0.0
    for arm, size in ((1, data.n1), (0, data.n0)):
        if size > 1:
            total += float(np.var(data.y[data.t == arm], ddof=1)) / size
    return data.n * total


def naive_report(data: Dataset, estimand: Estimand = Estimand.ACET, alpha: float = 0.05) -> EstimateReport:
    """Diferença de médias, reportada para o estimando pedido."""
    return _report(Estimand.parse(estimand), naive_diff(data), naive_variance(data), data, alpha, "naive")


def or_estimator(data: Dataset, fit: NuisanceFit, estimand: Estimand) -> float:
    """
    Regressão do desfecho.

    ACE: E_n[μ̂₁ − μ̂₀]; ACET: (1/n₁)Σ_{t_i=1}(y_i − μ̂₀(x_i)).

    Raises:
        ConfigurationError: ACE sem μ̂₁.
    """
    estimand = Estimand.parse(estimand)
    _check_fit(data, fit)
    if estimand == Estimand.ACE:
        if fit.mu1 is None:
            raise ConfigurationError("ACE exige μ̂₁ no ajuste incômodo")
        return float(np.mean(fit.mu1 - fit.mu0))
    treated = data.t == 1
    return float(np.mean(data.y[treated] - fit.mu0[treated]))


def or_variance(data: Dataset, fit: NuisanceFit, estimand: Estimand, tau: float) -> float:
    """
    ACE: E_n[(μ̂₁ − μ̂₀ − τ̂)²]; ACET: (n/n₁)²·E_n[1(t=1)(y − μ̂₀ − τ̂)²].
    """
    estimand = Estimand.parse(estimand)
    if estimand == Estimand.ACE:
        return float(np.mean((fit.mu1 - fit.mu0 - tau) ** 2))
    treated = (data.t == 1).astype(float)
    return float((data.n / data.n1) ** 2 * np.mean(treated * (data.y - fit.mu0 - tau) ** 2))


def or_report(data: Dataset, fit: NuisanceFit, estimand: Estimand, alpha: float = 0.05) -> EstimateReport:
    estimand = Estimand.parse(estimand)
    tau = or_estimator(data, fit, estimand)
    return _report(estimand, tau, or_variance(data, fit, estimand, tau), data, alpha, "or", fit.notes)


def aipw(data: Dataset, fit: NuisanceFit, estimand: Estimand, alpha: float = 0.05) -> EstimateReport:
    """Despacha para ``aipw_ace`` ou ``aipw_acet``."""
    if Estimand.parse(estimand) == Estimand.ACE:
        return aipw_ace(data, fit, alpha)
    return aipw_acet(data, fit, alpha)


class Method(str, enum.Enum):
    DRCNN = "drcnn"
    DRMLP = "drmlp"
    DRSS = "drss"
    DRDS = "drds"
    ORDS = "ords"
    NAIVE = "naive"
    DRORACLE = "droracle"

    @property
    def label(self) -> str:
        """Nome usado nas tabelas de Monte Carlo (ex.: "DRcnn")."""
        return METHOD_LABELS[self]


METHOD_LABELS = {
    Method.DRCNN: "DRcnn", Method.DRMLP: "DRmlp", Method.DRSS: "DRss", Method.DRDS: "DRds",
    Method.ORDS: "ORds", Method.NAIVE: "naive", Method.DRORACLE: "DRoracle",
}


def parse_method(value) -> Method:
    """Aceita o valor ("drcnn") ou o rótulo ("DRcnn")."""
    if isinstance(value, Method):
        return value
    try:
        return Method(str(value).lower())
    except ValueError:
        raise DomainError(f"Método desconhecido: {value}") from None


class EstimationController(BaseController):
    """
    Ajusta as funções incômodas de um método e calcula a estimativa.

    Redes: CNN prática (canais [128, 16] no desfecho, [32, 8] na propensão)
    ou MLP ((128, 80) e (32, 8)). Pós-lasso: seleção simples ou dupla.
    """

    def __init__(self, train_config: Optional[TrainConfig] = None,
                 lasso_settings: Optional[LassoSettings] = None,
                 architectures: Optional[dict] = None,
                 event_bus: Optional[EventBus] = None):
        """
        Inicializa o controlador.

        Args:
            train_config: Hiperparâmetros de treinamento das redes.
            lasso_settings: Parâmetros do pós-lasso.
            architectures: Sobrescritas de arquitetura por chave
                ("outcome_cnn", "propensity_cnn", "outcome_mlp", "propensity_mlp").
            event_bus: Barramento de eventos (opcional).
        """
        super().__init__(event_bus)
        self.train_config = train_config or TrainConfig()
        self.trainer = NuisanceTrainer(self.train_config, self.event_bus)
        self.selector = PostLassoSelector(lasso_settings, self.event_bus)
        self.architectures = {
            "outcome_cnn": {"channels_per_layer": [128, 16], "S": 2},
            "propensity_cnn": {"channels_per_layer": [32, 8], "S": 2},
            "outcome_mlp": {"widths": (128, 80)},
            "propensity_mlp": {"widths": (32, 8)},
        }
        for key, value in (architectures or {}).items():
            if key not in self.architectures:
                raise ConfigurationError(f"Arquitetura desconhecida: {key}")
            self.architectures[key] = {**self.architectures[key], **dict(value)}
        self.architectures = validate_architectures(self.architectures)

    def architecture(self, data: Dataset, method: Method, kind: NuisanceKind) -> Architecture:
        """
        Arquitetura de rede para os dados e o tipo de função incômoda.

        Sem layout de séries, todas as colunas formam uma única série.

        Raises:
            StructuralError: Séries de comprimentos diferentes, ou variante
                teórica sobre várias séries ou com S > d.
        """
        role = "outcome" if kind == NuisanceKind.OUTCOME else "propensity"
        if method == Method.DRMLP:
            output = OutputKind.REGRESSION if role == "outcome" else OutputKind.PROPENSITY_LOGIT
            return MlpSpec(input_dim=data.d, output_kind=output, **self.architectures[f"{role}_mlp"])
        cnn = dict(self.architectures[f"{role}_cnn"])
        variant = CnnVariant(cnn.pop("variant", CnnVariant.PRACTICAL))
        c_E, c_L = cnn.pop("c_E", 1.0), cnn.pop("c_L", 1.0)
        if variant == CnnVariant.THEORETICAL:
            return self._theoretical_spec(data, cnn, c_E, c_L)
        layout = data.layout
        if layout is None:
            series_len, n_series, n_static = data.d, 1, 0
        else:
            if layout.n_series == 0:
                raise StructuralError("CNN exige ao menos uma série temporal")
            lengths = set(layout.series_lengths)
            if len(lengths) != 1:
                raise StructuralError(f"Séries com comprimentos diferentes: {layout.series_lengths}")
            series_len, n_series, n_static = lengths.pop(), layout.n_series, layout.n_static
        return CnnSpec(d=series_len, variant=variant, n_series=n_series, n_static=n_static, **cnn)

    @staticmethod
    def _theoretical_spec(data: Dataset, cnn: dict, c_E: float, c_L: float) -> CnnSpec:
        """
        CNN teórica sobre x inteiro, tratado como uma única série.

        E e L ausentes vêm de ``rate_schedule(n, d, c_E, c_L)``.
        """
        layout = data.layout
        if layout is not None and (layout.n_series != 1 or layout.n_static):
            raise StructuralError("variante teórica aceita uma única série, sem covariáveis estáticas")
        if cnn.get("E") is None or cnn.get("L") is None:
            E, L = rate_schedule(data.n, data.d, c_E, c_L)
            cnn.setdefault("E", E)
            cnn.setdefault("L", L)
        try:
            return CnnSpec(d=data.d, variant=CnnVariant.THEORETICAL, **cnn)
        except ValidationError as e:
            raise StructuralError(f"CNN teórica inválida para d={data.d}: {e}") from e

    def _network_fit(self, data: Dataset, method: Method, estimand: Estimand, rng: Rng) -> NuisanceFit:
        outcome_arch = self.architecture(data, method, NuisanceKind.OUTCOME)
        propensity_arch = self.architecture(data, method, NuisanceKind.PROPENSITY)
        models = {"mu0": self.trainer.fit(data, outcome_arch, rng.substream(0), NuisanceKind.OUTCOME, arm=0)}
        if estimand == Estimand.ACE:
            models["mu1"] = self.trainer.fit(data, outcome_arch, rng.substream(1), NuisanceKind.OUTCOME, arm=1)
        models["p"] = self.trainer.fit(data, propensity_arch, rng.substream(2), NuisanceKind.PROPENSITY)
        mu1 = models["mu1"].predict(data.x) if "mu1" in models else None
        return NuisanceFit.from_vectors(data, mu0=models["mu0"].predict(data.x),
                                        p=models["p"].predict(data.x), mu1=mu1, models=models)

    def fit_nuisances(self, data: Dataset, method, estimand=Estimand.ACET,
                      rng: Optional[Rng] = None, oracle: Optional[NuisanceFit] = None) -> Optional[NuisanceFit]:
        """
        Ajusta as funções incômodas exigidas pelo método.

        Returns:
            NuisanceFit, ou None para o estimador ingênuo.

        Raises:
            ConfigurationError: ``droracle`` sem vetores verdadeiros.
        """
        method, estimand = parse_method(method), Estimand.parse(estimand)
        rng = rng or Rng(self.train_config.seed)
        if method == Method.NAIVE:
            return None
        if method == Method.DRORACLE:
            if oracle is None:
                raise ConfigurationError("droracle exige as funções incômodas verdadeiras")
            return oracle
        if method in (Method.DRCNN, Method.DRMLP):
            return self._network_fit(data, method, estimand, rng)
        strategy = SelectionStrategy.SINGLE if method == Method.DRSS else SelectionStrategy.DOUBLE
        return self.selector.select_and_refit(data, strategy, estimand, rng)

    def estimate(self, data: Dataset, method, estimand=Estimand.ACET, alpha: float = 0.05,
                 rng: Optional[Rng] = None, oracle: Optional[NuisanceFit] = None) -> EstimateReport:
        """
        Estima o efeito pelo método pedido.

        Args:
            data: Amostra com os dois braços.
            method: drcnn, drmlp, drss, drds, ords, naive ou droracle.
            estimand: ACE ou ACET.
            alpha: Nível do intervalo.
            rng: Gerador para inicialização e embaralhamento.
            oracle: Funções incômodas verdadeiras (apenas droracle).

        Returns:
            EstimateReport: Com ``method`` igual ao nome do método.
        """
        method, estimand = parse_method(method), Estimand.parse(estimand)
        data.require_both_arms()
        fit = self.fit_nuisances(data, method, estimand, rng, oracle)
        if method == Method.NAIVE:
            report = naive_report(data, estimand, alpha)
        elif method == Method.ORDS:
            report = or_report(data, fit, estimand, alpha)
        else:
            report = aipw(data, fit, estimand, alpha)
        report.method = method.value
        self.logger.debug(f"{method.value} ({estimand.value}): τ̂={report.tau_hat:.6g}, se={report.se:.6g}")
        return report
