"""
Funções incômodas por pós-lasso: seleção de monômios por lasso seguida de
reajuste sem penalidade (mínimos quadrados para o desfecho, máxima
verossimilhança logística para o tratamento).
"""
import enum
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel as PydanticModel, ConfigDict, Field
from scipy.special import expit

from causalnet.controllers import BaseController
from causalnet.models.dataset import Dataset, Estimand, NuisanceFit
from causalnet.models.lasso import (Family, LambdaRule, MonomialBasis, cross_validated_lambda,
                                    lasso_fit, plug_in_lambda)
from causalnet.utils.errors import ConvergenceError
from causalnet.utils.event_bus import EventBus
from causalnet.utils.numeric import Rng

RIDGE = 1e-8


class SelectionStrategy(str, enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"


class LassoSettings(PydanticModel):
    """
    Parâmetros do pós-lasso.

    Attributes:
        lambda_rule: "plug-in" ou "cv".
        c, delta: Constantes da regra plug-in.
        folds: Dobras da validação cruzada.
        max_sweeps: Limite de varreduras da descida coordenada.
        tol: Variação mínima do objetivo.
        epsilon: Aparo de p̂ em [ε, 1−ε].
    """
    model_config = ConfigDict(extra='forbid', frozen=True)

    lambda_rule: LambdaRule = LambdaRule.PLUG_IN
    c: float = Field(default=1.1, gt=0)
    delta: float = Field(default=0.05, gt=0, lt=1)
    folds: int = Field(default=5, ge=2)
    max_sweeps: int = Field(default=1000, ge=1)
    tol: float = Field(default=1e-9, gt=0)
    epsilon: float = Field(default=0.01, gt=0, lt=0.5)


def _design(X: np.ndarray, cols: Sequence[int]) -> np.ndarray:
    return np.column_stack([np.ones(X.shape[0]), X[:, list(cols)]])


def _solve(A: np.ndarray, b: np.ndarray, notes: List[str], label: str) -> np.ndarray:
    """Resolve A·x = b; matriz singular recebe ridge de 1e-8 na diagonal."""
    if np.linalg.matrix_rank(A) < A.shape[0]:
        notes.append(f"{label}: matriz singular, ridge {RIDGE:g} aplicado")
        A = A + RIDGE * np.eye(A.shape[0])
    return np.linalg.solve(A, b)


def ols_refit(X: np.ndarray, y: np.ndarray, cols: Sequence[int],
              notes: Optional[List[str]] = None) -> np.ndarray:
    """
    Mínimos quadrados sem penalidade nas colunas ``cols`` (com intercepto).

    Returns:
        np.ndarray: (intercepto, coeficientes...) na ordem de ``cols``.
    """
    notes = notes if notes is not None else []
    Z = _design(X, cols)
    return _solve(Z.T @ Z, Z.T @ y, notes, "reajuste MQO")


def logistic_refit(X: np.ndarray, y: np.ndarray, cols: Sequence[int],
                   notes: Optional[List[str]] = None, max_iter: int = 100,
                   tol: float = 1e-10) -> np.ndarray:
    """
    Máxima verossimilhança logística por Newton com passo reduzido à metade
    quando a log-verossimilhança não melhora.

    Raises:
        ConvergenceError: Sem convergência em ``max_iter`` iterações
            (tipicamente separação perfeita).
    """
    notes = notes if notes is not None else []
    Z = _design(X, cols)
    beta = np.zeros(Z.shape[1])
    rate = min(max(float(np.mean(y)), 1e-6), 1 - 1e-6)
    beta[0] = np.log(rate / (1 - rate))

    def neg_loglik(b):
        eta = Z @ b
        return float(np.sum(np.logaddexp(0.0, eta) - y * eta))

    current = neg_loglik(beta)
    warned = False
    for iteration in range(1, max_iter + 1):
        prob = expit(Z @ beta)
        grad = Z.T @ (y - prob)
        hess = (Z * (prob * (1 - prob))[:, None]).T @ Z
        step_notes: List[str] = []
        direction = _solve(hess, grad, step_notes, "reajuste logístico")
        if step_notes and not warned:
            notes.extend(step_notes)
            warned = True
        step = 1.0
        candidate = neg_loglik(beta + direction)
        while candidate > current and step > 1e-10:
            step *= 0.5
            candidate = neg_loglik(beta + step * direction)
        if candidate > current:
            break
        beta = beta + step * direction
        improvement = current - candidate
        current = candidate
        if improvement < tol * max(1.0, abs(current)) and np.max(np.abs(step * direction)) < 1e-8:
            return beta
    raise ConvergenceError(
        f"Reajuste logístico sem convergência após {max_iter} iterações",
        diagnostics={"iterations": max_iter, "neg_loglik": current, "columns": list(cols)},
    )


def refit_sets(selected: Dict[str, List[int]], strategy: SelectionStrategy) -> Dict[str, List[int]]:
    """
    Conjuntos usados em cada reajuste.

    Seleção simples mantém o conjunto de cada modelo; seleção dupla usa a
    união de todos os conjuntos selecionados em todos os reajustes.
    """
    if SelectionStrategy(strategy) == SelectionStrategy.SINGLE:
        return {name: sorted(cols) for name, cols in selected.items()}
    union = sorted(set().union(*selected.values())) if selected else []
    return {name: list(union) for name in selected}


class PostLassoSelector(BaseController):
    """
    Ajusta μ̂₀ (e μ̂₁ para o ACE) e p̂ por pós-lasso sobre a expansão
    polinomial de grau três das covariáveis.
    """

    def __init__(self, settings: Optional[LassoSettings] = None, event_bus: Optional[EventBus] = None):
        super().__init__(event_bus)
        self.settings = settings or LassoSettings()

    def _lambda(self, Z: np.ndarray, y: np.ndarray, family: Family, rng: Rng) -> float:
        s = self.settings
        if s.lambda_rule == LambdaRule.CROSS_VALIDATION:
            return cross_validated_lambda(Z, y, family, rng, folds=s.folds, max_sweeps=s.max_sweeps)
        return plug_in_lambda(y, Z.shape[1], c=s.c, delta=s.delta)

    def select(self, Z: np.ndarray, y: np.ndarray, family: Family, rng: Rng) -> List[int]:
        """Índices das colunas de Z escolhidas pelo lasso."""
        lam = self._lambda(Z, y, family, rng)
        fit = lasso_fit(Z, y, family, lam, max_sweeps=self.settings.max_sweeps, tol=self.settings.tol)
        return fit.selected

    def select_and_refit(self, data: Dataset, strategy: SelectionStrategy = SelectionStrategy.DOUBLE,
                         estimand: Estimand = Estimand.ACET, rng: Optional[Rng] = None) -> NuisanceFit:
        """
        Seleciona variáveis e reajusta as funções incômodas.

        Args:
            data: Amostra.
            strategy: "single" (cada modelo com seu conjunto) ou "double" (união).
            estimand: ACE também ajusta μ̂₁ nos tratados.
            rng: Gerador usado apenas pela validação cruzada.

        Returns:
            NuisanceFit: Valores ajustados em todas as observações, p̂ aparado.

        Raises:
            DataError: Algum braço vazio.
            ConvergenceError: Lasso ou reajuste logístico sem convergência.
        """
        strategy = SelectionStrategy(strategy)
        estimand = Estimand.parse(estimand)
        data.require_both_arms()
        rng = rng or Rng(0)
        basis = MonomialBasis.fit(data.x)
        Z = basis.transform(data.x)
        names = basis.names(data.columns)
        notes = list(basis.notes)

        arms = {"mu0": 0}
        if estimand == Estimand.ACE:
            arms["mu1"] = 1
        selected: Dict[str, List[int]] = {}
        for k, (name, arm) in enumerate(arms.items()):
            mask = data.t == arm
            selected[name] = self.select(Z[mask], data.y[mask], Family.GAUSSIAN, rng.substream(k))
        selected["p"] = self.select(Z, data.t.astype(float), Family.LOGISTIC, rng.substream(len(arms)))
        sets = refit_sets(selected, strategy)

        fitted: Dict[str, np.ndarray] = {}
        for name, arm in arms.items():
            mask = data.t == arm
            beta = ols_refit(Z[mask], data.y[mask], sets[name], notes)
            fitted[name] = _design(Z, sets[name]) @ beta
        beta_p = logistic_refit(Z, data.t.astype(float), sets["p"], notes)
        eps = self.settings.epsilon
        p_hat = np.clip(expit(_design(Z, sets["p"]) @ beta_p), eps, 1 - eps)

        for note in notes[len(basis.notes):]:
            self.logger.warning(note)
        summary = {name: [names[j] for j in cols] for name, cols in sets.items()}
        self.logger.debug(f"Pós-lasso ({strategy.value}): {summary}")
        return NuisanceFit.from_vectors(
            data, mu0=fitted["mu0"], p=p_hat, mu1=fitted.get("mu1"),
            models={"basis": basis, "selected": selected, "refit_sets": sets, "names": summary},
            notes=notes,
        )


def select_and_refit(data: Dataset, strategy: SelectionStrategy = SelectionStrategy.DOUBLE,
                     lambda_rule: LambdaRule = LambdaRule.PLUG_IN,
                     estimand: Estimand = Estimand.ACET, rng: Optional[Rng] = None) -> NuisanceFit:
    """Atalho funcional para ``PostLassoSelector``."""
    selector = PostLassoSelector(LassoSettings(lambda_rule=LambdaRule(lambda_rule)))
    return selector.select_and_refit(data, strategy, estimand, rng)
