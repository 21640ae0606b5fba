"""
Lasso por descida coordenada (famílias gaussiana e logística) e expansão
polinomial das covariáveis até grau três.

Objetivo minimizado, com intercepto não penalizado:

* gaussiana: ``(1/2n)·Σ(y − b₀ − xβ)² + λ‖β‖₁``
* logística: ``(1/n)·Σ[log(1 + e^η) − yη] + λ‖β‖₁`` com ``η = b₀ + xβ``
"""
import enum
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from causalnet.utils.errors import ConvergenceError, DomainError, StructuralError
from causalnet.utils.logger import get_logger
from causalnet.utils.numeric import Rng, check_finite

logger = get_logger("lasso")

MAX_DEGREE = 3
_CONSTANT_TOL = 1e-12


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LOGISTIC = "logistic"


class LambdaRule(str, enum.Enum):
    PLUG_IN = "plug-in"
    CROSS_VALIDATION = "cv"


def _standardize_stats(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    return mean, sd


@dataclass
class MonomialBasis:
    """
    Todos os monômios de grau total 1..3 das d covariáveis base.

    As covariáveis base são padronizadas antes da expansão e cada monômio é
    padronizado depois (média 0, desvio 1). Colunas constantes são
    descartadas e registradas em ``notes``.

    Attributes:
        d: Número de covariáveis base.
        terms: Índices das variáveis de cada monômio, ex.: (0, 0, 2) = x₁²x₃.
        base_mean, base_sd: Padronização das covariáveis base.
        col_mean, col_sd: Padronização dos monômios mantidos.
        dropped: Monômios descartados por serem constantes.
    """
    d: int
    terms: List[Tuple[int, ...]]
    base_mean: np.ndarray
    base_sd: np.ndarray
    col_mean: np.ndarray = None
    col_sd: np.ndarray = None
    dropped: List[Tuple[int, ...]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @staticmethod
    def all_terms(d: int, max_degree: int = MAX_DEGREE) -> List[Tuple[int, ...]]:
        """Monômios em ordem de grau e depois lexicográfica; C(d+3,3) − 1 termos."""
        if d < 1:
            raise StructuralError(f"Expansão exige d >= 1 (d={d})")
        return [combo for degree in range(1, max_degree + 1)
                for combo in combinations_with_replacement(range(d), degree)]

    @staticmethod
    def n_terms_for(d: int, max_degree: int = MAX_DEGREE) -> int:
        return math.comb(d + max_degree, max_degree) - 1

    @classmethod
    def fit(cls, X: np.ndarray) -> "MonomialBasis":
        """Aprende a expansão (e suas padronizações) a partir de X."""
        X = check_finite(X, 'X')
        if X.ndim != 2:
            raise StructuralError("X deve ser uma matriz n × d")
        base_mean, base_sd = _standardize_stats(X)
        base_sd = np.where(base_sd > _CONSTANT_TOL, base_sd, 1.0)
        basis = cls(d=X.shape[1], terms=cls.all_terms(X.shape[1]),
                    base_mean=base_mean, base_sd=base_sd)
        raw = basis._raw(X)
        col_mean, col_sd = _standardize_stats(raw)
        keep = col_sd > _CONSTANT_TOL * np.maximum(1.0, np.abs(col_mean))
        if not np.all(keep):
            basis.dropped = [term for term, k in zip(basis.terms, keep) if not k]
            message = f"{len(basis.dropped)} monômio(s) constante(s) descartado(s): {basis.dropped}"
            logger.warning(message)
            basis.notes.append(message)
            basis.terms = [term for term, k in zip(basis.terms, keep) if k]
        basis.col_mean = col_mean[keep]
        basis.col_sd = col_sd[keep]
        return basis

    def _raw(self, X: np.ndarray) -> np.ndarray:
        Z = (X - self.base_mean) / self.base_sd
        out = np.ones((X.shape[0], len(self.terms)))
        for k, term in enumerate(self.terms):
            for var in term:
                out[:, k] *= Z[:, var]
        return out

    def transform(self, X: np.ndarray) -> np.ndarray:
        """Aplica a expansão aprendida a novas linhas."""
        X = check_finite(X, 'X')
        if X.ndim != 2 or X.shape[1] != self.d:
            raise StructuralError(f"X precisa de {self.d} colunas")
        return (self._raw(X) - self.col_mean) / self.col_sd

    @property
    def n_columns(self) -> int:
        return len(self.terms)

    def names(self, columns: Optional[Sequence[str]] = None) -> List[str]:
        """Nomes legíveis dos monômios, ex.: ``x1^2*x3``."""
        columns = list(columns) if columns is not None else [f"x{j + 1}" for j in range(self.d)]
        names = []
        for term in self.terms:
            parts = []
            for var in sorted(set(term)):
                power = term.count(var)
                parts.append(columns[var] if power == 1 else f"{columns[var]}^{power}")
            names.append("*".join(parts))
        return names


def expand_monomials(X: np.ndarray) -> np.ndarray:
    """
    Expande X em todos os monômios de grau 1..3, padronizados.

    Returns:
        np.ndarray: Matriz n × p, com p = C(d+3,3) − 1 menos as colunas constantes.
    """
    return MonomialBasis.fit(X).transform(X)


def soft_threshold(z: float, gamma: float) -> float:
    """S(z, γ) = sign(z)·max(|z| − γ, 0)."""
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


@dataclass
class LassoFit:
    """
    Resultado de um ajuste lasso.

    Attributes:
        family: Família do modelo.
        lam: Penalidade λ.
        coef: Coeficientes (zeros fora do conjunto selecionado).
        intercept: Intercepto não penalizado.
        sweeps: Varreduras completas executadas.
        objective_history: Objetivo ao fim de cada varredura (o primeiro é o inicial).
    """
    family: Family
    lam: float
    coef: np.ndarray
    intercept: float
    sweeps: int = 0
    objective_history: List[float] = field(default_factory=list)

    @property
    def selected(self) -> List[int]:
        """Índices dos coeficientes não nulos."""
        return [int(j) for j in np.flatnonzero(self.coef)]

    def linear_predictor(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + X @ self.coef

    def predict(self, X: np.ndarray) -> np.ndarray:
        eta = self.linear_predictor(X)
        return expit(eta) if self.family == Family.LOGISTIC else eta


def lasso_objective(X: np.ndarray, y: np.ndarray, family: Family, lam: float,
                    intercept: float, coef: np.ndarray) -> float:
    """Valor do objetivo penalizado."""
    eta = intercept + X @ coef
    if Family(family) == Family.GAUSSIAN:
        smooth = 0.5 * float(np.mean((y - eta) ** 2))
    else:
        smooth = float(np.mean(np.logaddexp(0.0, eta) - y * eta))
    return smooth + lam * float(np.sum(np.abs(coef)))


def smooth_gradient(X: np.ndarray, y: np.ndarray, fit: LassoFit) -> np.ndarray:
    """Gradiente da parte suave do objetivo em relação a β."""
    residual = fit.predict(X) - y
    return X.T @ residual / len(y)


def kkt_violation(X: np.ndarray, y: np.ndarray, fit: LassoFit) -> float:
    """
    Maior violação das condições de otimalidade.

    Coeficientes nulos exigem |g_j| <= λ; não nulos exigem g_j = −λ·sign(β_j).
    O intercepto exige média do resíduo nula.
    """
    grad = smooth_gradient(X, y, fit)
    zero = fit.coef == 0
    violation = np.where(zero, np.maximum(np.abs(grad) - fit.lam, 0.0),
                         np.abs(grad + fit.lam * np.sign(fit.coef)))
    intercept_grad = abs(float(np.mean(fit.predict(X) - y)))
    return max(float(violation.max(initial=0.0)), intercept_grad)


def lambda_max(X: np.ndarray, y: np.ndarray) -> float:
    """Menor λ que zera todos os coeficientes (nas duas famílias)."""
    return float(np.max(np.abs(X.T @ (y - y.mean()))) / len(y)) if X.shape[1] else 0.0


def _weighted_cd_pass(X, z, w, lam, intercept, coef, col_wsq, n, max_cycles, coef_tol):
    """Descida coordenada sobre (1/2n)Σw(z − b₀ − xβ)² + λ‖β‖₁."""
    residual = z - intercept - X @ coef
    w_sum = float(np.sum(w))
    for _cycle in range(max_cycles):
        biggest = 0.0
        delta = float(np.dot(w, residual)) / w_sum
        intercept += delta
        residual -= delta
        biggest = max(biggest, abs(delta))
        for j in range(X.shape[1]):
            if col_wsq[j] <= 0:
                continue
            old = coef[j]
            rho = float(np.dot(w * X[:, j], residual)) / n + col_wsq[j] * old
            new = soft_threshold(rho, lam) / col_wsq[j]
            if new != old:
                residual -= X[:, j] * (new - old)
                coef[j] = new
                biggest = max(biggest, abs(new - old))
        if biggest < coef_tol:
            break
    return intercept, coef


def lasso_fit(X: np.ndarray, y: np.ndarray, family: Family = Family.GAUSSIAN, lam: float = 0.0,
              max_sweeps: int = 1000, tol: float = 1e-9, coef_tol: float = 1e-10,
              warm_start: Optional[LassoFit] = None) -> LassoFit:
    """
    Ajusta o lasso por descida coordenada cíclica.

    A família logística usa, a cada varredura, a aproximação quadrática com
    pesos p(1−p) recalculados; se o passo não reduzir o objetivo, ele é
    encurtado pela metade até reduzir, o que mantém o objetivo monótono.

    Args:
        X: Matriz padronizada n × p.
        y: Resposta (binária na família logística).
        family: "gaussian" ou "logistic".
        lam: Penalidade λ >= 0.
        max_sweeps: Limite de varreduras.
        tol: Variação mínima do objetivo para continuar.
        coef_tol: Variação máxima de coeficiente aceita na convergência.
        warm_start: Ajuste anterior usado como ponto inicial.

    Returns:
        LassoFit: Coeficientes na convergência.

    Raises:
        ConvergenceError: Sem convergência após ``max_sweeps`` varreduras.
    """
    family = Family(family)
    X = check_finite(X, 'X')
    y = check_finite(y, 'y').reshape(-1)
    if lam < 0:
        raise DomainError(f"λ deve ser não negativo: {lam}")
    n, p = X.shape
    if len(y) != n:
        raise StructuralError("X e y com números de linhas diferentes")
    if family == Family.LOGISTIC and not np.all(np.isin(y, (0.0, 1.0))):
        raise DomainError("Família logística exige resposta binária")

    if warm_start is not None:
        coef, intercept = warm_start.coef.copy(), float(warm_start.intercept)
    else:
        coef = np.zeros(p)
        if family == Family.GAUSSIAN:
            intercept = float(y.mean())
        else:
            rate = min(max(float(y.mean()), 1e-6), 1 - 1e-6)
            intercept = math.log(rate / (1 - rate))

    history = [lasso_objective(X, y, family, lam, intercept, coef)]
    ones = np.ones(n)
    gaussian_col_sq = np.sum(X ** 2, axis=0) / n
    for sweep in range(1, max_sweeps + 1):
        old_coef, old_intercept = coef.copy(), intercept
        if family == Family.GAUSSIAN:
            intercept, coef = _weighted_cd_pass(X, y, ones, lam, intercept, coef,
                                                gaussian_col_sq, n, 1, coef_tol)
            objective = lasso_objective(X, y, family, lam, intercept, coef)
        else:
            eta = intercept + X @ coef
            prob = expit(eta)
            w = np.maximum(prob * (1 - prob), 1e-6)
            z = eta + (y - prob) / w
            col_wsq = (w @ X ** 2) / n
            new_intercept, new_coef = _weighted_cd_pass(X, z, w, lam, intercept, coef.copy(),
                                                        col_wsq, n, 25, coef_tol)
            direction_coef = new_coef - old_coef
            direction_b0 = new_intercept - old_intercept
            step = 1.0
            objective = lasso_objective(X, y, family, lam, new_intercept, new_coef)
            while objective > history[-1] and step > 1e-10:
                step *= 0.5
                new_coef = old_coef + step * direction_coef
                new_intercept = old_intercept + step * direction_b0
                objective = lasso_objective(X, y, family, lam, new_intercept, new_coef)
            if objective > history[-1]:
                new_coef, new_intercept, objective = old_coef, old_intercept, history[-1]
            intercept, coef = new_intercept, new_coef
        history.append(objective)
        change = history[-2] - history[-1]
        max_step = max(float(np.max(np.abs(coef - old_coef), initial=0.0)), abs(intercept - old_intercept))
        if abs(change) < tol and max_step < coef_tol:
            return LassoFit(family, float(lam), coef, float(intercept), sweep, history)

    raise ConvergenceError(
        f"Lasso {family.value} sem convergência após {max_sweeps} varreduras (λ={lam:.4g})",
        diagnostics={"sweeps": max_sweeps, "last_change": history[-2] - history[-1],
                     "objective": history[-1], "lambda": float(lam)},
    )


def plug_in_lambda(y: np.ndarray, p: int, n: Optional[int] = None,
                   c: float = 1.1, delta: float = 0.05) -> float:
    """
    λ = c·sd(y)·√(2·ln(2p/δ)/n).

    Args:
        y: Resposta usada no ajuste.
        p: Número de colunas candidatas.
        n: Tamanho da amostra (padrão: ``len(y)``).
        c: Constante de folga.
        delta: Nível de confiança da regra.
    """
    y = np.asarray(y, dtype=float)
    n = len(y) if n is None else int(n)
    if n < 1 or p < 1:
        raise DomainError(f"plug_in_lambda exige n >= 1 e p >= 1 (n={n}, p={p})")
    if not (0.0 < delta < 1.0) or c <= 0:
        raise DomainError("Constantes da regra de λ fora do domínio")
    return c * float(np.std(y)) * math.sqrt(2.0 * math.log(2.0 * p / delta) / n)


def _validation_loss(family: Family, y: np.ndarray, prediction: np.ndarray) -> float:
    if family == Family.GAUSSIAN:
        return float(np.mean((y - prediction) ** 2))
    prob = np.clip(prediction, 1e-12, 1 - 1e-12)
    return float(-np.mean(y * np.log(prob) + (1 - y) * np.log(1 - prob)))


def cross_validated_lambda(X: np.ndarray, y: np.ndarray, family: Family, rng: Rng,
                           folds: int = 5, n_lambdas: int = 20, ratio: float = 1e-3,
                           max_sweeps: int = 1000) -> float:
    """
    Escolhe λ por validação cruzada em uma grade log-espaçada.

    A grade vai de ``lambda_max`` até ``ratio·lambda_max``; cada dobra usa
    partida a quente ao longo da grade.

    Returns:
        float: λ com a menor perda média de validação.
    """
    family = Family(family)
    n = len(y)
    if folds < 2 or folds > n:
        raise DomainError(f"Número de dobras inválido: {folds} (n={n})")
    top = lambda_max(X, y)
    if top <= 0:
        return 0.0
    grid = top * np.logspace(0.0, math.log10(ratio), n_lambdas)
    assignment = np.empty(n, dtype=np.int64)
    assignment[rng.permutation(n)] = np.arange(n) % folds
    losses = np.zeros(n_lambdas)
    for fold in range(folds):
        train, valid = assignment != fold, assignment == fold
        if family == Family.LOGISTIC and len(np.unique(y[train])) < 2:
            continue
        fit = None
        for k, lam in enumerate(grid):
            fit = lasso_fit(X[train], y[train], family, lam, max_sweeps=max_sweeps, warm_start=fit)
            losses[k] += _validation_loss(family, y[valid], fit.predict(X[valid])) * valid.sum()
    best = int(np.argmin(losses))
    logger.debug(f"Validação cruzada: λ={grid[best]:.4g} ({best + 1}º de {n_lambdas})")
    return float(grid[best])
