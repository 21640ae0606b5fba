"""
Registros de resultado: estimativa pontual com IC e resumo de Monte Carlo.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from causalnet.models.base_model import BaseModel


@dataclass
class EstimateReport(BaseModel):
    """
    Estimativa de um efeito causal com variância e intervalo de confiança.

    ``se = sqrt(variance / n)`` e ``ci = tau_hat ± Φ⁻¹(1 − α/2)·se``.
    """
    estimand: str
    tau_hat: float
    variance: float
    se: float
    alpha: float
    ci_low: float
    ci_high: float
    n: int
    n1: int
    n0: int
    method: str = "aipw"
    notes: List[str] = field(default_factory=list)

    required_fields = ('estimand', 'tau_hat', 'variance')

    def covers(self, value: float) -> bool:
        """True se ``value`` está dentro do intervalo."""
        return self.ci_low <= value <= self.ci_high


@dataclass
class EstimatorSummary(BaseModel):
    """
    Agregados de um estimador sobre as replicações bem-sucedidas.

    ``mc_sd`` é NaN com menos de duas replicações.
    """
    estimator: str
    bias: float
    coverage: float
    mc_sd: float
    est_sd: float
    mse: float
    replications: int
    failures: int

    @classmethod
    def from_estimates(cls, estimator: str, estimates: List[float], std_errors: List[float],
                       covered: List[bool], true_effect: float, failures: int) -> "EstimatorSummary":
        """
        Agrega as estimativas na ordem das replicações.

        Args:
            estimator: Nome do estimador (ex.: "DRcnn").
            estimates: τ̂ de cada replicação bem-sucedida.
            std_errors: √(V̂/n) de cada replicação.
            covered: Se o IC da replicação contém o efeito verdadeiro.
            true_effect: Efeito verdadeiro usado como referência.
            failures: Replicações descartadas.
        """
        r = len(estimates)
        if r == 0:
            nan = float('nan')
            return cls(estimator, nan, nan, nan, nan, nan, 0, failures)
        mean = math.fsum(estimates) / r
        bias = mean - true_effect
        if r > 1:
            mc_sd = math.sqrt(math.fsum((e - mean) ** 2 for e in estimates) / (r - 1))
        else:
            mc_sd = float('nan')
        # mse é definido pelos agregados: bias² + mc_sd²
        mse = bias ** 2 + (mc_sd ** 2 if r > 1 else 0.0)
        return cls(
            estimator=estimator,
            bias=bias,
            coverage=sum(1 for c in covered if c) / r,
            mc_sd=mc_sd,
            est_sd=math.fsum(std_errors) / r,
            mse=mse,
            replications=r,
            failures=failures,
        )


@dataclass
class MonteCarloReport(BaseModel):
    """Resultado de um estudo de Monte Carlo, uma linha por estimador."""
    required_fields = ('setting', 'estimators')

    setting: int
    estimand: str
    n: int
    replications: int
    alpha: float
    true_effect: float
    seed: int
    estimators: List[EstimatorSummary] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)

    def summary(self, estimator: str) -> Optional[EstimatorSummary]:
        """Linha do estimador pedido, ou None."""
        for row in self.estimators:
            if row.estimator == estimator:
                return row
        return None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MonteCarloReport":
        report = super().from_dict(data)
        report.estimators = [
            row if isinstance(row, EstimatorSummary) else EstimatorSummary.from_dict(row)
            for row in report.estimators
        ]
        return report
