from .base_model import BaseModel
from .dataset import Dataset, Estimand, NuisanceFit, SeriesLayout
from .reports import EstimateReport, EstimatorSummary, MonteCarloReport
