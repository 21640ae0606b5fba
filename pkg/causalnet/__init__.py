"""
causalnet: estimação semiparamétrica de efeitos causais (ACE e ACET) com
funções incômodas ajustadas por redes convolucionais, MLP ou pós-lasso.
"""

__version__ = '0.1.0'
