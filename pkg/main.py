"""
Linha de comando: ``simulate`` roda um estudo de Monte Carlo e ``estimate``
analisa uma amostra em CSV.

Códigos de saída: 0 sucesso, 2 uso/configuração, 3 dados/IO,
4 falha numérica.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from colorama import Fore, Style
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from causalnet import __version__
from causalnet.controllers.estimation_controller import EstimationController, Method
from causalnet.controllers.lasso_controller import LassoSettings
from causalnet.controllers.simulation_controller import DEFAULT_ESTIMATORS, McConfig, monte_carlo_run
from causalnet.controllers.training_controller import TrainConfig
from causalnet.models.dataset import Estimand
from causalnet.models.lasso import LambdaRule
from causalnet.utils import load_mapping
from causalnet.utils.data_loader import DataLoader, parse_series_spec
from causalnet.utils.errors import EXIT_OK, EXIT_USAGE, CausalNetError, exit_code_for
from causalnet.utils.event_bus import REPLICATION_COMPLETED, REPLICATION_FAILED, EventBus
from causalnet.utils.logger import setup_logger
from causalnet.utils.numeric import Rng
from causalnet.utils.save_manager import SaveManager
from causalnet.utils.settings_validator import (DEFAULT_SETTINGS_PATH, deep_update, load_and_validate_settings,
                                                validate_architectures)
from config import get_config

logger = logging.getLogger("causalnet.cli")

CLI_METHODS = [m.value for m in Method if m != Method.DRORACLE]


class RunConfig(BaseModel):
    """Configuração validada de uma execução; chaves desconhecidas são rejeitadas."""
    model_config = ConfigDict(extra='forbid')

    subcommand: Literal['simulate', 'estimate']
    alpha: float = Field(default_factory=lambda: get_config("ALPHA"), gt=0, lt=1)
    seed: int = Field(default=0, ge=0)
    out: Optional[str] = None
    format: Optional[Literal['json', 'csv']] = None
    estimand: Estimand = Estimand.ACET
    trim_epsilon: float = Field(default_factory=lambda: get_config("TRIM_EPSILON"), gt=0, lt=0.5)
    m_prime: Optional[float] = Field(default=None, gt=0)
    lambda_rule: Optional[LambdaRule] = None
    architectures: Dict[str, Dict[str, Any]] = Field(default_factory=dict)
    train: Dict[str, Any] = Field(default_factory=dict)

    # simulate
    setting: Optional[int] = Field(default=None, ge=1, le=2)
    n: Optional[int] = Field(default=None, ge=50)
    reps: Optional[int] = Field(default=None, ge=1)
    estimators: List[str] = Field(default_factory=lambda: list(DEFAULT_ESTIMATORS))
    threads: int = Field(default_factory=lambda: get_config("THREADS"), ge=1)
    true_effect: Optional[float] = None
    oracle_mc_size: int = Field(default_factory=lambda: get_config("ORACLE_MC_SIZE"), ge=1)

    # estimate
    data: Optional[str] = None
    outcome: Optional[str] = None
    treat: Optional[str] = None
    method: Optional[Literal['drcnn', 'drmlp', 'drss', 'drds', 'ords', 'naive']] = None
    series: List[str] = Field(default_factory=list)
    static: List[str] = Field(default_factory=list)

    @field_validator('estimand', mode='before')
    @classmethod
    def _parse_estimand(cls, value):
        return Estimand.parse(value) if isinstance(value, str) else value

    @model_validator(mode='after')
    def _check_required(self):
        required = {
            'simulate': ('setting', 'n', 'reps'),
            'estimate': ('data', 'outcome', 'treat', 'method'),
        }[self.subcommand]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.subcommand} exige: {', '.join(missing)}")
        return self


def build_parser() -> argparse.ArgumentParser:
    """Monta o parser com os subcomandos ``simulate`` e ``estimate``."""
    parser = argparse.ArgumentParser(
        prog="causalnet",
        description="Efeitos causais (ACE/ACET) por AIPW com funções incômodas por CNN, MLP ou pós-lasso.",
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--log-level', choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    parser.add_argument('--log-file', help="arquivo de log com rotação")
    parser.add_argument('--config', help="arquivo JSON ou YAML com chaves da execução")
    sub = parser.add_subparsers(dest='subcommand', required=True)

    def common(p):
        p.add_argument('--estimand', type=str.upper, choices=['ACE', 'ACET'])
        p.add_argument('--seed', type=int)
        p.add_argument('--alpha', type=float)
        p.add_argument('--out', help="arquivo de saída; sem ele o relatório vai para stdout")
        p.add_argument('--format', choices=['json', 'csv'])
        p.add_argument('--trim-epsilon', type=float, dest='trim_epsilon')
        p.add_argument('--m-prime', type=float, dest='m_prime')
        p.add_argument('--lambda-rule', choices=[r.value for r in LambdaRule], dest='lambda_rule')
        p.add_argument('--epochs', type=int, help="máximo de épocas de treinamento das redes")

    sim = sub.add_parser('simulate', help="estudo de Monte Carlo")
    sim.add_argument('--setting', type=int, choices=[1, 2])
    sim.add_argument('--n', type=int)
    sim.add_argument('--reps', type=int)
    sim.add_argument('--estimators', type=lambda s: [e.strip() for e in s.split(',') if e.strip()],
                     help="lista separada por vírgulas (ex.: DRcnn,ORds,naive)")
    sim.add_argument('--threads', type=int)
    sim.add_argument('--true-effect', type=float, dest='true_effect')
    sim.add_argument('--oracle-mc-size', type=int, dest='oracle_mc_size')
    common(sim)

    est = sub.add_parser('estimate', help="estimativa em uma amostra CSV")
    est.add_argument('--data')
    est.add_argument('--outcome')
    est.add_argument('--treat')
    est.add_argument('--method', type=str.lower, choices=CLI_METHODS)
    est.add_argument('--series', action='append', help="nome=col1,col2,... (repetível)")
    est.add_argument('--static', action='append', help="colunas estáticas separadas por vírgula")
    common(est)
    return parser


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Arquivo ``--config`` primeiro, flags explícitas por cima."""
    values = load_mapping(args.config, missing_ok=False) if args.config else {}
    values = dict(values)
    for key, value in vars(args).items():
        if value is not None and key in RunConfig.model_fields:
            values[key] = value
    if getattr(args, 'epochs', None) is not None:
        values['train'] = {**values.get('train', {}), 'epochs': args.epochs}
    values['subcommand'] = args.subcommand
    return RunConfig(**values)


def nuisance_settings(cfg: RunConfig):
    """Combina ``data/nuisance_settings.json`` com as sobrescritas da execução."""
    settings = load_and_validate_settings(DEFAULT_SETTINGS_PATH)
    train = TrainConfig(**{**settings.training.model_dump(), **cfg.train,
                           'epsilon': cfg.trim_epsilon, 'M_prime': cfg.m_prime, 'seed': cfg.seed})
    lasso_values = {**settings.lasso.model_dump(), 'epsilon': cfg.trim_epsilon}
    if cfg.lambda_rule is not None:
        lasso_values['lambda_rule'] = cfg.lambda_rule
    architectures = validate_architectures(deep_update(settings.architecture_overrides(), cfg.architectures))
    return train, LassoSettings(**lasso_values), architectures


def _progress_logger(event: Dict[str, Any]) -> None:
    if 'estimator' in event:
        logger.warning(f"Replicação {event['replication']}: {event['estimator']} falhou ({event['error']})")
    else:
        logger.info(f"Replicação {event['replication']}/{event['of']} concluída")


def run_simulate(cfg: RunConfig):
    train, lasso, architectures = nuisance_settings(cfg)
    mc = McConfig(
        setting=cfg.setting, n=cfg.n, replications=cfg.reps, estimators=cfg.estimators,
        estimand=cfg.estimand, alpha=cfg.alpha, base_seed=cfg.seed, threads=cfg.threads,
        failure_threshold=get_config("FAILURE_THRESHOLD"), true_effect=cfg.true_effect,
        oracle_mc_size=cfg.oracle_mc_size, train=train, lasso=lasso, architectures=architectures,
    )
    bus = EventBus()
    bus.subscribe(REPLICATION_COMPLETED, _progress_logger)
    bus.subscribe(REPLICATION_FAILED, _progress_logger)
    return monte_carlo_run(mc, bus)


def run_estimate(cfg: RunConfig):
    train, lasso, architectures = nuisance_settings(cfg)
    layout = parse_series_spec(cfg.series, cfg.static)
    data = DataLoader().load_csv(cfg.data, cfg.outcome, cfg.treat, layout)
    controller = EstimationController(train, lasso, architectures)
    return controller.estimate(data, cfg.method, cfg.estimand, cfg.alpha, rng=Rng(cfg.seed))


def emit_report(report, cfg: RunConfig) -> None:
    manager = SaveManager()
    if cfg.out:
        suffix = Path(cfg.out).suffix.lstrip('.').lower()
        fmt = cfg.format or (suffix if suffix in ('json', 'csv') else get_config("REPORT_FORMAT"))
        manager.save_report(report, cfg.out, fmt)
    elif (cfg.format or get_config("REPORT_FORMAT")) == 'csv':
        sys.stdout.write(manager.report_csv(report))
    else:
        sys.stdout.write(json.dumps(manager.report_payload(report), indent=2, ensure_ascii=False) + '\n')


def print_error(message: str) -> None:
    sys.stderr.write(f"{Fore.RED}erro:{Style.RESET_ALL} {message}\n")


def run_cli(argv: Optional[List[str]] = None) -> int:
    """
    Executa a linha de comando.

    Args:
        argv: Argumentos (padrão: ``sys.argv[1:]``).

    Returns:
        int: Código de saída.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK

    setup_logger(log_level=args.log_level or get_config("LOG_LEVEL"), log_file=args.log_file)
    try:
        cfg = build_run_config(args)
        report = run_simulate(cfg) if cfg.subcommand == 'simulate' else run_estimate(cfg)
        emit_report(report, cfg)
        return EXIT_OK
    except ValidationError as e:
        logger.error(f"Configuração inválida: {e}")
        print_error(f"configuração inválida: {e}")
        return EXIT_USAGE
    except CausalNetError as e:
        code = exit_code_for(e)
        logger.error(f"Execução interrompida ({type(e).__name__}): {e}")
        print_error(str(e))
        return code


def main():
    """Ponto de entrada do console."""
    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
