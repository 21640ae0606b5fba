# causalnet/utils/save_manager.py
import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from causalnet import __version__
from causalnet.controllers.training_controller import InputScaler, LossKind, NuisanceKind, NuisanceModel
from causalnet.models.network import CnnSpec, MlpSpec, build_network
from causalnet.models.reports import EstimateReport, MonteCarloReport
from causalnet.utils.errors import ConfigurationError, DataError, ReportWriteError
from causalnet.utils.logger import get_logger

Report = Union[EstimateReport, MonteCarloReport]
PathLike = Union[str, Path]

FORMAT_VERSION = '1'
MC_CSV_COLUMNS = ['estimator', 'bias', 'coverage', 'mc_sd', 'est_sd', 'mse']
ESTIMATE_CSV_COLUMNS = ['estimand', 'method', 'tau_hat', 'se', 'ci_low', 'ci_high', 'alpha',
                        'n', 'n1', 'n0', 'variance']


class SaveManager:
    """
    Grava e lê relatórios (JSON ou CSV) e checkpoints de modelos.

    Toda escrita vai para um arquivo temporário no diretório de destino e
    só então é renomeada; uma falha não deixa arquivo parcial. Relatórios
    JSON não têm data/hora, de modo que execuções idênticas geram bytes
    idênticos.
    """

    def __init__(self):
        self.logger = get_logger(self.__class__.__name__)

    @staticmethod
    def _compute_hash(data: dict) -> str:
        """Gera um hash SHA256 do conteúdo serializado."""
        json_bytes = json.dumps(data, sort_keys=True, ensure_ascii=False, allow_nan=False).encode('utf-8')
        return hashlib.sha256(json_bytes).hexdigest()

    def _atomic_write(self, path: PathLike, text: str) -> Path:
        path = Path(path)
        tmp_name = None
        try:
            directory = path.parent if str(path.parent) else Path('.')
            with tempfile.NamedTemporaryFile('w', encoding='utf-8', dir=directory, prefix=f".{path.name}.",
                                             suffix='.tmp', delete=False, newline='') as f:
                tmp_name = f.name
                f.write(text)
            os.replace(tmp_name, path)
        except OSError as e:
            if tmp_name and os.path.exists(tmp_name):
                os.remove(tmp_name)
            self.logger.error(f"Erro ao gravar {path}: {e}")
            raise ReportWriteError(f"Não foi possível gravar {path}: {e}", path=str(path)) from e
        return path

    @staticmethod
    def report_format(path: PathLike, fmt: Optional[str] = None) -> str:
        """Formato explícito ou inferido da extensão (padrão JSON)."""
        fmt = (fmt or Path(path).suffix.lstrip('.') or 'json').lower()
        if fmt not in ('json', 'csv'):
            raise ConfigurationError(f"Formato de relatório desconhecido: {fmt}")
        return fmt

    def report_payload(self, report: Report) -> Dict[str, Any]:
        """Objeto JSON do relatório, com versão da ferramenta e hash de integridade."""
        kind = 'monte_carlo' if isinstance(report, MonteCarloReport) else 'estimate'
        payload = {'report_type': kind, 'format_version': FORMAT_VERSION, 'tool_version': __version__}
        payload.update(report.to_dict())
        payload['integrity_hash'] = self._compute_hash(payload)
        return payload

    def report_csv(self, report: Report) -> str:
        """Uma linha por estimador (Monte Carlo) ou uma linha com a estimativa."""
        if isinstance(report, MonteCarloReport):
            rows = [{col: getattr(row, col) for col in MC_CSV_COLUMNS} for row in report.estimators]
            frame = pd.DataFrame(rows, columns=MC_CSV_COLUMNS)
        else:
            frame = pd.DataFrame([{col: getattr(report, col) for col in ESTIMATE_CSV_COLUMNS}],
                                 columns=ESTIMATE_CSV_COLUMNS)
        return frame.to_csv(index=False, lineterminator='\n')

    def save_report(self, report: Report, path: PathLike, fmt: Optional[str] = None) -> Path:
        """
        Grava o relatório.

        Args:
            report: EstimateReport ou MonteCarloReport.
            path: Destino.
            fmt: "json" ou "csv" (padrão: pela extensão).

        Returns:
            Path: Caminho gravado.

        Raises:
            ReportWriteError: Falha de IO (a mensagem cita o caminho).
        """
        fmt = self.report_format(path, fmt)
        if fmt == 'json':
            text = json.dumps(self.report_payload(report), indent=2, ensure_ascii=False, allow_nan=False) + '\n'
        else:
            text = self.report_csv(report)
        written = self._atomic_write(path, text)
        self.logger.info(f"Relatório gravado em: {written}")
        return written

    def load_report(self, path: PathLike) -> Report:
        """
        Lê um relatório JSON e confere o hash de integridade.

        Raises:
            DataError: Arquivo ausente, inválido ou com hash divergente.
        """
        try:
            with open(path, 'r', encoding='utf-8') as f:
                payload = json.load(f)
        except FileNotFoundError:
            raise DataError(f"Relatório não encontrado: {path}") from None
        except json.JSONDecodeError as e:
            raise DataError(f"Relatório inválido {path}: {e}") from e
        expected = payload.pop('integrity_hash', None)
        if expected != self._compute_hash(payload):
            self.logger.error(f"Falha na verificação de integridade do relatório: {path}")
            raise DataError(f"Hash de integridade divergente em {path}")
        report_cls = {'monte_carlo': MonteCarloReport, 'estimate': EstimateReport}.get(payload.get('report_type'))
        if report_cls is None:
            raise DataError(f"Tipo de relatório desconhecido em {path}: {payload.get('report_type')}")
        try:
            return report_cls.from_dict(payload)
        except (KeyError, TypeError) as e:
            raise DataError(f"Relatório incompleto {path}: {e}") from e

    def save_model(self, model: NuisanceModel, path: PathLike) -> Path:
        """
        Grava um preditor treinado; cada número vira uma string hex-float.

        Returns:
            Path: Caminho gravado.
        """
        spec = model.network.spec
        payload = {
            'format_version': FORMAT_VERSION,
            'architecture': 'mlp' if isinstance(spec, MlpSpec) else 'cnn',
            'spec': spec.model_dump(mode='json'),
            'kind': model.kind.value,
            'loss': model.loss.value,
            'm_prime': float(model.m_prime).hex(),
            'epsilon': float(model.epsilon).hex(),
            'target_shift': float(model.target_shift).hex(),
            'target_scale': float(model.target_scale).hex(),
            'scaler': {'low': _hex_array(model.scaler.low), 'high': _hex_array(model.scaler.high)},
            'params': {name: {'shape': list(value.shape), 'values': _hex_array(value)}
                       for name, value in model.network.params.items()},
            'loss_history': [float(v).hex() for v in model.loss_history],
        }
        payload['integrity_hash'] = self._compute_hash(payload)
        written = self._atomic_write(path, json.dumps(payload, indent=1) + '\n')
        self.logger.info(f"Modelo gravado em: {written}")
        return written

    def load_model(self, path: PathLike) -> NuisanceModel:
        """
        Lê um checkpoint gravado por ``save_model``; os parâmetros voltam bit a bit.

        Raises:
            DataError: Arquivo ausente ou com hash divergente.
        """
        try:
            with open(path, 'r', encoding='utf-8') as f:
                payload = json.load(f)
        except FileNotFoundError:
            raise DataError(f"Checkpoint não encontrado: {path}") from None
        expected = payload.pop('integrity_hash', None)
        if expected != self._compute_hash(payload):
            raise DataError(f"Hash de integridade divergente em {path}")
        spec_cls = MlpSpec if payload['architecture'] == 'mlp' else CnnSpec
        network = build_network(spec_cls(**payload['spec']))
        network.params = {name: _from_hex(entry['values']).reshape(entry['shape'])
                          for name, entry in payload['params'].items()}
        scaler = InputScaler(low=_from_hex(payload['scaler']['low']), high=_from_hex(payload['scaler']['high']))
        return NuisanceModel(
            kind=NuisanceKind(payload['kind']), network=network, scaler=scaler,
            m_prime=float.fromhex(payload['m_prime']), epsilon=float.fromhex(payload['epsilon']),
            target_shift=float.fromhex(payload['target_shift']),
            target_scale=float.fromhex(payload['target_scale']),
            loss=LossKind(payload['loss']),
            loss_history=[float.fromhex(v) for v in payload['loss_history']],
        )


def _hex_array(values: np.ndarray) -> list:
    return [float(v).hex() for v in np.asarray(values, dtype=float).reshape(-1)]


def _from_hex(values: list) -> np.ndarray:
    return np.array([float.fromhex(v) for v in values], dtype=float)
