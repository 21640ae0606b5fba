# causalnet/utils/data_loader.py
"""
Leitura e escrita de amostras em CSV (cabeçalho obrigatório, UTF-8,
separador decimal '.').
"""
import os
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from causalnet.models.dataset import Dataset, SeriesLayout
from causalnet.utils.errors import DataError, ReportWriteError
from causalnet.utils.logger import get_logger

PathLike = Union[str, Path]


class DataLoader:
    """
    Carrega amostras de arquivos CSV e as converte em ``Dataset``.

    Erros de leitura apontam a linha (1 = primeira linha de dados) e a
    coluna problemática.
    """

    def __init__(self, data_dir: PathLike = "."):
        """
        Inicializa o carregador.

        Args:
            data_dir: Diretório base para caminhos relativos.
        """
        self.data_dir = Path(data_dir)
        self.logger = get_logger(self.__class__.__name__)

    def _resolve(self, path: PathLike) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.data_dir / path

    def read_frame(self, path: PathLike) -> pd.DataFrame:
        """
        Lê o CSV como texto, sem conversões automáticas.

        Raises:
            DataError: Arquivo inexistente, vazio ou mal formado.
        """
        file_path = self._resolve(path)
        try:
            return pd.read_csv(file_path, dtype=str, keep_default_na=False, encoding='utf-8')
        except FileNotFoundError:
            self.logger.error(f"Arquivo não encontrado: {file_path}")
            raise DataError(f"Arquivo não encontrado: {file_path}") from None
        except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
            self.logger.error(f"CSV inválido: {file_path}: {e}")
            raise DataError(f"CSV inválido {file_path}: {e}") from e

    @staticmethod
    def _numeric_column(frame: pd.DataFrame, column: str) -> np.ndarray:
        cells = frame[column].str.strip()
        values = np.empty(len(cells), dtype=float)
        for i, cell in enumerate(cells):
            try:
                values[i] = float(cell)
            except ValueError:
                values[i] = np.nan
            if not np.isfinite(values[i]):
                raise DataError(
                    f"Valor não numérico na linha {i + 1}, coluna '{column}': {frame[column].iloc[i]!r}",
                    row=i + 1, column=column,
                )
        return values

    def load_csv(self, path: PathLike, outcome_col: str, treat_col: str,
                 layout: Optional[SeriesLayout] = None) -> Dataset:
        """
        Carrega uma amostra.

        Args:
            path: Caminho do CSV.
            outcome_col: Coluna do desfecho.
            treat_col: Coluna do tratamento (0/1).
            layout: Layout de séries; sem ele, todas as demais colunas
                viram covariáveis na ordem do arquivo.

        Returns:
            Dataset: Covariáveis em ordem série-maior, estáticas por último.

        Raises:
            DataError: Coluna ausente, célula não numérica ou tratamento fora de {0, 1}.
        """
        frame = self.read_frame(path)
        if layout is not None:
            columns = layout.columns
        else:
            columns = [c for c in frame.columns if c not in (outcome_col, treat_col)]
        for col in [outcome_col, treat_col] + list(columns):
            if col not in frame.columns:
                raise DataError(f"Coluna ausente no arquivo: '{col}'", column=col)
        if not columns:
            raise DataError("Nenhuma covariável no arquivo")

        y = self._numeric_column(frame, outcome_col)
        t = self._numeric_column(frame, treat_col)
        invalid = np.flatnonzero(~np.isin(t, (0.0, 1.0)))
        if invalid.size:
            row = int(invalid[0]) + 1
            raise DataError(
                f"Tratamento deve ser 0 ou 1; linha {row} tem {frame[treat_col].iloc[invalid[0]]!r}",
                row=row, column=treat_col,
            )
        x = np.column_stack([self._numeric_column(frame, col) for col in columns])
        self.logger.info(f"Amostra carregada de {path}: n={len(y)}, d={len(columns)}")
        return Dataset(y=y, t=t.astype(np.int64), x=x, columns=list(columns), layout=layout)

    def write_csv(self, data: Dataset, path: PathLike, outcome_col: str = "y", treat_col: str = "t") -> Path:
        """
        Exporta a amostra; floats saem com todos os dígitos (reimportação exata).

        Raises:
            ReportWriteError: Falha de IO.
        """
        file_path = self._resolve(path)
        frame = pd.DataFrame({outcome_col: data.y, treat_col: data.t})
        for j, col in enumerate(data.columns):
            frame[col] = data.x[:, j]
        try:
            if file_path.parent and not file_path.parent.exists():
                os.makedirs(file_path.parent, exist_ok=True)
            frame.to_csv(file_path, index=False, encoding='utf-8')
        except OSError as e:
            self.logger.error(f"Erro ao gravar {file_path}: {e}")
            raise ReportWriteError(f"Não foi possível gravar {file_path}: {e}", path=str(file_path)) from e
        return file_path


def load_csv(path: PathLike, layout: Optional[SeriesLayout], outcome_col: str, treat_col: str) -> Dataset:
    """Atalho funcional para ``DataLoader().load_csv``."""
    return DataLoader().load_csv(path, outcome_col, treat_col, layout)


def write_csv(data: Dataset, path: PathLike, outcome_col: str = "y", treat_col: str = "t") -> Path:
    """Atalho funcional para ``DataLoader().write_csv``."""
    return DataLoader().write_csv(data, path, outcome_col, treat_col)


def parse_series_spec(specs: List[str], static: Optional[List[str]] = None) -> Optional[SeriesLayout]:
    """
    Converte ``["a=a1,a2,a3", ...]`` e ``["s1,s2"]`` em ``SeriesLayout``.

    Raises:
        DataError: Especificação sem ``=`` ou sem colunas.
    """
    if not specs and not static:
        return None
    series = []
    for spec in specs or []:
        name, sep, cols = spec.partition('=')
        columns = [c.strip() for c in cols.split(',') if c.strip()]
        if not sep or not name.strip() or not columns:
            raise DataError(f"Série mal especificada: '{spec}' (use nome=col1,col2,...)")
        series.append((name.strip(), tuple(columns)))
    statics = [c.strip() for item in (static or []) for c in item.split(',') if c.strip()]
    return SeriesLayout(series=tuple(series), static=tuple(statics))
