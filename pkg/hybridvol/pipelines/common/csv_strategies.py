import json
import os
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from ...distributions import DistributionKind
from ...hybrid import ForecastRecord, read_forecasts_csv
from ...market_data import ColumnSchema, PriceSeries, load_ohlc_csv
from ...utils import PipelineLogger
from ..base import ExtractStrategy, LoadStrategy


class LocalOhlcCsvExtractStrategy(ExtractStrategy):
    """
    A strategy for extracting OHLC records from a CSV file in local storage.
    """

    def __init__(self, file_path: str, schema: Optional[ColumnSchema] = None):
        self.logger = PipelineLogger.get_logger(__name__)
        if not os.path.exists(file_path):
            self.logger.error("File does not exist at the provided path: %s", file_path)
            raise FileNotFoundError(f"File does not exist at the provided path: {file_path}")
        self.file_path = file_path
        self.schema = schema

    def extract(self) -> PriceSeries:
        """
        Returns:
            PriceSeries: Records in ascending date order.

        Raises:
            DataError: If the file breaks the OHLC schema or invariants.
        """
        self.logger.info(f"Reading OHLC file from {self.file_path}")
        prices = load_ohlc_csv(self.file_path, self.schema)
        self.logger.info(f"Successfully read {len(prices)} records from {self.file_path}")
        return prices


class LocalForecastCsvExtractStrategy(ExtractStrategy):
    """
    A strategy for extracting forecast records from a forecasts CSV written by a previous run.
    """

    def __init__(self, file_path: str, kind: DistributionKind):
        self.logger = PipelineLogger.get_logger(__name__)
        if not os.path.exists(file_path):
            self.logger.error("File does not exist at the provided path: %s", file_path)
            raise FileNotFoundError(f"File does not exist at the provided path: {file_path}")
        self.file_path = file_path
        self.kind = kind

    def extract(self) -> List[ForecastRecord]:
        self.logger.info(f"Reading forecasts from {self.file_path}")
        records = read_forecasts_csv(self.file_path, self.kind)
        self.logger.info(f"Successfully read {len(records)} forecasts")
        return records


class LocalCsvLoadStrategy(LoadStrategy):
    """
    A strategy for writing a DataFrame derived from the data to a CSV file in a local directory.

    Attributes:
        directory (str): Output directory, created on demand.
        file_name (str): Name of the CSV file.
        select (Callable, optional): Picks the frame out of the data; the data itself when None.
    """

    def __init__(self, directory: str, file_name: str, select: Optional[Callable[[Any], pd.DataFrame]] = None):
        self.logger = PipelineLogger.get_logger(__name__)
        self.directory = directory
        self.file_name = file_name
        self.select = select

    @property
    def path(self) -> str:
        return os.path.join(self.directory, self.file_name)

    def load(self, data: Any) -> Any:
        frame = self.select(data) if self.select is not None else data
        os.makedirs(self.directory, exist_ok=True)
        frame.to_csv(self.path, index=False)
        self.logger.info(f"Wrote {len(frame)} rows to {self.path}")
        return data


def _numpy_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


class LocalJsonLoadStrategy(LoadStrategy):
    """
    A strategy for writing a JSON document derived from the data. Keys are sorted so identical
    content gives identical bytes.
    """

    def __init__(self, directory: str, file_name: str, select: Callable[[Any], Dict[str, Any]]):
        self.logger = PipelineLogger.get_logger(__name__)
        self.directory = directory
        self.file_name = file_name
        self.select = select

    @property
    def path(self) -> str:
        return os.path.join(self.directory, self.file_name)

    def load(self, data: Any) -> Any:
        os.makedirs(self.directory, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as handle:
            json.dump(self.select(data), handle, indent=2, sort_keys=True, default=_numpy_default)
            handle.write("\n")
        self.logger.info(f"Wrote {self.path}")
        return data
