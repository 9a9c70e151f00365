import logging
import os
from datetime import datetime
from logging.handlers import RotatingFileHandler
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd


class PipelineLogger:
    """
    Centralized configurable logging class.

    This class provides methods for configuring the root logger once per process
    and getting a logger with a given name. Defaults live on the class so a caller
    can override any of them through ``config_logger``.
    """

    log_level: int = logging.INFO
    console_log_level: int = logging.INFO
    file_log_level: int = logging.DEBUG
    log_file: str = f"hybridvol_{datetime.now().strftime('%Y-%m-%d_%H-%M-%S')}.log"
    log_format: str = (
        "%(asctime)s - %(name)s - (line: %(lineno)d) - %(levelname)s - %(message)s"
    )
    _configured: bool = False

    @staticmethod
    def config_logger(configs: Dict[str, Any], data_dir: Optional[str] = None) -> None:
        """
        Configures the root logger according to the given configurations.

        Args:
            configs (dict): A dictionary of configurations. Keys matching class
                attributes (``log_level``, ``console_log_level``, ``file_log_level``,
                ``log_file``, ``log_format``) override the defaults.
            data_dir (str, optional): A path to the directory where the log file will be created.
        """
        for key, value in configs.items():
            if key == "log_file":
                value = (
                    os.path.splitext(value)[0]
                    + f"_{datetime.now().strftime('%Y-%m-%d_%H-%M-%S')}"
                    + os.path.splitext(value)[1]
                )
            if hasattr(PipelineLogger, key):
                setattr(PipelineLogger, key, value)

        if data_dir is not None:
            os.makedirs(data_dir, exist_ok=True)
            PipelineLogger.log_file = os.path.join(
                data_dir, os.path.basename(PipelineLogger.log_file)
            )

        pd.set_option("display.max_columns", 50)
        pd.set_option("display.width", 200)
        np.set_printoptions(precision=6, suppress=True)

        logger = logging.getLogger()
        if PipelineLogger._configured:
            for handler in list(logger.handlers):
                if getattr(handler, "_hybridvol", False):
                    logger.removeHandler(handler)
                    handler.close()

        console_handler = logging.StreamHandler()
        console_handler.setLevel(PipelineLogger.console_log_level)

        file_handler = RotatingFileHandler(
            PipelineLogger.log_file, maxBytes=10000000, backupCount=5
        )
        file_handler.setLevel(PipelineLogger.file_log_level)

        # Create formatter and add it to the handlers
        formatter = logging.Formatter(PipelineLogger.log_format)
        for handler in (console_handler, file_handler):
            handler.setFormatter(formatter)
            handler._hybridvol = True
            logger.addHandler(handler)

        logger.setLevel(min(PipelineLogger.console_log_level, PipelineLogger.file_log_level))
        PipelineLogger._configured = True

    @staticmethod
    def get_logger(
        name: str,
        level: Optional[int] = None,
        handlers: Optional[List[logging.Handler]] = None,
    ) -> logging.Logger:
        """
        Gets a logger with the given name.

        Args:
            name (str): The name of the logger.
            level (int, optional): The log level of the logger.
            handlers (list, optional): A list of logging.Handler objects to add to the logger

        Returns:
            logger (logging.Logger): A logger with the given configurations
        """
        logger: logging.Logger = logging.getLogger(name)
        if level is not None:
            logger.setLevel(level)
        else:
            logger.setLevel(PipelineLogger.log_level)

        if handlers is not None:
            formatter = logging.Formatter(PipelineLogger.log_format)
            for handler in handlers:
                handler.setFormatter(formatter)
                logger.addHandler(handler)

        return logger

    @staticmethod
    def log_file_path() -> str:
        """Absolute location of the current log file."""
        return os.path.abspath(PipelineLogger.log_file)
