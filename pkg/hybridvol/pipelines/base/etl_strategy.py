import logging
from abc import ABC, abstractmethod
from typing import Any, List, Optional


class ExtractStrategy(ABC):
    """
    Abstract Class to define an interface for an extraction strategy.
    """

    @abstractmethod
    def extract(self) -> Any:
        """
        Perform extraction of data.

        Returns:
            Any: The extracted data, handed to the first transform strategy.
        """
        pass


class TransformStrategy(ABC):
    """
    Abstract Class to define an interface for a transformation strategy.
    """

    @abstractmethod
    def transform(self, data: Any) -> Any:
        """
        Perform some transformation on the given data.

        Args:
            data (Any): Output of the previous stage.

        Returns:
            Any: The transformed data.
        """
        pass


class LoadStrategy(ABC):
    """
    Abstract Class to define an interface for a load strategy.
    """

    @abstractmethod
    def load(self, data: Any) -> Any:
        """
        Persist the given data and pass it on.

        Args:
            data (Any): Output of the transform phase.

        Returns:
            Any: The data, unchanged, so load strategies can be chained.
        """
        pass


def _names(strategies: List[Any]) -> List[str]:
    return [type(strategy).__name__ for strategy in strategies]


class DependentETLPipeline:
    """
    A Transform-Load pipeline. It utilizes the strategy pattern for each phase, allowing
    different behaviors to be swapped in and out at runtime. This version doesn't perform
    its own extraction: the data comes from the caller.

    Attributes:
        transform_strategies (List[TransformStrategy]): The strategies to use for the transformation phase.
        load_strategies (List[LoadStrategy]): The strategies to use for the loading phase.
    """

    def __init__(
        self,
        transform_strategies: List[TransformStrategy],
        load_strategies: List[LoadStrategy],
        logger: Optional[logging.Logger] = None,
    ):
        """
        Args:
            transform_strategies (List[TransformStrategy]): Applied in order, each to the previous output.
            load_strategies (List[LoadStrategy]): Applied in order to the transformed data.
            logger (logging.Logger, optional): The logger to use for logging. If None, logging is skipped.
        """
        self.logger = logger
        if logger is not None:
            logger.info("Using transform strategies: {}".format(_names(transform_strategies)))
            logger.info("Using load strategies: {}".format(_names(load_strategies)))
        self.transform_strategies = transform_strategies
        self.load_strategies = load_strategies

    def _run(self, phase: str, strategy: Any, data: Any) -> Any:
        name = type(strategy).__name__
        if self.logger is not None:
            self.logger.info(f"Starting {phase} strategy {name}")
        try:
            data = getattr(strategy, phase)(data)
        except Exception as e:
            if self.logger is not None:
                self.logger.error(f"Failed to {phase} with {name}: {e}")
            raise
        if self.logger is not None:
            self.logger.info(f"Finished {phase} strategy {name}")
        return data

    def execute(self, data: Any = None) -> Any:
        """
        Transforms the input data and loads the result.

        Args:
            data (Any): The data to be transformed and loaded.

        Returns:
            Any: The result of the load phase.
        """
        for strategy in self.transform_strategies:
            data = self._run("transform", strategy, data)
        for strategy in self.load_strategies:
            data = self._run("load", strategy, data)
        return data


class ETLPipeline(DependentETLPipeline):
    """
    An ETL (Extract, Transform, Load) pipeline: the extraction strategies produce the data that
    the inherited transform and load phases consume.

    Attributes:
        extract_strategies (List[ExtractStrategy]): The strategies to use for the extraction phase;
            the last one's output feeds the transforms.
    """

    def __init__(
        self,
        extract_strategies: List[ExtractStrategy],
        transform_strategies: List[TransformStrategy],
        load_strategies: List[LoadStrategy],
        logger: Optional[logging.Logger] = None,
    ):
        if logger is not None:
            logger.info("Using extract strategies: {}".format(_names(extract_strategies)))
        super().__init__(transform_strategies, load_strategies, logger)
        self.extract_strategies = extract_strategies

    def execute(self, data: Any = None) -> Any:
        """
        Extracts, transforms and loads.

        Returns:
            Any: The result of the load phase.
        """
        for strategy in self.extract_strategies:
            name = type(strategy).__name__
            try:
                data = strategy.extract()
            except Exception as e:
                if self.logger is not None:
                    self.logger.error(f"Failed to extract with {name}: {e}")
                raise
        return super().execute(data)
