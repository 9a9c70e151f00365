"""
Rolling-window arithmetic of the experiment.

With ``N`` returns and a GARCH window ``W`` the first out-of-sample GARCH forecast is for return
index ``W``. Feature row ``i`` describes day ``t = W + i`` and targets day ``t + 1``, so the feature
matrix has ``N - W - 1`` rows. Block ``k`` trains on rows ``[k*step, k*step + train)`` and tests on the
following ``test`` rows, truncated at the end of the matrix. ``step`` is at least ``test`` so no row
is forecast twice.
"""

from dataclasses import dataclass
from typing import List

from ..utils import ConstraintError, InsufficientDataError


@dataclass(frozen=True)
class Block:
    index: int
    train_start: int
    train_stop: int
    test_start: int
    test_stop: int

    @property
    def test_size(self) -> int:
        return self.test_stop - self.test_start


@dataclass(frozen=True)
class RollingPlan:
    """
    Window sizes of the rolling protocol.

    Attributes:
        garch_window (int): Returns per GARCH estimation window.
        gru_train_window (int): Feature rows per GRU training window.
        gru_test_window (int): Feature rows forecast per block.
        validation_fraction (float): Chronological tail of the training window held out.
        step (int): Rows the blocks advance by, at least ``gru_test_window``.
    """

    garch_window: int = 504
    gru_train_window: int = 1008
    gru_test_window: int = 504
    validation_fraction: float = 0.33
    step: int = 504

    def __post_init__(self):
        for name in ("garch_window", "gru_train_window", "gru_test_window", "step"):
            if getattr(self, name) < 1:
                raise ConstraintError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConstraintError(f"validation fraction must lie in (0, 1), got {self.validation_fraction}")
        if not 1 <= self.validation_size < self.gru_train_window:
            raise ConstraintError(
                f"validation size {self.validation_size} leaves no training rows in a window of {self.gru_train_window}"
            )
        if self.step < self.gru_test_window:
            raise ConstraintError(
                f"step {self.step} is shorter than the test window {self.gru_test_window}; test blocks would overlap"
            )

    @property
    def validation_size(self) -> int:
        return int(round(self.validation_fraction * self.gru_train_window))

    def feature_rows(self, n_returns: int) -> int:
        return max(n_returns - self.garch_window - 1, 0)

    def blocks(self, n_rows: int) -> List[Block]:
        """Blocks over a feature matrix of ``n_rows`` rows."""
        blocks = []
        k = 0
        while True:
            train_start = k * self.step
            test_start = train_start + self.gru_train_window
            if test_start >= n_rows:
                break
            blocks.append(
                Block(
                    index=k,
                    train_start=train_start,
                    train_stop=test_start,
                    test_start=test_start,
                    test_stop=min(test_start + self.gru_test_window, n_rows),
                )
            )
            k += 1
        return blocks

    def forecast_count(self, n_rows: int) -> int:
        return sum(block.test_size for block in self.blocks(n_rows))

    def require_blocks(self, n_rows: int) -> List[Block]:
        """
        Raises:
            InsufficientDataError: If not even one block fits.
        """
        blocks = self.blocks(n_rows)
        if not blocks:
            raise InsufficientDataError(
                f"{n_rows} feature rows cannot hold a training window of {self.gru_train_window} plus a test row"
            )
        return blocks
