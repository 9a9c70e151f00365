from .errors import (EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_DATA, EXIT_INTERNAL,
                     EXIT_OK, AlignmentError, ConfigError, ConstraintError,
                     ConvergenceError, DataError, DataIntegrityError,
                     DegenerateScaleError, DegenerateTestError, DomainError,
                     DuplicateDateError, GarchConvergenceError,
                     GruDivergenceError, HybridVolError, InsufficientDataError,
                     InsufficientExceedancesError, NumericOverflowError,
                     SchemaError, ShapeError)
from .logger import PipelineLogger
