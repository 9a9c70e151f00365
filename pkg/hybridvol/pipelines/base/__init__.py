from .etl_strategy import (DependentETLPipeline, ETLPipeline, ExtractStrategy,
                           LoadStrategy, TransformStrategy)
