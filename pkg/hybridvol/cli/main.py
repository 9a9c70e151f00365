import argparse
import sys
from typing import Callable, Dict, List, Optional

from ..utils import (EXIT_CONVERGENCE, EXIT_DATA, EXIT_INTERNAL, EXIT_OK,
                     ConfigError, HybridVolError, PipelineLogger)
from . import commands
from .config import RunConfig

COMMANDS: Dict[str, Callable] = {
    "stats": commands.cmd_stats,
    "simulate": commands.cmd_simulate,
    "garch-fit": commands.cmd_garch_fit,
    "run": commands.cmd_run,
    "backtest": commands.cmd_backtest,
    "compare": commands.cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridvol",
        description="GARCH and hybrid GARCH-GRU volatility forecasts with VaR/ES backtests.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="key=value configuration file; optional for simulate")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--threads", type=int, help="cap on parallel workers")
    parser.add_argument("--out", help="artifact directory")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    overrides = {"seed": args.seed, "threads": args.threads, "output_dir": args.out}
    if args.config is None:
        if args.command != "simulate":
            raise ConfigError(f"--config is required for {args.command}")
        return RunConfig().with_overrides(overrides)
    return RunConfig.from_file(args.config, overrides)


def _print_result(command: str, result, config: RunConfig) -> None:
    if command in ("stats", "compare"):
        print(result.to_string(index=False))
    elif command == "simulate":
        prices, _ = result
        print(f"Wrote {len(prices)} OHLC records to {config.output_dir}")
    elif command == "garch-fit":
        print(f"{result.spec.label}: log-likelihood {result.log_likelihood:.4f}, "
              f"converged {result.converged}, AIC {result.aic:.4f}, BIC {result.bic:.4f}")
    else:
        for report in result.reports:
            print(report.to_table())
            print()
        if not result.complete:
            print(f"Run incomplete: {result.status()['failure']}")


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the ``hybridvol`` command.

    Returns:
        int: 0 on success; 2 for configuration, 3 for data, 4 for convergence and 5 for
        internal errors. An incomplete run returns 4.
    """
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        PipelineLogger.config_logger({}, config.output_dir)
        logger = PipelineLogger.get_logger(__name__)
        logger.info(f"Running {args.command} with configuration {config.to_dict()}")
        result = COMMANDS[args.command](config)
    except HybridVolError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL

    _print_result(args.command, result, config)
    if args.command == "run" and not result.complete:
        return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
