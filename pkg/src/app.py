"""CLI application factory."""

import logging
import sys
from typing import Sequence

from src import __version__
from src.cli import router
from src.cli.dependencies import set_config, set_store
from src.config import RunConfig
from src.datasources import DocumentStore, FileSystemStore
from src.errors import AnelkinError, ConfigError

logger = logging.getLogger(__name__)

PROG = "anelkin"


class CliApp:
    """Parses a command line, wires the store and config, and runs one verb."""

    def __init__(self, config: RunConfig | None = None, store: DocumentStore | None = None):
        self.config = config
        self.store = store or FileSystemStore()
        self.parser = router.build_parser(PROG, __version__)

    def resolve_config(self, args) -> RunConfig:
        """--config, then ANELKIN_CONFIG, then defaults; flag overrides on top."""
        base = self.config if self.config is not None and args.config is None else RunConfig.load(args.config)
        return base.with_overrides(tol_rel=args.tol, rng_seed=args.seed, log_level=args.log_level)

    def run(self, argv: Sequence[str]) -> int:
        """
        Run one command.

        Returns:
            0 on success, 2 on a negative verdict, 1 on any error
        """
        try:
            args = self.parser.parse_args(list(argv))
            config = self.resolve_config(args)
            try:
                logging.getLogger().setLevel(config.log_level.upper())
            except ValueError as e:
                raise ConfigError(f"unknown log level {config.log_level!r}") from e

            set_store(self.store)
            set_config(config)
            logger.debug(f"Running {args.command} with {config.as_dict()}")
            return args.handler(args)
        except SystemExit as e:
            # --help and --version
            return e.code if isinstance(e.code, int) else 0
        except AnelkinError as e:
            logger.debug("Command failed", exc_info=True)
            print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
            return 1


def create_app(config: RunConfig | None = None, store: DocumentStore | None = None) -> CliApp:
    """
    Create the CLI application.

    Args:
        config: Run configuration. If None, resolved per invocation from
            --config, the environment and defaults.
        store: Document store. Defaults to the local filesystem.

    Returns:
        Configured CliApp
    """
    return CliApp(config, store)
