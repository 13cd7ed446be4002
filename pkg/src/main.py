"""Entry point for the targetspace experiment CLI."""

import logging
import sys

from config import config
from config.Config import setup_logging
from cli import main as cli_main

setup_logging(config.LOG_LEVEL)
logger = logging.getLogger(__name__)


def main() -> int:
    """Run the command line and return its exit code."""
    try:
        return cli_main()
    except KeyboardInterrupt:
        logger.info("Shutting down...")
        return 130
    except Exception:
        logger.exception("Fatal error occurred")
        raise


if __name__ == "__main__":
    sys.exit(main())
