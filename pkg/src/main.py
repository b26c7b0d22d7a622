"""Application entry point."""

import logging
import sys

from src.app import create_app

# Configure logging; stdout is reserved for reports
logging.basicConfig(
    level=logging.INFO,
    stream=sys.stderr,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)


def main() -> int:
    """Run the application."""
    return create_app().run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
