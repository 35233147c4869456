"""
Entry point for the ``ybe`` command
"""
import sys
from typing import List, Optional

from ybe.cli.parser import parse_config
from ybe.cli.runner import EXIT_IO, render, run
from ybe.utils.errors import ParseError
from ybe.utils.logging import log_error_with_context, setup_logger

logger = setup_logger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        config = parse_config(argv)
    except ParseError as exc:
        log_error_with_context(logger, exc, "parsing arguments")
        print(f"ybe: {exc.reason}", file=sys.stderr)
        return EXIT_IO
    report = run(config)
    print(render(report, config.output))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
