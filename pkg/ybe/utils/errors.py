"""Exception hierarchy shared by the services and the command line."""
from __future__ import annotations

from typing import Any, Dict, Optional


class YBEError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.context: Dict[str, Any] = context


class StructuralError(YBEError):
    """Malformed input: dimension mismatch, missing table entry, bad partition."""

    exit_code = 3


class NotAHomomorphismError(YBEError):
    exit_code = 3

    def __init__(self, generator: int, image: tuple, message: Optional[str] = None):
        super().__init__(
            message
            or f"not a homomorphism: generator {generator} maps its order to {image}, not 0",
            generator=generator,
            image=image,
        )
        self.generator = generator


class EvennessError(YBEError):
    exit_code = 3

    def __init__(self, element: tuple):
        super().__init__(
            f"map is not even: f(-a) != f(a) at a={element}", element=element
        )
        self.element = element


class ParseError(YBEError):
    exit_code = 3

    def __init__(self, message: str, line: Optional[int] = None, path: str = "<text>"):
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}", line=line, path=path)
        self.line = line
        self.reason = message


class EnumerationCapExceeded(YBEError):
    exit_code = 2

    def __init__(self, partial_size: int, cap: int):
        super().__init__(
            f"incomplete enumeration: more than {cap} elements "
            f"({partial_size} found before stopping)",
            partial_size=partial_size,
            cap=cap,
        )
        self.partial_size = partial_size
        self.cap = cap


class ConsistencyError(YBEError):
    """An internal oracle disagreed; never expected on valid input."""


class NotApplicableError(YBEError):
    exit_code = 4

    def __init__(self, hypothesis: str):
        super().__init__(f"not applicable: {hypothesis} fails", hypothesis=hypothesis)
        self.hypothesis = hypothesis


class InvariantSubsetError(YBEError):
    def __init__(self, message: str, pair: tuple):
        super().__init__(message, pair=pair)
        self.pair = pair
