"""High-level synthesis from a small behavioral language to RTL and gates."""

__version__ = "0.1.0"

from .errors import HlsError  # noqa: E402
from .flow import Synthesis, synthesize  # noqa: E402
from .frontend import parse_source  # noqa: E402

__all__ = ["HlsError", "Synthesis", "__version__", "parse_source", "synthesize"]
