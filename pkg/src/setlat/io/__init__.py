"""Document I/O and the command line."""

from .document import (
    FORMAT_VERSION,
    Document,
    InputError,
    SegmentExample,
    dumps,
    emit,
    load_document,
    parse_document,
    parse_problem,
)

__all__ = [
    "FORMAT_VERSION", "Document", "InputError", "SegmentExample", "dumps", "emit",
    "load_document", "parse_document", "parse_problem",
]
