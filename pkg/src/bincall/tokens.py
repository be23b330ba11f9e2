"""Identifier subtokenization: open_file -> [open, file]."""

from __future__ import annotations

import re

_CAMEL_SPLIT = re.compile(
    r"[a-z]+|[A-Z][a-z]+|[A-Z]+(?![a-z])|\d+"
)


def subtokenize_name(name: str) -> list:
    """Split on underscores and camel-case boundaries, lowercase the result.

    Digit runs become their own tokens; separator-only names yield [].
    """
    if not name:
        raise ValueError("empty name")
    tokens = []
    for chunk in re.split(r"[_\W]+", name):
        if not chunk:
            continue
        tokens.extend(match.group(0).lower() for match in _CAMEL_SPLIT.finditer(chunk))
    return tokens
