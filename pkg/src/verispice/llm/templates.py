"""Prompt catalog: plain-text templates with {UPPER_CASE} placeholders.

Templates live as data files under prompts/ keyed by file stem, so wording
can be edited without touching code. Placeholders are upper-case names in
braces; anything else in braces (ngspice behavioral expressions, for
instance) is left alone.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from ..errors import ConfigError, InputError

PLACEHOLDER_RE = re.compile(r"\{([A-Z][A-Z0-9_]*)\}")


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    body: str

    @property
    def placeholders(self) -> frozenset[str]:
        return frozenset(PLACEHOLDER_RE.findall(self.body))

    def render(self, **bindings: str) -> str:
        """Substitute every placeholder; unbound or unknown names are errors."""
        needed = self.placeholders
        missing = needed - set(bindings)
        if missing:
            raise InputError(f"template {self.id}: unbound placeholders {sorted(missing)}")
        extra = set(bindings) - needed
        if extra:
            raise InputError(f"template {self.id}: unknown placeholders {sorted(extra)}")
        text = PLACEHOLDER_RE.sub(lambda m: str(bindings[m.group(1)]), self.body)
        leftover = set(PLACEHOLDER_RE.findall(text))
        if leftover:
            raise InputError(
                f"template {self.id}: bindings reintroduced placeholders {sorted(leftover)}"
            )
        return text


def load_catalog() -> dict[str, PromptTemplate]:
    """Read every prompts/*.txt into a template keyed by file stem."""
    catalog: dict[str, PromptTemplate] = {}
    root = resources.files(__package__) / "prompts"
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".txt"):
            stem = entry.name[: -len(".txt")]
            catalog[stem] = PromptTemplate(stem, entry.read_text(encoding="utf-8"))
    if not catalog:
        raise ConfigError("prompt catalog is empty")
    return catalog


_catalog: dict[str, PromptTemplate] | None = None


def get_template(template_id: str) -> PromptTemplate:
    global _catalog
    if _catalog is None:
        _catalog = load_catalog()
    try:
        return _catalog[template_id]
    except KeyError:
        known = ", ".join(sorted(_catalog))
        raise InputError(f"unknown prompt template {template_id!r} (have: {known})") from None
