"""Registrable-domain reduction against the vendored public-suffix snapshot.

Implements the publicsuffix.org matching algorithm: among all rules whose
labels match the host right-to-left ("*" matches one label, "!" marks an
exception that beats everything), the longest match wins; hosts matching no
rule fall back to the implicit "*" rule. The registrable domain is the
public suffix plus one preceding label.
"""

from __future__ import annotations

import functools
from importlib import resources

_WILDCARD = "*"


class _RuleSet:
    def __init__(self, rules: set[str], exceptions: set[str]):
        self.rules = rules
        self.exceptions = exceptions

    def suffix_length(self, labels: list[str]) -> int:
        """Number of labels in the public suffix of ``labels``."""
        best = 1  # implicit "*" rule
        n = len(labels)
        for take in range(1, n + 1):
            candidate = labels[n - take :]
            name = ".".join(candidate)
            if name in self.exceptions:
                # exception rule: suffix is the rule minus its leftmost label
                return take - 1
            if name in self.rules:
                best = max(best, take)
                continue
            if take > 1:
                wild = ".".join([_WILDCARD] + candidate[1:])
                if wild in self.rules:
                    best = max(best, take)
        return best


def _parse(text: str) -> _RuleSet:
    rules: set[str] = set()
    exceptions: set[str] = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("//"):
            continue
        line = line.split()[0].lower()
        if line.startswith("!"):
            exceptions.add(line[1:])
        else:
            rules.add(line)
    return _RuleSet(rules, exceptions)


@functools.lru_cache(maxsize=1)
def _snapshot() -> _RuleSet:
    text = (
        resources.files("newsky")
        .joinpath("data/public_suffix_list.dat")
        .read_text(encoding="utf-8")
    )
    return _parse(text)


def registrable_domain(host: str) -> str:
    """Reduce a lowercase host to its registrable domain.

    A host that is itself a public suffix comes back unchanged; there is no
    smaller registrable unit to report.
    """
    labels = host.split(".")
    take = _snapshot().suffix_length(labels)
    if take >= len(labels):
        return host
    return ".".join(labels[-(take + 1) :])


def public_suffix(host: str) -> str:
    labels = host.split(".")
    take = _snapshot().suffix_length(labels)
    return ".".join(labels[-take:]) if take else host
