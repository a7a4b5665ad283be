"""Community lexicons and log-odds word scoring with informative
Dirichlet priors.

The score for word w contrasting community i against community j is

    delta_w = ln((y_iw + a_w) / (n_i + a_0 - y_iw + a_w))
            - ln((y_jw + a_w) / (n_j + a_0 - y_jw + a_w))

with y the within-community counts, n the community totals and the priors
a_w / a_0 pooled over all communities. The denominator's "+ a_w" term is
deliberate and load-bearing for compatibility with downstream consumers;
`conventional=True` switches to the "- a_w" variant commonly seen in the
literature. Raw deltas are reported, not variance-normalized z-scores.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Optional

_TOKEN_RE = re.compile(r"\w{2,}", re.UNICODE)

FALLBACK_LANG = "en"


@lru_cache(maxsize=None)
def stopwords_for(lang: Optional[str]) -> frozenset:
    """Vendored stopword list for a language code; unknown languages fall
    back to English, the dominant language of the stream."""
    lang = (lang or FALLBACK_LANG).lower()
    path = resources.files("newsky").joinpath(f"data/stopwords/{lang}.txt")
    if not path.is_file():
        if lang == FALLBACK_LANG:
            return frozenset()
        return stopwords_for(FALLBACK_LANG)
    words = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def tokenize(text: str, lang: Optional[str] = None) -> list:
    """Casefolded word tokens of length >= 2, stopwords removed.

    '#' never reaches the token stream, so hashtags contribute their bare
    tag form.
    """
    stop = stopwords_for(lang)
    return [
        token
        for token in (match.group(0).casefold() for match in _TOKEN_RE.finditer(text or ""))
        if token not in stop
    ]


@dataclass
class CommunityLexicon:
    """Bag-of-words counts for one community's timeline corpus."""

    community_id: int
    word_counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.word_counts.values())

    @classmethod
    def from_texts(cls, community_id: int, texts: Iterable[tuple]) -> "CommunityLexicon":
        """Build from (text, lang) pairs."""
        counts: Counter = Counter()
        for text, lang in texts:
            counts.update(tokenize(text, lang))
        return cls(community_id=community_id, word_counts=counts)

    @classmethod
    def merged(cls, community_id: int, parts: Iterable["CommunityLexicon"]) -> "CommunityLexicon":
        counts: Counter = Counter()
        for part in parts:
            counts.update(part.word_counts)
        return cls(community_id=community_id, word_counts=counts)


def pooled_counts(lexicons: Iterable[CommunityLexicon]) -> Counter:
    """Prior counts a_w: the total count of each word across all
    communities. a_0 is the sum of these."""
    pooled: Counter = Counter()
    for lexicon in lexicons:
        pooled.update(lexicon.word_counts)
    return pooled


def log_odds(
    target: CommunityLexicon,
    rest: CommunityLexicon,
    priors: Mapping,
    conventional: bool = False,
) -> dict:
    """word → delta contrasting target against rest under pooled priors.

    Scores every word with a positive prior count; zero within-community
    counts are smoothed by the prior alone.
    """
    a_0 = sum(priors.values())
    n_i = target.total
    n_j = rest.total
    sign = -1.0 if conventional else 1.0
    out: dict = {}
    for word, a_w in priors.items():
        if a_w <= 0:
            continue
        y_iw = target.word_counts.get(word, 0)
        y_jw = rest.word_counts.get(word, 0)
        denom_i = n_i + a_0 - y_iw + sign * a_w
        denom_j = n_j + a_0 - y_jw + sign * a_w
        if denom_i <= 0 or denom_j <= 0:
            continue
        out[word] = math.log((y_iw + a_w) / denom_i) - math.log((y_jw + a_w) / denom_j)
    return out


def top_words(deltas: Mapping, limit: int) -> list:
    """Highest-delta words first; ties broken lexicographically."""
    ranked = sorted(deltas.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:limit]


def export_lexicon_csv(rows: Iterable[tuple], fh) -> None:
    """rows: (community_id, word, delta, count) tuples."""
    fh.write("community,word,delta,count\n")
    for community_id, word, delta, count in rows:
        fh.write(f"{community_id},{word},{format(delta, '.6g')},{count}\n")
