"""Keyword extraction and keyword-count re-ranking of retrieved chunks."""

from __future__ import annotations

import dataclasses
import re
from collections.abc import Sequence
from typing import TYPE_CHECKING

from bacsum.errors import PreconditionError

if TYPE_CHECKING:
    from bacsum.retrieval.index import RetrievalResult

STOPWORDS_VERSION = 1
STOPWORDS = frozenset("""
a about above after again against all also am an and any are as at be because been before being
below between both but by can cannot could did do does doing down during each else etc few for
from further had has have having he her here hers herself him himself his how however i if in
into is it its itself just may me might more most must my myself no nor not now of off on once
only or other our ours ourselves out over own same shall she should so some such than that the
their theirs them themselves then there these they this those through thus to too under until up
upon us very via was we were what when where which while who whom why will with within without
would yet you your yours yourself yourselves
""".split())

_TOKEN = re.compile(r"[A-Za-z0-9]+")
_CAMEL_PART = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")


def _keep(token: str) -> bool:
    return len(token) >= 3 and not token.isdigit() and token not in STOPWORDS


def extract_keywords(text: str) -> set[str]:
    """Case-folded keyword set; camelCase compounds contribute both parts and the whole."""
    keywords = set()
    for token in _TOKEN.findall(text):
        candidates = {token.lower()}
        parts = _CAMEL_PART.findall(token)
        if len(parts) > 1:
            candidates.update(part.lower() for part in parts)
        keywords.update(c for c in candidates if _keep(c))
    return keywords


def keyword_rerank(query_text: str, candidates: Sequence[RetrievalResult]) -> RetrievalResult:
    """Pick the candidate sharing the most keywords with the query.

    Ties, including the all-zero case, go to the smallest rank. The returned
    result carries its ``keyword_matches`` count.
    """
    if not candidates:
        raise PreconditionError("keyword_rerank needs at least one candidate")
    query = extract_keywords(query_text)
    scored = [
        dataclasses.replace(c, keyword_matches=len(query & extract_keywords(c.chunk.text)))
        for c in candidates
    ]
    return min(scored, key=lambda c: (-c.keyword_matches, c.rank))
