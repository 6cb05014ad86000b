"""Corpus chunking, embedding, flat cosine index and keyword re-ranking."""

from bacsum.retrieval.chunking import Chunk, ChunkingConfig, chunk_document
from bacsum.retrieval.embedding import EmbeddingProvider, HashedBagOfWords, HttpEmbeddingProvider, embed
from bacsum.retrieval.index import (
    RetrievalResult,
    VectorIndex,
    cosine_similarity,
    index_search,
    load_index,
    save_index,
)
from bacsum.retrieval.keywords import extract_keywords, keyword_rerank

__all__ = [
    "Chunk",
    "ChunkingConfig",
    "EmbeddingProvider",
    "HashedBagOfWords",
    "HttpEmbeddingProvider",
    "RetrievalResult",
    "VectorIndex",
    "chunk_document",
    "cosine_similarity",
    "embed",
    "extract_keywords",
    "index_search",
    "keyword_rerank",
    "load_index",
    "save_index",
]
