"""
Retrieval with keyword re-ranking
=================================

Chunk a small corpus, embed it with the hashed bag-of-words embedder, then
run the top-3 search for one packet and pick a chunk by keyword overlap.
"""

from pathlib import Path

import numpy as np

from bacsum import build_index, decode_packet, read_capture
from bacsum.codec.render import render_query_text
from bacsum.retrieval import HashedBagOfWords, extract_keywords, index_search, keyword_rerank

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

provider = HashedBagOfWords(384)
index = build_index(FIXTURES / "corpus", provider)
print(len(index), "chunks, vectors", index.vectors.shape, index.vectors.dtype)

packet = decode_packet(read_capture((FIXTURES / "wp_denied.pcap").read_bytes())[0])
query = render_query_text(packet)
print(query)
print(sorted(extract_keywords(query)))

hits = index_search(index, provider.embed_one(query), k=3)
for h in hits:
    print(h.rank, round(h.score, 3), h.chunk.source, h.chunk.section_path)

best = keyword_rerank(query, hits)
print("picked rank", best.rank, "with", best.keyword_matches, "shared keywords")
print(best.chunk.text.strip()[:300])

# scores are plain cosines; the matrix is float32, arithmetic is float64
q = provider.embed_one(query).astype(np.float64)
m = index.vectors.astype(np.float64)
print(np.round(m @ q / (np.linalg.norm(m, axis=1) * np.linalg.norm(q)), 3)[:5])
