"""MinHash near-deduplication: shingling, signatures, LSH, clustering.

Signatures use a splitmix64-style mixing family: component i is
min over shingles x of mix64(x ^ r_i), with the r_i derived from the run
seed. Each mix64(. ^ r_i) is a bijection of the 64-bit space with strong
avalanche, so component agreement estimates Jaccard similarity the same
way seeded permutations would, and everything vectorizes in uint64.

Candidate pairs come from LSH banding by default; an all-pairs mode exists
for small corpora and oracle testing. Verification compares either the
signature estimate or, with exact_verification, the true Jaccard of the
shingle sets.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Mapping

import numpy as np

from .documents import Corpus, Document
from .lid import normalize_for_lid

PairVerifier = Callable[[str, str], float]

_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SHINGLE_CHUNK = 8192


class DedupConfigError(ValueError):
    """Invalid deduplication parameters."""


class EmptyShingleSetError(ValueError):
    """Document has too few tokens to shingle; exempt it from dedup."""


@dataclass(frozen=True)
class ShingleSet:
    shingles: frozenset[int]
    n: int


@dataclass(frozen=True)
class MinHashSignature:
    values: tuple[int, ...]
    k: int
    seed: int


@dataclass(frozen=True)
class DedupParams:
    ngram_order: int = 5
    signature_length: int = 256
    seed: int = 0
    bands: int = 16
    rows: int = 16
    verify_threshold: float = 0.8
    mode: str = "global"  # global | per_crawl
    exact_verification: bool = False
    candidates: str = "lsh"  # lsh | all_pairs

    def __post_init__(self):
        if self.ngram_order < 1:
            raise DedupConfigError("ngram_order must be >= 1")
        if self.signature_length < 1:
            raise DedupConfigError("signature_length must be >= 1")
        if self.bands * self.rows != self.signature_length:
            raise DedupConfigError(
                f"bands*rows = {self.bands * self.rows} != "
                f"signature_length = {self.signature_length}"
            )
        if not 0.0 <= self.verify_threshold <= 1.0:
            raise DedupConfigError("verify_threshold must lie in [0, 1]")
        if self.mode not in ("global", "per_crawl"):
            raise DedupConfigError(f"unknown mode {self.mode!r}")
        if self.candidates not in ("lsh", "all_pairs"):
            raise DedupConfigError(f"unknown candidate scheme {self.candidates!r}")


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _hash_seeds(k: int, seed: int) -> np.ndarray:
    base = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    steps = np.arange(1, k + 1, dtype=np.uint64) * _GOLDEN_GAMMA
    return _mix64(base + steps)


def _shingle_hash(ngram: str) -> int:
    return int.from_bytes(
        hashlib.blake2b(ngram.encode("utf-8"), digest_size=8).digest(), "little"
    )


def shingle(doc: Document, n: int) -> ShingleSet:
    """Hash every contiguous word n-gram of the LID-normalized text."""
    if n < 1:
        raise DedupConfigError("shingle order n must be >= 1")
    tokens = normalize_for_lid(doc.text).split()
    grams = {
        _shingle_hash(" ".join(tokens[i : i + n]))
        for i in range(len(tokens) - n + 1)
    }
    return ShingleSet(frozenset(grams), n)


def exact_jaccard(a: ShingleSet, b: ShingleSet) -> float:
    union = len(a.shingles | b.shingles)
    if union == 0:
        return 0.0
    return len(a.shingles & b.shingles) / union


def signature(s: ShingleSet, k: int, seed: int) -> MinHashSignature:
    """MinHash signature of a non-empty shingle set."""
    if k < 1:
        raise DedupConfigError("signature length k must be >= 1")
    if not s.shingles:
        raise EmptyShingleSetError(
            "cannot sign an empty shingle set; exempt the document from dedup"
        )
    x = np.fromiter(s.shingles, dtype=np.uint64, count=len(s.shingles))
    seeds = _hash_seeds(k, seed)[:, None]
    mins = np.full(k, np.iinfo(np.uint64).max, dtype=np.uint64)
    for start in range(0, len(x), _SHINGLE_CHUNK):
        hashed = _mix64(x[None, start : start + _SHINGLE_CHUNK] ^ seeds)
        np.minimum(mins, hashed.min(axis=1), out=mins)
    return MinHashSignature(tuple(int(v) for v in mins), k, seed)


def estimate_jaccard(a: MinHashSignature, b: MinHashSignature) -> float:
    """Fraction of agreeing signature positions."""
    if a.k != b.k or a.seed != b.seed:
        raise DedupConfigError(
            "signatures are not comparable: k/seed mismatch "
            f"({a.k}/{a.seed} vs {b.k}/{b.seed})"
        )
    agree = sum(1 for va, vb in zip(a.values, b.values) if va == vb)
    return agree / a.k


def lsh_candidates(
    signatures: Mapping[str, MinHashSignature], bands: int, rows: int
) -> set[tuple[str, str]]:
    """All unordered id pairs sharing at least one identical band."""
    buckets: dict[tuple[int, tuple[int, ...]], list[str]] = {}
    for doc_id in sorted(signatures):
        sig = signatures[doc_id]
        if bands * rows != sig.k:
            raise DedupConfigError(
                f"bands*rows = {bands * rows} != signature length {sig.k}"
            )
        for band in range(bands):
            key = (band, sig.values[band * rows : (band + 1) * rows])
            buckets.setdefault(key, []).append(doc_id)
    pairs: set[tuple[str, str]] = set()
    for ids in buckets.values():
        if len(ids) > 1:
            pairs.update(combinations(ids, 2))
    return pairs


@dataclass(frozen=True)
class DuplicateClusterSet:
    """Partition of document ids; one representative per cluster."""

    representative: dict[str, str]

    def clusters(self) -> dict[str, list[str]]:
        grouped: dict[str, list[str]] = {}
        for doc_id, rep in self.representative.items():
            grouped.setdefault(rep, []).append(doc_id)
        return {rep: sorted(ids) for rep, ids in grouped.items()}


class UnionFind:
    def __init__(self, ids: Iterable[str] = ()):
        self.parent: dict[str, str] = {i: i for i in ids}

    def add(self, x: str) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:  # path compression
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: str, y: str) -> None:
        px, py = self.find(x), self.find(y)
        if px != py:
            self.parent[max(px, py)] = min(px, py)


def cluster(
    pairs: Iterable[tuple[str, str]],
    all_ids: Iterable[str],
    verify: PairVerifier,
    verify_threshold: float,
    mode: str = "global",
    collections: Mapping[str, str] | None = None,
    sort_keys: Mapping[str, tuple[str, str]] | None = None,
) -> DuplicateClusterSet:
    """Union every candidate pair whose verified similarity clears the threshold.

    In per_crawl mode pairs crossing collection boundaries are ignored.
    The representative of each cluster is its lexicographically smallest
    (collection, id) member.
    """
    if not 0.0 <= verify_threshold <= 1.0:
        raise DedupConfigError("verify_threshold must lie in [0, 1]")
    uf = UnionFind(all_ids)
    for a, b in pairs:
        if mode == "per_crawl" and collections is not None:
            if collections.get(a) != collections.get(b):
                continue
        if verify(a, b) >= verify_threshold:
            uf.add(a)
            uf.add(b)
            uf.union(a, b)
    keys = sort_keys or {}
    by_root: dict[str, list[str]] = {}
    for doc_id in uf.parent:
        by_root.setdefault(uf.find(doc_id), []).append(doc_id)
    representative: dict[str, str] = {}
    for members in by_root.values():
        rep = min(members, key=lambda i: keys.get(i, ("", i)))
        for doc_id in members:
            representative[doc_id] = rep
    return DuplicateClusterSet(representative)


@dataclass(frozen=True)
class RemovalRecord:
    id: str
    representative_id: str
    estimated_jaccard: float

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "representative_id": self.representative_id,
            "estimated_jaccard": self.estimated_jaccard,
        }


@dataclass
class DedupResult:
    retained: Corpus
    removals: list[RemovalRecord] = field(default_factory=list)
    removed_docs: list[Document] = field(default_factory=list)
    clusters: DuplicateClusterSet | None = None


def _signatures_for(
    docs: list[Document], shingles: dict[str, ShingleSet], params: DedupParams, workers: int
) -> dict[str, MinHashSignature]:
    ids = [d.id for d in docs if shingles[d.id].shingles]

    def sign(doc_id: str) -> MinHashSignature:
        return signature(shingles[doc_id], params.signature_length, params.seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sigs = list(pool.map(sign, ids))
    else:
        sigs = [sign(i) for i in ids]
    return dict(zip(ids, sigs))


def dedup(corpus: Corpus, params: DedupParams, workers: int = 1) -> DedupResult:
    """Remove all but one document from every near-duplicate cluster.

    Documents too short to shingle bypass dedup unremoved. The retained
    sequence follows corpus order; removed documents are reported with
    their cluster representative and the similarity used for verification.
    """
    docs = list(corpus.documents)
    shingles = {d.id: shingle(d, params.ngram_order) for d in docs}
    sigs = _signatures_for(docs, shingles, params, workers)

    if params.candidates == "lsh":
        pairs = lsh_candidates(sigs, params.bands, params.rows)
    else:
        pairs = set(combinations(sorted(sigs), 2))

    if params.exact_verification:
        def verify(a: str, b: str) -> float:
            return exact_jaccard(shingles[a], shingles[b])
    else:
        def verify(a: str, b: str) -> float:
            return estimate_jaccard(sigs[a], sigs[b])

    collections = {d.id: d.collection for d in docs}
    sort_keys = {d.id: d.sort_key() for d in docs}
    cluster_set = cluster(
        sorted(pairs),
        sigs.keys(),
        verify,
        params.verify_threshold,
        mode=params.mode,
        collections=collections,
        sort_keys=sort_keys,
    )

    retained: list[Document] = []
    removals: list[RemovalRecord] = []
    removed_docs: list[Document] = []
    for doc in docs:
        rep = cluster_set.representative.get(doc.id, doc.id)
        if rep == doc.id:
            retained.append(doc)
        else:
            removals.append(RemovalRecord(doc.id, rep, verify(doc.id, rep)))
            removed_docs.append(doc.replace(removed_reason="duplicate"))
    retained_corpus = Corpus(retained, corpus.language)
    return DedupResult(retained_corpus, removals, removed_docs, cluster_set)
