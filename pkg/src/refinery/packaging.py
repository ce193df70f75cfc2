"""Quality-binned, sorted, sharded corpus packaging.

Retained documents are binned by quality level (5-10; anything lower goes
to "unbinned"), each bin is sorted globally, and bins are written as
size-bounded Zstandard-compressed JSON Lines shards with a per-language
manifest. Layout: <out>/<lang>/<bin>/<shard_index>.jsonl.zst.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from . import zstdio
from .documents import Corpus, Document, parse_document_line, serialize_document
from .wds import wds_level

BIN_LEVELS = (5, 6, 7, 8, 9, 10)
UNBINNED = "unbinned"


class PackagingError(ValueError):
    pass


class ShardReadError(IOError):
    def __init__(self, message: str, path: str | Path, frame_offset: int | None = None):
        super().__init__(f"{path}: {message}")
        self.path = str(path)
        self.frame_offset = frame_offset


@dataclass(frozen=True)
class PackagingConfig:
    max_uncompressed_bytes: int = 1 << 30
    compression_level: int = 9
    sort_descending: bool = True


@dataclass(frozen=True)
class ShardManifest:
    language: str
    wds_bin: int | str
    shard_index: int
    document_count: int
    uncompressed_bytes: int
    compressed_bytes: int
    first_id: str
    last_id: str

    def to_json(self) -> dict:
        return {
            "language": self.language,
            "wds_bin": self.wds_bin,
            "shard_index": self.shard_index,
            "document_count": self.document_count,
            "uncompressed_bytes": self.uncompressed_bytes,
            "compressed_bytes": self.compressed_bytes,
            "first_id": self.first_id,
            "last_id": self.last_id,
        }


def assign_bins(corpus: Corpus) -> dict[int | str, list[Document]]:
    """Group scored documents by quality level; levels below 5 are unbinned."""
    bins: dict[int | str, list[Document]] = {}
    for doc in corpus:
        if doc.wds is None:
            raise PackagingError(f"document {doc.id!r} has no wds score")
        level = wds_level(doc.wds)
        key: int | str = level if level >= 5 else UNBINNED
        bins.setdefault(key, []).append(doc)
    return bins


def sort_bin(documents: Sequence[Document], descending: bool = True) -> list[Document]:
    """Total deterministic order: by score, ties ascending by (collection, id)."""
    def key(doc: Document):
        score = doc.wds if doc.wds is not None else 0.0
        return ((-score if descending else score), doc.collection, doc.id)

    return sorted(documents, key=key)


def _bin_sort_order(bins: Iterable[int | str], descending: bool = True) -> list[int | str]:
    numeric = sorted((b for b in bins if isinstance(b, int)), reverse=descending)
    ordered: list[int | str] = list(numeric)
    if any(b == UNBINNED for b in bins):
        ordered.append(UNBINNED)
    return ordered


def write_shards(
    documents: Sequence[Document],
    out_dir: str | Path,
    language: str,
    wds_bin: int | str,
    config: PackagingConfig | None = None,
) -> list[ShardManifest]:
    """Greedy-fill one bin's sorted documents into size-bounded shards.

    A document starts a new shard when adding it would exceed the
    uncompressed limit; a single document larger than the limit is an error.
    """
    config = config or PackagingConfig()
    bin_dir = Path(out_dir) / language / str(wds_bin)
    bin_dir.mkdir(parents=True, exist_ok=True)

    manifests: list[ShardManifest] = []
    shard_docs: list[tuple[Document, bytes]] = []
    shard_bytes = 0

    def flush():
        nonlocal shard_docs, shard_bytes
        if not shard_docs:
            return
        payload = b"".join(line for _, line in shard_docs)
        compressed = zstdio.compress(payload, level=config.compression_level)
        index = len(manifests)
        path = bin_dir / f"{index}.jsonl.zst"
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(compressed)
        tmp.replace(path)
        manifests.append(
            ShardManifest(
                language=language,
                wds_bin=wds_bin,
                shard_index=index,
                document_count=len(shard_docs),
                uncompressed_bytes=shard_bytes,
                compressed_bytes=len(compressed),
                first_id=shard_docs[0][0].id,
                last_id=shard_docs[-1][0].id,
            )
        )
        shard_docs = []
        shard_bytes = 0

    for doc in documents:
        line = (serialize_document(doc) + "\n").encode("utf-8")
        if len(line) > config.max_uncompressed_bytes:
            raise PackagingError(
                f"document {doc.id!r} is {len(line)} bytes serialized, larger "
                f"than the shard limit {config.max_uncompressed_bytes}"
            )
        if shard_docs and shard_bytes + len(line) > config.max_uncompressed_bytes:
            flush()
        shard_docs.append((doc, line))
        shard_bytes += len(line)
    flush()
    return manifests


def read_shards(paths: Iterable[str | Path]) -> list[Document]:
    """Read shard files in the order given, concatenating their documents."""
    docs: list[Document] = []
    for path in paths:
        path = Path(path)
        raw = path.read_bytes()
        try:
            data = zstdio.decompress(raw)
        except zstdio.ZstdError as exc:
            raise ShardReadError(
                f"corrupt zstd frame at byte offset {exc.frame_offset}: {exc}",
                path,
                exc.frame_offset,
            ) from exc
        for line in data.decode("utf-8").split("\n"):  # \n only; see documents.py
            if line.strip():
                docs.append(parse_document_line(line))
    return docs


def package_corpus(
    corpus: Corpus, out_dir: str | Path, config: PackagingConfig | None = None
) -> list[ShardManifest]:
    """Bin, sort, and shard a scored corpus; write the language manifest."""
    config = config or PackagingConfig()
    bins = assign_bins(corpus)
    manifests: list[ShardManifest] = []
    for key in _bin_sort_order(bins.keys(), config.sort_descending):
        ordered = sort_bin(bins[key], config.sort_descending)
        manifests.extend(
            write_shards(ordered, out_dir, corpus.language, key, config)
        )
    manifest_path = Path(out_dir) / corpus.language / "manifest.json"
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    tmp = manifest_path.with_name(manifest_path.name + ".tmp")
    tmp.write_text(
        json.dumps([m.to_json() for m in manifests], indent=2) + "\n",
        encoding="utf-8",
    )
    tmp.replace(manifest_path)
    return manifests


def shard_paths(
    out_dir: str | Path, language: str, manifests: Sequence[ShardManifest]
) -> list[Path]:
    return [
        Path(out_dir) / language / str(m.wds_bin) / f"{m.shard_index}.jsonl.zst"
        for m in manifests
    ]


def read_packaged_corpus(out_dir: str | Path, language: str) -> list[Document]:
    """Read all shards of a packaged language in (bin, shard_index) order."""
    manifest_path = Path(out_dir) / language / "manifest.json"
    records = json.loads(manifest_path.read_text(encoding="utf-8"))
    manifests = [ShardManifest(**r) for r in records]
    return read_shards(shard_paths(out_dir, language, manifests))
