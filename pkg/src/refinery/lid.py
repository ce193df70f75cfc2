"""Language-identification preprocessing and the pluggable classifier.

The normalizer lowercases, collapses whitespace, and strips digits and
non-word characters, yielding text suitable for any character-based
language classifier. The built-in fallback classifier is a character
n-gram multinomial scorer trained on seed text per language, so the whole
pipeline runs offline; an external model can replace it by implementing
the two-method contract below.
"""

from __future__ import annotations

import json
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Protocol, runtime_checkable

from .documents import Document, segment_text

# Word characters are letters and combining marks. Uppercase and titlecase
# survivors of the lowercasing step (letters with no lowercase mapping,
# e.g. mathematical alphanumerics) are dropped with the other non-word
# characters so the output is uppercase-free by construction.
_KEEP_CATEGORIES = frozenset({"Ll", "Lm", "Lo", "Mn", "Mc", "Me"})


class ClassifierError(Exception):
    """Classifier could not be loaded or failed to produce a prediction."""


@dataclass(frozen=True)
class LangPrediction:
    label: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@lru_cache(maxsize=None)
def _is_word_char(ch: str) -> bool:
    return unicodedata.category(ch) in _KEEP_CATEGORIES


def normalize_for_lid(text: str) -> str:
    """Normalize text for language identification.

    Applies, in order: whitespace-run collapsing, lowercasing, replacement
    of digits and non-word characters by spaces, and a final whitespace
    pass with trimming. Idempotent.
    """
    collapsed = " ".join(text.split())
    lowered = collapsed.lower()
    kept = "".join(ch if ch == " " or _is_word_char(ch) else " " for ch in lowered)
    return " ".join(kept.split())


@runtime_checkable
class LanguageClassifier(Protocol):
    """Plug-in contract: normalized UTF-8 text in, label + confidence out."""

    @property
    def labels(self) -> tuple[str, ...]: ...

    def predict(self, normalized_text: str) -> LangPrediction: ...


def classify(text: str, model: LanguageClassifier) -> LangPrediction:
    """Predict the language of ``text`` with ``model``.

    Normalization is applied here (it is idempotent, so already-normalized
    input is unchanged); empty normalized text maps to ("und", 0.0).
    """
    normalized = normalize_for_lid(text)
    if not normalized:
        return LangPrediction("und", 0.0)
    return model.predict(normalized)


@dataclass(frozen=True)
class SegmentProfile:
    seg_langs: tuple[str, ...]
    in_language_fraction: float
    empty: bool = False


def profile_segments(doc: Document, model: LanguageClassifier) -> SegmentProfile:
    """Classify each segment independently and measure the in-language share."""
    segments = segment_text(doc.text)
    if not segments:
        return SegmentProfile((), 0.0, empty=True)
    labels = tuple(classify(seg.text, model).label for seg in segments)
    matching = sum(1 for label in labels if label == doc.lang)
    return SegmentProfile(labels, matching / len(labels))


def _char_ngrams(text: str, orders: tuple[int, ...]) -> Counter:
    grams: Counter = Counter()
    for n in orders:
        for i in range(len(text) - n + 1):
            grams[text[i : i + n]] += 1
    return grams


class NgramLanguageClassifier:
    """Character n-gram multinomial scorer over a fixed label inventory.

    Trained from one seed text per language; prediction is the label with
    the highest add-one-smoothed log likelihood, with confidence equal to
    the posterior under a uniform prior.
    """

    def __init__(
        self,
        log_probs: dict[str, dict[str, float]],
        fallback_log_probs: dict[str, float],
        orders: tuple[int, ...] = (1, 2, 3),
    ):
        self._log_probs = log_probs
        self._fallback = fallback_log_probs
        self._orders = orders
        self._labels = tuple(sorted(log_probs))

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @classmethod
    def train(
        cls, seed_texts: dict[str, str], orders: tuple[int, ...] = (1, 2, 3)
    ) -> "NgramLanguageClassifier":
        if not seed_texts:
            raise ClassifierError("no seed texts supplied")
        counts = {
            label: _char_ngrams(normalize_for_lid(text), orders)
            for label, text in seed_texts.items()
        }
        vocab = set()
        for c in counts.values():
            vocab.update(c)
        if not vocab:
            raise ClassifierError("seed texts are empty after normalization")
        v = len(vocab)
        log_probs: dict[str, dict[str, float]] = {}
        fallback: dict[str, float] = {}
        for label, c in counts.items():
            total = sum(c.values())
            log_probs[label] = {
                gram: math.log((count + 1) / (total + v)) for gram, count in c.items()
            }
            fallback[label] = math.log(1 / (total + v))
        return cls(log_probs, fallback, orders)

    def predict(self, normalized_text: str) -> LangPrediction:
        if not normalized_text:
            return LangPrediction("und", 0.0)
        grams = _char_ngrams(normalized_text, self._orders)
        scores = {}
        for label in self._labels:
            table = self._log_probs[label]
            miss = self._fallback[label]
            scores[label] = sum(
                count * table.get(gram, miss) for gram, count in grams.items()
            )
        best = max(self._labels, key=lambda lb: (scores[lb], lb))
        peak = scores[best]
        denom = sum(math.exp(s - peak) for s in scores.values())
        return LangPrediction(best, 1.0 / denom)

    def save(self, path: str | Path) -> None:
        payload = {
            "orders": list(self._orders),
            "log_probs": self._log_probs,
            "fallback_log_probs": self._fallback,
        }
        Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NgramLanguageClassifier":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
            return cls(
                payload["log_probs"],
                payload["fallback_log_probs"],
                tuple(payload["orders"]),
            )
        except (OSError, KeyError, ValueError) as exc:
            raise ClassifierError(f"cannot load classifier from {path}: {exc}") from exc
