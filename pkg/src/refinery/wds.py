"""Web-document quality scoring on a 0-10 scale.

The score is multiplicative: 10 * language_share * length_ramp *
(1 - oddity_penalty). A catastrophic factor (wrong-language text, tiny
document, heavy oddity) therefore forces a low score no matter how good
the other factors are. Thresholds and weights are configurable; the
defaults below are declared artifact choices, not tuned constants.
"""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass, field

from .documents import Corpus, Document, segment_text

_URL_PREFIXES = ("http://", "https://", "www.")


@dataclass(frozen=True)
class WdsConfig:
    min_length_tokens: int = 20
    target_length_tokens: int = 200
    # Oddity thresholds; exceedance above each is penalized.
    non_letter_ratio_threshold: float = 0.3
    digit_ratio_threshold: float = 0.2
    repeated_line_ratio_threshold: float = 0.2
    url_density_threshold: float = 0.1  # URLs per 100 tokens
    # Equal weights by default.
    weights: dict[str, float] = field(
        default_factory=lambda: {
            "non_letter_ratio": 1.0,
            "digit_ratio": 1.0,
            "repeated_line_ratio": 1.0,
            "url_density": 1.0,
        }
    )


@dataclass(frozen=True)
class WdsReport:
    language_share_score: float
    length_score: float
    oddity_penalty: float
    subsignals: dict[str, float]
    score: float
    level: int

    def to_json(self) -> dict:
        return {
            "language_share_score": self.language_share_score,
            "length_score": self.length_score,
            "oddity_penalty": self.oddity_penalty,
            "subsignals": self.subsignals,
            "score": self.score,
            "level": self.level,
        }


def wds_level(score: float) -> int:
    """Integer level for a 0-10 score: floor, with 10.0 mapping to 10."""
    if not 0.0 <= score <= 10.0:
        raise ValueError(f"score {score} outside [0, 10]")
    return min(math.floor(score), 10)


def _char_ratios(text: str) -> tuple[float, float]:
    non_space = 0
    letters = 0
    digits = 0
    for ch in text:
        if ch.isspace():
            continue
        non_space += 1
        cat = unicodedata.category(ch)
        if cat.startswith("L") or cat.startswith("M"):
            letters += 1
        elif cat == "Nd":
            digits += 1
    if non_space == 0:
        return 0.0, 0.0
    return (non_space - letters) / non_space, digits / non_space


def compute_subsignals(text: str) -> dict[str, float]:
    segments = segment_text(text)
    tokens = text.split()
    non_letter_ratio, digit_ratio = _char_ratios(text)
    if segments:
        repeated = 1.0 - len({s.text for s in segments}) / len(segments)
        avg_segment_tokens = sum(s.token_count for s in segments) / len(segments)
    else:
        repeated = 0.0
        avg_segment_tokens = 0.0
    url_count = sum(1 for t in tokens if t.lower().startswith(_URL_PREFIXES))
    url_density = 100.0 * url_count / len(tokens) if tokens else 0.0
    return {
        "non_letter_ratio": non_letter_ratio,
        "digit_ratio": digit_ratio,
        "repeated_line_ratio": repeated,
        "url_density": url_density,
        "avg_segment_tokens": avg_segment_tokens,
    }


def _length_score(n_tokens: int, config: WdsConfig) -> float:
    lo, hi = config.min_length_tokens, config.target_length_tokens
    if n_tokens <= lo:
        return 0.0
    if n_tokens >= hi:
        return 1.0
    return (n_tokens - lo) / (hi - lo)


def _oddity_penalty(subsignals: dict[str, float], config: WdsConfig) -> float:
    thresholds = {
        "non_letter_ratio": config.non_letter_ratio_threshold,
        "digit_ratio": config.digit_ratio_threshold,
        "repeated_line_ratio": config.repeated_line_ratio_threshold,
        "url_density": config.url_density_threshold,
    }
    penalty = 0.0
    for name, threshold in thresholds.items():
        exceedance = max(0.0, subsignals[name] - threshold)
        penalty += config.weights.get(name, 1.0) * exceedance
    return min(1.0, max(0.0, penalty))


def score_document(
    doc: Document, seg_profile: float, config: WdsConfig | None = None
) -> WdsReport:
    """Score one document given its in-language segment fraction."""
    config = config or WdsConfig()
    if not 0.0 <= seg_profile <= 1.0:
        raise ValueError(f"seg_profile {seg_profile} outside [0, 1]")
    subsignals = compute_subsignals(doc.text)
    if not doc.text.strip():
        return WdsReport(0.0, 0.0, 0.0, subsignals, 0.0, 0)
    length = _length_score(len(doc.text.split()), config)
    penalty = _oddity_penalty(subsignals, config)
    score = 10.0 * seg_profile * length * (1.0 - penalty)
    return WdsReport(seg_profile, length, penalty, subsignals, score, wds_level(score))


def filter_by_level(
    corpus: Corpus, min_level: int
) -> tuple[list[Document], list[Document]]:
    """Partition scored documents by quality level.

    Removed documents carry removed_reason="below_wds".
    """
    retained: list[Document] = []
    removed: list[Document] = []
    for doc in corpus:
        if doc.wds is None:
            raise ValueError(f"document {doc.id!r} has no wds score")
        if wds_level(doc.wds) >= min_level:
            retained.append(doc)
        else:
            removed.append(doc.replace(removed_reason="below_wds"))
    return retained, removed
