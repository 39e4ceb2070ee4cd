"""Source-domain selection: one source, two sources, or one from each of two pools."""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import ConfigError, EmptyPool, GafTLError, PoolTooSmall, SelectionError
from .similarity import Direction, SimilaritySpec, decode_score, encode_score, evaluate


@dataclass(frozen=True)
class CandidatePool:
    candidates: tuple
    label: str = "mixed"

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        tickers = [c.ticker for c in self.candidates]
        if len(set(tickers)) != len(tickers):
            raise ConfigError(f"duplicate tickers in {self.label} pool: {tickers}")

    def __len__(self):
        return len(self.candidates)

    @property
    def tickers(self):
        return [c.ticker for c in self.candidates]

    def without(self, ticker):
        return CandidatePool([c for c in self.candidates if c.ticker != ticker], self.label)


@dataclass
class SelectionResult:
    spec: SimilaritySpec
    chosen: tuple
    scores: dict = field(default_factory=dict)
    target: str = None

    def to_dict(self):
        return {
            "spec": self.spec.id,
            "function": self.spec.function.value,
            "mode": self.spec.mode.value,
            "direction": self.spec.direction.value,
            "target": self.target,
            "chosen": list(self.chosen),
            "scores": [
                {"source": t, "score": encode_score(s)} for t, s in self.scores.items()
            ],
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            spec=SimilaritySpec.parse(doc["spec"]),
            chosen=tuple(doc["chosen"]),
            scores={r["source"]: decode_score(r["score"]) for r in doc["scores"]},
            target=doc.get("target"),
        )


def _score_one(args):
    spec, source, target = args
    try:
        score = evaluate(spec, source, target)
    except GafTLError as exc:
        raise SelectionError(source.ticker, exc) from exc
    if score is None or math.isnan(score):
        raise SelectionError(source.ticker, ValueError("score is NaN"))
    return score


def score_pool(pool, target, spec, jobs=1):
    """Score every candidate against the target, in pool order."""
    for c in pool.candidates:
        if c.ticker == target.ticker:
            raise ConfigError(f"target {target.ticker!r} must not be in the {pool.label} pool")
    work = [(spec, c, target) for c in pool.candidates]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            scores = list(ex.map(_score_one, work))
    else:
        scores = [_score_one(w) for w in work]
    return dict(zip(pool.tickers, scores))


def best_of(scores, direction, exclude=()):
    """Index-stable argmin/argmax over an ordered score map; the first of equals wins."""
    best_t, best_s = None, None
    for t, s in scores.items():
        if t in exclude:
            continue
        if best_t is None:
            best_t, best_s = t, s
        elif (s > best_s) if direction is Direction.MAXIMIZE else (s < best_s):
            best_t, best_s = t, s
    return best_t


def select_single(pool, target, spec, jobs=1):
    if len(pool) == 0:
        raise EmptyPool(f"{pool.label} pool is empty")
    scores = score_pool(pool, target, spec, jobs)
    return SelectionResult(spec, (best_of(scores, spec.direction),), scores, target.ticker)


def select_multi(pool, target, spec, jobs=1):
    """Pick the best source, remove it, and pick the best of the rest."""
    if len(pool) < 2:
        raise PoolTooSmall(f"two-source selection needs >= 2 candidates; {pool.label} pool has {len(pool)}")
    scores = score_pool(pool, target, spec, jobs)
    first = best_of(scores, spec.direction)
    second = best_of(scores, spec.direction, exclude={first})
    return SelectionResult(spec, (first, second), scores, target.ticker)


def select_cross_pool(bank_pool, other_pool, target, spec, jobs=1):
    """First source from the bank pool, second from the other-industries pool."""
    for pool in (bank_pool, other_pool):
        if len(pool) == 0:
            raise EmptyPool(f"{pool.label} pool is empty")
    a = select_single(bank_pool, target, spec, jobs)
    b = select_single(other_pool.without(a.chosen[0]), target, spec, jobs)
    return SelectionResult(spec, a.chosen + b.chosen, {**a.scores, **b.scores}, target.ticker)
