"""Berry-Esseen style bound evaluators for exchangeable-pair statistics.

Each evaluator transcribes one of the approximation theorems into a certified
numeric value with a per-term breakdown. Smooth-function bounds are reported
per unit ||h'||.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import Optional

from .limit_law import HypothesisReport, LimitLaw

__all__ = [
    "PairStatistics",
    "BoundValue",
    "theorem_1_1",
    "theorem_1_1_best",
    "theorem_1_2",
    "theorem_3_1",
]

_JSON_FIELDS = (
    "c0",
    "e_abs_one_minus_half_c0_d2",
    "e_abs_delta_cubed",
    "e_abs_r",
    "e_weighted_r",
    "e_abs_Wr",
    "delta_max",
    "e_abs_c0g_W",
)


@dataclass(frozen=True)
class PairStatistics:
    """Exchangeable-pair summary feeding the bound formulas.

    All expectation fields are nonnegative. delta_max is the almost-sure
    bound on |W - W'| and is required for Kolmogorov-type bounds; when it
    comes from an empirical maximum rather than a proof, note it in flags
    ("empirical-delta, not certified").
    """

    c0: float
    e_abs_one_minus_half_c0_d2: float
    e_abs_delta_cubed: float
    e_abs_r: float = 0.0
    e_weighted_r: float = 0.0
    e_abs_Wr: float = 0.0
    delta_max: Optional[float] = None
    e_abs_c0g_W: float = 0.0
    flags: tuple = ()

    def __post_init__(self):
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        for name in _JSON_FIELDS[1:]:
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be nonnegative")

    def to_json(self, path=None) -> str:
        doc = {name: getattr(self, name) for name in _JSON_FIELDS}
        text = json.dumps(doc, indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_json(cls, text: str) -> "PairStatistics":
        doc = json.loads(text)
        unknown = set(doc) - set(_JSON_FIELDS)
        if unknown:
            raise ValueError(f"unknown PairStatistics field: {sorted(unknown)[0]}")
        missing = {"c0", "e_abs_one_minus_half_c0_d2", "e_abs_delta_cubed"} - set(doc)
        if missing:
            raise ValueError(f"missing PairStatistics field: {sorted(missing)[0]}")
        return cls(**doc)


@dataclass(frozen=True)
class BoundValue:
    theorem: str
    value: float
    term_breakdown: tuple

    def __post_init__(self):
        total = sum(v for _, v in self.term_breakdown)
        if abs(total - self.value) > 1e-12 * max(1.0, abs(self.value)):
            raise ValueError("breakdown does not sum to value")
        if self.value < 0:
            raise ValueError("bound value must be nonnegative")

    def to_json(self, path=None) -> str:
        doc = {
            "theorem": self.theorem,
            "value": self.value,
            "term_breakdown": [{"term": t, "value": v} for t, v in self.term_breakdown],
        }
        text = json.dumps(doc, indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def _make(theorem: str, terms: list[tuple[str, float]]) -> BoundValue:
    return BoundValue(theorem, sum(v for _, v in terms), tuple(terms))


def theorem_1_1(
    stats: PairStatistics,
    law: LimitLaw,
    report: HypothesisReport,
    variant: str = "i",
) -> BoundValue:
    """Smooth-function bound, per unit ||h'||.

    Variant (i) uses c2 and E|r(W)|; variant (ii) uses c3 and the
    (|W| + 3/c1)-weighted remainder.
    """
    c1 = law.c1
    c0 = stats.c0
    if variant == "i":
        if not (report.c2 < float("inf")):
            raise ValueError("variant (i) needs a finite c2 (hypothesis H2)")
        c = report.c2
        terms = [
            ("lln", (1 + c) / c1 * stats.e_abs_one_minus_half_c0_d2),
            ("delta_cubed", 0.5 * c0 * (1 + c) * stats.e_abs_delta_cubed),
            ("remainder", c0 * c * stats.e_abs_r),
        ]
    elif variant == "ii":
        if not (report.c3 < float("inf")):
            raise ValueError("variant (ii) needs a finite c3 (hypothesis H3)")
        c = report.c3
        terms = [
            ("lln", (1 + c) / c1 * stats.e_abs_one_minus_half_c0_d2),
            ("delta_cubed", 0.5 * c0 * (1 + c) * stats.e_abs_delta_cubed),
            ("weighted_remainder", c0 / c1 * stats.e_weighted_r),
        ]
    else:
        raise ValueError("variant must be 'i' or 'ii'")
    return _make(f"theorem_1_1_{variant}", terms)


def theorem_1_1_best(
    stats: PairStatistics, law: LimitLaw, report: HypothesisReport
) -> BoundValue:
    """Minimum of the two variants, computed when both hypotheses hold."""
    candidates = []
    for variant in ("i", "ii"):
        try:
            candidates.append(theorem_1_1(stats, law, report, variant))
        except ValueError:
            pass
    if not candidates:
        raise ValueError("neither H2 nor H3 certified finite")
    return min(candidates, key=lambda b: b.value)


def theorem_1_2(
    stats: PairStatistics, law: LimitLaw, report: HypothesisReport
) -> BoundValue:
    """Kolmogorov-distance bound; needs the a.s. increment bound delta."""
    if stats.delta_max is None:
        raise ValueError("Kolmogorov bound needs delta_max (a.s. bound on |Delta|)")
    if not (report.c3 < float("inf")):
        raise ValueError("Kolmogorov bound needs a finite c3 (hypothesis H3)")
    c1 = law.c1
    c3 = report.c3
    c0 = stats.c0
    delta = stats.delta_max
    terms = [
        ("lln", 3 * stats.e_abs_one_minus_half_c0_d2),
        ("delta", c1 * max(1.0, c3) * delta),
        ("remainder", 2 * c0 * stats.e_abs_r / c1),
        ("delta_cubed",
         delta**3 * c0 * ((2 + c3 / 2) * stats.e_abs_c0g_W + c1 * c3 / 2)),
    ]
    return _make("theorem_1_2", terms)


def theorem_3_1(stats: PairStatistics, variant: str = "smooth") -> BoundValue:
    """Exponential-limit specialization (constant drift 1/c0).

    "smooth" is per unit ||h'||; "kolmogorov" is absolute and needs delta.
    """
    c0 = stats.c0
    if variant == "smooth":
        terms = [
            ("lln", stats.e_abs_one_minus_half_c0_d2),
            ("delta_cubed", c0 * stats.e_abs_delta_cubed),
            ("remainder", 3 * c0 * stats.e_abs_Wr),
        ]
    elif variant == "kolmogorov":
        if stats.delta_max is None:
            raise ValueError("Kolmogorov variant needs delta_max")
        terms = [
            ("lln", 3 * stats.e_abs_one_minus_half_c0_d2),
            ("delta", stats.delta_max),
            ("delta_cubed", 2 * c0 * stats.delta_max**3),
            ("remainder", 3 * c0 * stats.e_abs_Wr),
        ]
    else:
        raise ValueError("variant must be 'smooth' or 'kolmogorov'")
    return _make(f"theorem_3_1_{variant}", terms)
