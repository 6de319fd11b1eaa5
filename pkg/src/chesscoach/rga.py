"""Rationale generation for recommended and cautioned-against moves.

Pipeline: decompose the utility evaluation into Z-scored named factors,
optionally merge the expert domain factors (which always outrank utility
factors), sort, keep the top k, and render one template sentence per
factor. A proposed move landing in the bottom third of the ranked move
list triggers a cautionary rationale built from the position the move
would create.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Optional

from .calibration import CalibrationTable, zscore
from .core import Move, Position, apply_move, game_status, to_san
from .domain import DOMAIN_TIERS, DEFAULT_MATE_HORIZON, DomainFactor
from .evaluator import (
    DEFAULT_CONFIG, EvalConfig, ScoredMove, evaluate, mate_in,
)

DEFAULT_K = 2
CAUTION_THRESHOLD = Fraction(100, 3)
FALLBACK_FACTOR = "Caution"


class TemplateError(ValueError):
    pass


class RationaleError(ValueError):
    pass


@dataclass(frozen=True)
class Factor:
    """One merged decision factor, ready for ranking and rendering."""

    name: str
    weight: float  # perspective-adjusted z-score, or the domain tier
    sign: str      # 'positive' | 'negative'
    source: str    # 'utility' | 'domain'
    payload: Optional[object] = None

    def sort_key(self):
        band = 0 if self.source == "domain" else 1
        return (band, -abs(self.weight), self.name)


@dataclass(frozen=True)
class Rationale:
    polarity: str  # 'best-move' | 'cautionary'
    move_san: str
    factors: tuple
    lines: tuple
    template_version: int


class TemplateRegistry:
    """Versioned (factor, polarity) -> sentence map with named slots."""

    def __init__(self, version: int, templates: dict):
        self.version = version
        self.templates = templates

    @staticmethod
    def parse(text: str) -> "TemplateRegistry":
        version = None
        templates = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("version:"):
                version = int(line.split(":", 1)[1].strip())
                continue
            key, sep, template = line.partition(":")
            if not sep:
                raise TemplateError(f"line {lineno}: expected 'Factor+: text'")
            key = key.strip()
            if key[-1] not in "+-":
                raise TemplateError(f"line {lineno}: key must end with + or -")
            polarity = "positive" if key[-1] == "+" else "negative"
            templates[(key[:-1], polarity)] = template.strip()
        if version is None:
            raise TemplateError("missing 'version:' line")
        return TemplateRegistry(version, templates)

    @staticmethod
    def load_file(path: str) -> "TemplateRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            return TemplateRegistry.parse(fh.read())

    @staticmethod
    def load_default() -> "TemplateRegistry":
        text = (resources.files("chesscoach") / "data" / "rationale_templates_v1.txt").read_text("utf-8")
        return TemplateRegistry.parse(text)

    def render(self, factor: Factor, move_san: str) -> str:
        key = (factor.name, factor.sign)
        if key not in self.templates:
            raise TemplateError(f"no template for {key}")
        slots = {"move": move_san, "n": "", "piece": ""}
        if factor.name == "MateSoon":
            slots["n"] = str(factor.payload)
        elif factor.name == "CaptureNextMove":
            slots["piece"] = str(factor.payload or "piece")
        return self.templates[key].format(**slots)


_DEFAULT_TEMPLATES: Optional[TemplateRegistry] = None


def default_templates() -> TemplateRegistry:
    global _DEFAULT_TEMPLATES
    if _DEFAULT_TEMPLATES is None:
        _DEFAULT_TEMPLATES = TemplateRegistry.load_default()
    return _DEFAULT_TEMPLATES


@dataclass(frozen=True)
class RGAConfig:
    k: int = DEFAULT_K
    caution_threshold: Fraction = CAUTION_THRESHOLD
    mate_horizon: int = DEFAULT_MATE_HORIZON
    templates: TemplateRegistry = field(default_factory=default_templates)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


# ---------------------------------------------------------------------------
# Algorithm steps
# ---------------------------------------------------------------------------

def decompose_utility(factors: dict, table: CalibrationTable,
                      perspective: str) -> list["Factor"]:
    """Z-score the raw factor weights and orient them for the acting player.

    White-relative z-scores are negated for black so that a positive weight
    always argues for the mover; zero counts as positive.
    """
    flip = -1.0 if perspective == "black" else 1.0
    out = []
    for nf in zscore(factors, table):
        weight = flip * nf.z
        out.append(Factor(
            name=nf.name,
            weight=weight,
            sign="positive" if weight >= 0 else "negative",
            source="utility",
        ))
    return out


def from_domain(dom: list[DomainFactor], sign: str = "positive") -> list[Factor]:
    return [
        Factor(name=d.name, weight=float(d.tier), sign=sign, source="domain",
               payload=d.payload)
        for d in dom
    ]


def merge_and_rank(util: list[Factor], dom: list[Factor]) -> list[Factor]:
    """Domain factors first (by tier), then utility by |z| descending,
    names breaking ties."""
    return sorted(list(dom) + list(util), key=Factor.sort_key)


def generate_rationale(factors: dict, move: Move,
                       dom: Optional[list[DomainFactor]],
                       cfg: RGAConfig, table: CalibrationTable,
                       p: Position) -> Rationale:
    """Best-move rationale from the top-k merged factors.

    Passing dom=None selects the utility-only variant; a (possibly empty)
    domain list selects the merged variant.
    """
    util = decompose_utility(factors, table, p.side_to_move)
    merged = merge_and_rank(util, from_domain(dom) if dom else [])
    top = tuple(merged[:cfg.k])
    san = to_san(p, move)
    lines = tuple(cfg.templates.render(f, san) for f in top)
    return Rationale(
        polarity="best-move",
        move_san=san,
        factors=top,
        lines=lines,
        template_version=cfg.templates.version,
    )


def percentile_of(ranking: list[ScoredMove], move: Move) -> Fraction:
    """Percentile rank (0..100) of a move in the ascending ranked list,
    mid-rank for tied scores; a single-move list counts as 100."""
    matches = [i for i, sm in enumerate(ranking)
               if sm.move.from_square == move.from_square
               and sm.move.to_square == move.to_square
               and sm.move.promotion == move.promotion]
    if not matches:
        raise RationaleError(f"move {move.uci()} not present in ranking")
    n = len(ranking)
    if n == 1:
        return Fraction(100)
    i = matches[0]
    score = ranking[i].score
    lo = i
    while lo > 0 and ranking[lo - 1].score == score:
        lo -= 1
    hi = i
    while hi < n - 1 and ranking[hi + 1].score == score:
        hi += 1
    k = Fraction(lo + hi + 2, 2)  # 1-based mid-rank
    return 100 * (k - 1) / (n - 1)


def detect_non_optimal(ranking: list[ScoredMove], proposed: Move,
                       cfg: RGAConfig) -> bool:
    """True when the proposal falls in the bottom third of the ranked list."""
    return percentile_of(ranking, proposed) < cfg.caution_threshold


def generate_cautionary(p: Position, proposed: Move, cfg: RGAConfig,
                        table: CalibrationTable,
                        eval_config: EvalConfig = DEFAULT_CONFIG) -> Rationale:
    """Cautionary rationale from the position the proposed move creates.

    Factors are the top-k negative-sign factors for the mover after the
    move, with an opponent forced mate reported as a domain factor. When
    nothing negative stands out a generic caution line is rendered.
    """
    mover = p.side_to_move
    after = apply_move(p, proposed)
    negatives: list[Factor] = []
    dom: list[Factor] = []
    if not game_status(after).is_over:
        _, factors = evaluate(after, eval_config)
        negatives = [f for f in decompose_utility(factors, table, mover)
                     if f.sign == "negative"]
        opp_mate = mate_in(after, cfg.mate_horizon)
        if opp_mate is not None:
            dom = [Factor(name="MateSoon", weight=float(DOMAIN_TIERS["MateSoon"]),
                          sign="negative", source="domain", payload=opp_mate)]
    top = tuple(merge_and_rank(negatives, dom)[:cfg.k])
    san = to_san(p, proposed)
    if top:
        lines = tuple(cfg.templates.render(f, san) for f in top)
    else:
        lines = (cfg.templates.render(
            Factor(FALLBACK_FACTOR, 0.0, "negative", "utility"), san),)
    return Rationale(
        polarity="cautionary",
        move_san=san,
        factors=top,
        lines=lines,
        template_version=cfg.templates.version,
    )
