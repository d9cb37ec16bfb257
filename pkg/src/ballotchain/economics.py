"""Election cost model and the internet-penetration feasibility rule.

All money is integer currency units. Equipment figures are quoted per
100,000,000 voters and scaled multiply-then-divide so the totals stay exact
for any elector base that divides evenly; fractional remainders floor.
"""

from __future__ import annotations

from dataclasses import dataclass

VOTER_BASE = 100_000_000
FEASIBILITY_THRESHOLD_PCT = 90.0
MAX_BREAKEVEN_CYCLES = 1000


@dataclass(frozen=True)
class CostParams:
    voters: int
    dev_cost: int = 4_000_000
    first_cycle_equipment: int = 100_000_010   # per 100,000,000 voters
    subsequent_cycle_cost: int = 50_000_010    # per 100,000,000 voters
    paper_ballot_per_voter: int = 2

    def __post_init__(self):
        if self.voters <= 0:
            raise ValueError("voters must be positive")
        for name in ("dev_cost", "first_cycle_equipment",
                     "subsequent_cycle_cost", "paper_ballot_per_voter"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class CostReport:
    first_cycle_total: int
    subsequent_cycle_total: int
    per_voter_first: float
    per_voter_subsequent: float
    paper_ballot_total: int
    breakeven_cycle: int | None

    def to_dict(self) -> dict:
        return {
            "first_cycle_total": self.first_cycle_total,
            "subsequent_cycle_total": self.subsequent_cycle_total,
            "per_voter_first": self.per_voter_first,
            "per_voter_subsequent": self.per_voter_subsequent,
            "paper_ballot_total": self.paper_ballot_total,
            "breakeven_cycle": self.breakeven_cycle,
        }


def scale_to_voters(amount_per_base: int, voters: int) -> int:
    return amount_per_base * voters // VOTER_BASE


def cost_estimate(params: CostParams) -> CostReport:
    equipment = scale_to_voters(params.first_cycle_equipment, params.voters)
    subsequent = scale_to_voters(params.subsequent_cycle_cost, params.voters)
    first_total = params.dev_cost + equipment
    ballots = params.voters * params.paper_ballot_per_voter

    breakeven = None
    proposed_cumulative = 0
    ballot_cumulative = 0
    for cycle in range(1, MAX_BREAKEVEN_CYCLES + 1):
        proposed_cumulative += first_total if cycle == 1 else subsequent
        ballot_cumulative += ballots
        if proposed_cumulative < ballot_cumulative:
            breakeven = cycle
            break

    return CostReport(
        first_cycle_total=first_total,
        subsequent_cycle_total=subsequent,
        per_voter_first=first_total / params.voters,
        per_voter_subsequent=subsequent / params.voters,
        paper_ballot_total=ballots,
        breakeven_cycle=breakeven,
    )


def feasibility(internet_penetration_pct: float) -> bool:
    """An online rollout is viable only with near-universal connectivity."""
    pct = float(internet_penetration_pct)
    if not 0.0 <= pct <= 100.0:
        raise ValueError(f"penetration {pct} outside [0, 100]")
    return pct >= FEASIBILITY_THRESHOLD_PCT


def feasibility_verdict(internet_penetration_pct: float) -> str:
    return "Feasible" if feasibility(internet_penetration_pct) else "Infeasible"
