"""Incentive fee trajectory and discounted stakeholder accounting."""

from dataclasses import dataclass
from typing import Dict, Mapping

from src.lp_market import ExpansionPlan, SurplusReport
from src.network_model import CaseStudy


@dataclass(frozen=True)
class FeeTrajectory:
    """Incentive fee paid to the Transco in each year.

    ``fees[1]`` is always zero; afterwards the fee moves by ``kappa * psi``
    times the change of the hourly participant surplus.
    """
    kappa: float
    fees: Dict[int, float]

    @classmethod
    def from_surplus(
        cls, surplus: Mapping[int, float], kappa: float, psi: float
    ) -> 'FeeTrajectory':
        """Apply the fee recursion to hourly participant surpluses per year."""
        years = sorted(surplus)
        fees = {years[0]: 0.0}
        for prev, year in zip(years, years[1:]):
            fees[year] = fees[prev] + kappa * psi * (surplus[year] - surplus[prev])
        return cls(kappa=kappa, fees=fees)

    @classmethod
    def from_report(cls, report: SurplusReport, kappa: float) -> 'FeeTrajectory':
        surplus = {t: report.participant_surplus(t) for t in report.years}
        return cls.from_surplus(surplus, kappa, report.psi)

    def __getitem__(self, year: int) -> float:
        return self.fees[year]

    @property
    def total(self) -> float:
        """Undiscounted sum over the horizon."""
        return float(sum(self.fees.values()))

    def discounted_total(self, case: CaseStudy) -> float:
        return float(sum(case.horizon.discount(t) * fee for t, fee in self.fees.items()))

    def recursion_residual(self, surplus: Mapping[int, float], psi: float) -> float:
        """Largest violation of ``fee_1 = 0`` and the year-on-year recursion."""
        years = sorted(self.fees)
        worst = abs(self.fees[years[0]])
        for prev, year in zip(years, years[1:]):
            step = self.fees[year] - self.fees[prev]
            worst = max(worst, abs(step - self.kappa * psi * (surplus[year] - surplus[prev])))
        return worst

    def to_dict(self) -> Dict[str, float]:
        return {str(t): fee for t, fee in sorted(self.fees.items())}


@dataclass(frozen=True)
class ProfitBreakdown:
    """Discounted totals for one plan.

    ``social_welfare == transco_profit + participant_benefits`` up to
    rounding.
    """
    transco_profit: float
    social_welfare: float
    participant_benefits: float
    fee_total: float
    ms_total: float
    cost_total: float
    change_in_surplus: float


def profit_breakdown(
    case: CaseStudy, plan: ExpansionPlan, report: SurplusReport, fee: FeeTrajectory
) -> ProfitBreakdown:
    """Discounted Transco profit, welfare and participant benefits.

    Hourly quantities are scaled by psi; investment cost is charged in the
    year the line is built. ``change_in_surplus`` is undiscounted and
    measured against year 1.
    """
    psi = report.psi
    costs = plan.cost_per_hour(case)
    first = report.years[0]
    ms_total = fee_total = cost_total = retained = 0.0
    for t in report.years:
        delta = case.horizon.discount(t)
        ms_total += delta * psi * report.merchandising_surplus[t]
        fee_total += delta * fee[t]
        cost_total += delta * psi * costs[t]
        retained += delta * psi * report.participant_surplus(t)

    transco_profit = ms_total + fee_total - cost_total
    participant_benefits = retained - fee_total
    change = sum(
        psi * (report.participant_surplus(t) - report.participant_surplus(first))
        for t in report.years[1:]
    )
    return ProfitBreakdown(
        transco_profit=transco_profit,
        social_welfare=ms_total + retained - cost_total,
        participant_benefits=participant_benefits,
        fee_total=fee_total,
        ms_total=ms_total,
        cost_total=cost_total,
        change_in_surplus=float(change),
    )
