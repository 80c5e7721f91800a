"""Unit tests for the incentive fee and stakeholder accounting."""

import pytest

from src.lp_market import ExpansionPlan, Selection, SurplusReport
from src.milp_reform import FeeTrajectory, profit_breakdown
from tests.conftest import make_toy_case

pytestmark = pytest.mark.unit


def four_mw_report() -> SurplusReport:
    """Surpluses of the toy case with 4 MW built in year 2."""
    return SurplusReport(
        years=(1, 2),
        psi=1.0,
        load_surplus={1: 0.0, 2: 33.0},
        generator_surplus={1: 0.0, 2: 25.0},
        merchandising_surplus={1: 0.0, 2: 100.0},
    )


class TestFeeTrajectory:
    """Test cases for the fee recursion."""

    def test_recursion(self):
        """Test fees move by kappa * psi times the surplus change."""
        fee = FeeTrajectory.from_surplus({1: 10.0, 2: 30.0, 3: 25.0}, kappa=0.5, psi=2.0)

        assert fee.fees == {1: 0.0, 2: 20.0, 3: 15.0}
        assert fee[2] == 20.0
        assert fee.total == 35.0
        assert fee.recursion_residual({1: 10.0, 2: 30.0, 3: 25.0}, psi=2.0) == 0.0

    def test_zero_kappa(self):
        """Test no fee is paid with kappa = 0."""
        fee = FeeTrajectory.from_surplus({1: 0.0, 2: 50.0}, kappa=0.0, psi=1.0)
        assert fee.total == 0.0

    def test_residual_detects_first_year_fee(self):
        """Test a nonzero first-year fee shows in the residual."""
        fee = FeeTrajectory(kappa=1.0, fees={1: 3.0, 2: 3.0})
        assert fee.recursion_residual({1: 0.0, 2: 0.0}, psi=1.0) == 3.0

    def test_discounted_total(self):
        """Test fees are discounted by year."""
        case = make_toy_case(discount_rate=0.25)
        fee = FeeTrajectory(kappa=1.0, fees={1: 0.0, 2: 10.0})

        assert fee.discounted_total(case) == pytest.approx(8.0)

    def test_from_report(self):
        """Test the fee follows the participant surplus of a report."""
        fee = FeeTrajectory.from_report(four_mw_report(), kappa=0.5)
        assert fee.fees == {1: 0.0, 2: 29.0}

    def test_to_dict(self):
        """Test years become string keys."""
        assert FeeTrajectory(kappa=0.0, fees={1: 0.0, 2: 0.0}).to_dict() == {'1': 0.0, '2': 0.0}


class TestProfitBreakdown:
    """Test cases for discounted profit, welfare and benefits."""

    @pytest.mark.parametrize('kappa, profit, benefits', [
        (0.0, 94.0, 58.0),
        (0.5, 123.0, 29.0),
        (1.0, 152.0, 0.0),
    ])
    def test_toy_four_mw(self, kappa, profit, benefits):
        """Test hand-computed values of the 4 MW toy plan."""
        case = make_toy_case(kappa)
        plan = ExpansionPlan((Selection(1, 2, 3),))
        report = four_mw_report()

        breakdown = profit_breakdown(case, plan, report, FeeTrajectory.from_report(report, kappa))

        assert breakdown.transco_profit == pytest.approx(profit)
        assert breakdown.participant_benefits == pytest.approx(benefits)
        assert breakdown.social_welfare == pytest.approx(152.0)
        assert breakdown.ms_total == pytest.approx(100.0)
        assert breakdown.cost_total == pytest.approx(6.0)
        assert breakdown.change_in_surplus == pytest.approx(58.0)
        assert breakdown.fee_total == pytest.approx(kappa * 58.0)

    def test_welfare_identity_with_discounting(self):
        """Test SW = TP + benefits with a discount rate and a year-1 surplus."""
        case = make_toy_case(0.3, discount_rate=0.1)
        plan = ExpansionPlan((Selection(1, 2, 1),))
        report = SurplusReport(
            years=(1, 2), psi=1.0,
            load_surplus={1: 4.0, 2: 9.0},
            generator_surplus={1: 1.0, 2: 6.0},
            merchandising_surplus={1: 2.0, 2: 40.0},
        )

        breakdown = profit_breakdown(case, plan, report, FeeTrajectory.from_report(report, 0.3))

        assert breakdown.social_welfare == pytest.approx(
            breakdown.transco_profit + breakdown.participant_benefits)
        assert breakdown.change_in_surplus == pytest.approx(10.0)
        assert breakdown.fee_total == pytest.approx(0.3 * 10.0 / 1.1)

    def test_empty_plan(self):
        """Test no expansion and no trade gives zero profit."""
        case = make_toy_case(0.5)
        report = SurplusReport(
            years=(1, 2), psi=1.0,
            load_surplus={1: 0.0, 2: 0.0},
            generator_surplus={1: 0.0, 2: 0.0},
            merchandising_surplus={1: 0.0, 2: 0.0},
        )

        breakdown = profit_breakdown(
            case, ExpansionPlan.empty(), report, FeeTrajectory.from_report(report, 0.5))

        assert breakdown.transco_profit == 0.0
        assert breakdown.social_welfare == 0.0
