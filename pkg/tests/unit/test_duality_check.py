"""Unit tests for market optimality certificates."""

from dataclasses import replace

import numpy as np
import pytest

from src.duality_check import (
    MissingDualsError,
    certify,
    dual_objective,
    linearization_residual,
    primal_objective,
    strong_duality_gap,
)
from src.lp_market import ExpansionPlan, Selection, solve_wsm
from src.solver_iface import SolveStatus

pytestmark = pytest.mark.unit


@pytest.fixture
def toy_outcome(toy_case, solver_settings):
    """Toy market cleared with 4 MW built in year 2."""
    return solve_wsm(toy_case, ExpansionPlan((Selection(1, 2, 3),)), solver_settings)


class TestCertificate:
    """Test cases for the duality certificate."""

    def test_optimal_outcome_passes(self, toy_case, toy_outcome):
        """Test a solver outcome passes every check."""
        certificate = certify(toy_outcome, toy_case)

        assert certificate.passed
        assert certificate.worst_scaled <= 1e-5

    def test_congested_outcome_passes(self, congested_case, solver_settings):
        """Test the congested two-bus market passes."""
        outcome = solve_wsm(congested_case, ExpansionPlan.empty(), solver_settings)

        assert certify(outcome, congested_case).passed

    def test_primal_equals_dual(self, toy_case, toy_outcome):
        """Test welfare equals the dual objective at the optimum."""
        assert primal_objective(toy_outcome, toy_case) == pytest.approx(
            dual_objective(toy_outcome, toy_case, toy_outcome.plan), abs=1e-6)
        assert strong_duality_gap(toy_outcome, toy_case, toy_outcome.plan) <= 1e-6

    def test_price_quantity_identities(self, toy_case, toy_outcome):
        """Test surplus identities hold at the optimum."""
        assert linearization_residual(toy_outcome, toy_case) <= 1e-6

    def test_perturbed_prices_fail(self, toy_case, toy_outcome):
        """Test shifted nodal prices break dual feasibility."""
        shifted = replace(toy_outcome, prices=toy_outcome.prices + np.array([[0.0, 0.0], [0.0, 5.0]]))

        certificate = certify(shifted, toy_case)

        assert not certificate.passed
        assert certificate.dual_feasibility_residual > 1.0

    def test_non_optimal_outcome(self, toy_case, toy_outcome):
        """Test an outcome without duals cannot be certified."""
        with pytest.raises(MissingDualsError):
            certify(replace(toy_outcome, status=SolveStatus.INFEASIBLE), toy_case)

    def test_to_dict(self, toy_case, toy_outcome):
        """Test the certificate export lists residuals, scale and verdict."""
        data = certify(toy_outcome, toy_case).to_dict()

        assert set(data) == {
            'dual_feasibility', 'strong_duality_gap', 'complementarity',
            'linearization', 'scale', 'pass'}
        assert data['pass'] is True
