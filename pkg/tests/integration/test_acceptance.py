"""End-to-end checks on seeded generated cases."""

import numpy as np
import pytest

from src.analysis import parse_grid, participant_optimal_kappa, summary_rows, sweep_kappa
from src.duality_check import certify
from src.lp_market import ExpansionPlan, Selection, solve_wsm
from src.milp_reform import envelope_audit, solve_planning
from src.network_model import generate_garver_case, generate_two_node_case, lump_stride
from src.oracle import brute_force, count_plans

pytestmark = [pytest.mark.integration, pytest.mark.slow]

RANDOM_TOY_CASES = 50


def tolerance(value: float) -> float:
    return 1e-5 * (1.0 + abs(value))


def random_toy_case(seed: int):
    """Three generators and three consumers over one line with a random existing rating."""
    rng = np.random.default_rng(seed)
    return generate_two_node_case(seed, {
        'n_generators': 3,
        'n_consumers': 3,
        'lumps': (1.0, 2.0, 3.0, 4.0, 5.0),
        'psi': 1.0,
        'discount_rate': 0.0,
        'k_fix': 2.0,
        'k_var': 1.0,
        'existing_capacity': float(rng.choice([0.0, 1.0, 2.5])),
    })


@pytest.fixture(scope='module')
def two_node_replica():
    """Seed-42 two-node market, 50 agents per side, lumps every 5 MW."""
    return lump_stride(generate_two_node_case(42), 5)


@pytest.fixture(scope='module')
def two_node_sweep(two_node_replica):
    return sweep_kappa(two_node_replica, parse_grid('0:1:0.1'), parallelism=4)


@pytest.fixture(scope='module')
def small_two_node_case():
    """Seeded two-node market, five agents per side, lumps every 40 MW."""
    case = generate_two_node_case(42, {'n_generators': 5, 'n_consumers': 5})
    return lump_stride(case, 40)


@pytest.fixture(scope='module')
def small_garver_case():
    """Seeded Garver network, one agent per node, one lump per line."""
    return lump_stride(generate_garver_case(7, {'agents_per_node': 1}), 400)


@pytest.fixture(scope='module')
def garver_sweep():
    """Garver network with 20 agents per node, lumps every 20 steps, quarter-step grid."""
    case = lump_stride(generate_garver_case(7, {'agents_per_node': 20}), 20)
    return sweep_kappa(case, parse_grid('0:1:0.25'), parallelism=4)


class TestTwoNodeReplica:
    """Welfare, benefits and expansion across kappa on the full two-node market."""

    def test_every_row_certified(self, two_node_sweep):
        """Test all eleven grid points solve and satisfy SW = TP + benefits."""
        assert len(two_node_sweep.rows) == 11
        assert all(row.ok for row in two_node_sweep.rows)
        for row in two_node_sweep.rows:
            assert row.identity_residual() <= 1e-6

    def test_welfare_peaks_at_full_incentive(self, two_node_sweep):
        """Test SW is largest at kappa = 1 and kappa = 1 builds at least as much as kappa = 0."""
        at_zero, at_one = two_node_sweep.row_at(0.0), two_node_sweep.row_at(1.0)
        top = max(row.social_welfare for row in two_node_sweep.rows)

        assert at_one.social_welfare >= top - tolerance(top)
        assert at_one.total_expansion >= at_zero.total_expansion - 1e-6

    def test_participants_prefer_interior_kappa(self, two_node_sweep):
        """Test benefits peak strictly inside the grid and vanish at kappa = 1."""
        kappa_star, star = participant_optimal_kappa(two_node_sweep)
        at_zero, at_one = two_node_sweep.row_at(0.0), two_node_sweep.row_at(1.0)

        assert 0.0 < kappa_star < 1.0
        assert star.participant_benefits > at_zero.participant_benefits > 0.0
        assert at_one.participant_benefits == pytest.approx(0.0, abs=tolerance(at_one.social_welfare))
        assert at_zero.fee_total == pytest.approx(0.0, abs=1e-6)

    def test_merchandising_motive_builds(self, two_node_sweep):
        """Test the Transco expands the empty corridor even without a fee."""
        assert two_node_sweep.row_at(0.0).total_expansion > 0.0


class TestRandomToyCertificates:
    """Certificates on many small random markets."""

    @pytest.mark.parametrize('seed', range(RANDOM_TOY_CASES))
    def test_market_and_planning_certified(self, seed):
        """Test market and planning solutions pass every optimality certificate."""
        case = random_toy_case(seed)
        rng = np.random.default_rng(1000 + seed)
        lump = int(rng.integers(0, 5))

        for plan in (ExpansionPlan.empty(), ExpansionPlan((Selection(1, 2, lump),))):
            outcome = solve_wsm(case, plan)
            assert certify(outcome, case, plan).passed
        solution = solve_planning(case, float(rng.choice([0.0, 0.5, 1.0])))
        assert solution.certified


class TestTwoNodeAcceptance:
    """Planning against the oracle on the reduced two-node market."""

    def test_sweep(self, small_two_node_case, solver_settings):
        """Test welfare peaks at kappa = 1 where participants keep nothing extra."""
        table = sweep_kappa(small_two_node_case, [0.0, 0.5, 1.0], settings=solver_settings)

        assert all(row.ok for row in table.rows)
        at_one = table.row_at(1.0)
        top = max(row.social_welfare for row in table.rows)
        assert at_one.social_welfare >= top - tolerance(top)
        assert at_one.participant_benefits == pytest.approx(0.0, abs=tolerance(top))
        assert table.row_at(0.0).fee_total == pytest.approx(0.0, abs=1e-6)
        for row in table.rows:
            assert row.identity_residual() <= 1e-6

    def test_matches_oracle(self, small_two_node_case, solver_settings):
        """Test the MILP objective equals the brute-force best."""
        solution = solve_planning(small_two_node_case, 0.5, solver_settings)
        oracle = brute_force(small_two_node_case, 0.5, refine_ties=True, settings=solver_settings)

        assert solution.certified
        assert not envelope_audit(solution, small_two_node_case, solver_settings).flagged
        assert solution.objective == pytest.approx(oracle.best_profit, rel=1e-5, abs=1e-5)


class TestGarverAcceptance:
    """Planning on the meshed six-node network."""

    def test_plan_space(self, small_garver_case):
        """Test one lump per line leaves two options per line."""
        assert count_plans(small_garver_case) == 2 ** len(small_garver_case.lines)

    def test_matches_oracle(self, small_garver_case, solver_settings):
        """Test the MILP objective equals the brute-force best on the meshed network."""
        solution = solve_planning(small_garver_case, 1.0, solver_settings)
        oracle = brute_force(
            small_garver_case, 1.0, refine_ties=True, parallelism=4, settings=solver_settings)

        assert solution.certified
        assert solution.objective == pytest.approx(oracle.best_profit, rel=1e-5, abs=1e-5)

    def test_desk_scale_sweep_expands(self, garver_sweep):
        """Test every row certifies and the congested network gets new capacity."""
        assert len(garver_sweep.rows) == 5
        assert all(row.ok for row in garver_sweep.rows)
        assert any(row.total_expansion > 0.0 for row in garver_sweep.rows)
        for row in garver_sweep.rows:
            assert row.identity_residual() <= 1e-6

    def test_desk_scale_summary(self, garver_sweep):
        """Test the summary has the kappa = 1, kappa* and kappa = 0 rows."""
        labels = [label for label, _ in summary_rows(garver_sweep)]

        assert labels == ['kappa=1', 'kappa*', 'kappa=0']
        top = max(row.social_welfare for row in garver_sweep.rows)
        assert garver_sweep.row_at(1.0).social_welfare >= top - tolerance(top)
