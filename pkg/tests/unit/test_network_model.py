"""Unit tests for case studies, generators and case files."""

import json
from pathlib import Path

import pytest

from src.network_model import (
    CaseIOError,
    CaseParseError,
    CaseValidationError,
    build_index,
    case_from_dict,
    case_to_dict,
    generate_garver_case,
    generate_two_node_case,
    load_case,
    lump_stride,
    max_bid_price,
    save_case,
    with_policy,
)

pytestmark = pytest.mark.unit


class TestCaseStudy:
    """Test cases for the case data model."""

    def test_reference_node_is_first(self, toy_case):
        """Test the first node is the reference node."""
        assert toy_case.reference_node == 1

    def test_max_bid_price(self, toy_case):
        """Test the largest bid price over both sides."""
        assert max_bid_price(toy_case) == 60.0

    def test_bid_counts(self, toy_case):
        """Test bids are counted per slice and side."""
        assert toy_case.bid_counts() == {(1, 1): (3, 3), (2, 1): (3, 3)}

    def test_discount_factor(self):
        """Test the present-value factor of a year."""
        from tests.conftest import make_toy_case

        case = make_toy_case(discount_rate=0.1)
        assert case.horizon.discount(1) == 1.0
        assert case.horizon.discount(3) == pytest.approx(1 / 1.21)

    def test_big_m_below_bid_rejected(self, toy_case):
        """Test a document whose M is below a bid price is refused."""
        data = case_to_dict(toy_case)
        data['policy']['big_m'] = 10.0

        with pytest.raises(CaseValidationError):
            case_from_dict(data)

    def test_unsorted_lumps_rejected(self, toy_case):
        """Test lump menus must increase strictly."""
        data = case_to_dict(toy_case)
        data['lines'][0]['lumps'] = [2.0, 1.0]

        with pytest.raises(CaseValidationError) as exc_info:
            case_from_dict(data)
        assert exc_info.value.field.startswith('lines')

    def test_unknown_node_rejected(self, toy_case):
        """Test a bid on a missing node is refused."""
        data = case_to_dict(toy_case)
        data['bids'][0]['node'] = 9

        with pytest.raises(CaseValidationError):
            case_from_dict(data)

    def test_with_policy_returns_new_case(self, toy_case):
        """Test policy changes leave the source case untouched."""
        changed = with_policy(toy_case, kappa=0.3)

        assert changed.policy.kappa == 0.3
        assert toy_case.policy.kappa == 1.0

    def test_with_policy_non_strict_allows_small_m(self, toy_case):
        """Test a deliberately undersized M can be built without validation."""
        changed = with_policy(toy_case, big_m=5.0, strict=False)
        assert changed.policy.big_m == 5.0


class TestLumpStride:
    """Test cases for lump menu coarsening."""

    def test_keeps_every_kth_and_largest(self, toy_case):
        """Test stride 2 keeps sizes 2 and 4 plus the largest."""
        coarse = lump_stride(toy_case, 2)

        assert coarse.lines[0].lumps == (2.0, 4.0, 5.0)
        assert coarse.provenance.parameters['lump_stride'] == 2

    def test_stride_one_is_identity(self, toy_case):
        """Test stride 1 returns the case unchanged."""
        assert lump_stride(toy_case, 1) is toy_case

    def test_invalid_stride(self, toy_case):
        """Test a stride below one is refused."""
        with pytest.raises(ValueError):
            lump_stride(toy_case, 0)


class TestCaseIndex:
    """Test cases for the array view of a case."""

    def test_shapes(self, toy_case):
        """Test sizes and slice grouping of the toy case."""
        index = build_index(toy_case)

        assert index.n_nodes == 2
        assert index.n_lines == 1
        assert index.n_bids == 12
        assert index.time_slices == ((1, 1), (2, 1))
        assert [len(bids) for bids in index.slice_bids] == [6, 6]

    def test_incidence(self, toy_case):
        """Test the sending node gets +1 and the receiving node -1."""
        assert build_index(toy_case).incidence().tolist() == [[1.0], [-1.0]]


class TestGenerators:
    """Test cases for the seeded case generators."""

    def test_two_node_is_deterministic(self):
        """Test the same seed gives the same case."""
        overrides = {'n_generators': 5, 'n_consumers': 5}

        first = generate_two_node_case(42, overrides)
        second = generate_two_node_case(42, overrides)

        assert case_to_dict(first) == case_to_dict(second)
        assert first.provenance.generator == 'two_node'
        assert first.provenance.seed == 42

    def test_two_node_seeds_differ(self):
        """Test different seeds give different bids."""
        overrides = {'n_generators': 5, 'n_consumers': 5}

        assert (generate_two_node_case(1, overrides).bids
                != generate_two_node_case(2, overrides).bids)

    def test_two_node_layout(self):
        """Test generators sit on node 1 and consumers on node 2 in every year."""
        case = generate_two_node_case(7, {'n_generators': 4, 'n_consumers': 3})

        assert {bid.node for bid in case.bids if bid.is_generator} == {1}
        assert {bid.node for bid in case.bids if not bid.is_generator} == {2}
        assert len(case.bids) == 2 * (4 + 3)
        assert case.lines[0].existing_capacity == 0.0

    def test_unknown_override(self):
        """Test an unknown override key is refused."""
        with pytest.raises(CaseValidationError) as exc_info:
            generate_two_node_case(1, {'bogus': 3})
        assert exc_info.value.field == 'bogus'

    def test_garver_agents_per_node(self):
        """Test the Garver case scales with the agents per node."""
        case = generate_garver_case(7, {'agents_per_node': 2})

        assert len(case.nodes) == 6
        generators = [bid for bid in case.bids if bid.is_generator and bid.year == 1]
        consumers = [bid for bid in case.bids if not bid.is_generator and bid.year == 1]
        assert len(generators) == 3 * 2
        assert len(consumers) == 5 * 2

    def test_garver_scales_network_with_population(self):
        """Test ratings, lumps and fixed costs shrink with the agents per node."""
        case = generate_garver_case(7, {'agents_per_node': 20})

        ratings = {line.id: line.existing_capacity for line in case.lines}
        assert ratings[1] == pytest.approx(2.0)
        assert ratings[2] == pytest.approx(1.6)
        assert ratings[7] == 0.0
        assert case.lines[0].lumps[0] == pytest.approx(0.02)
        assert case.lines[0].lumps[-1] == pytest.approx(8.0)
        assert case.lines[0].fixed_cost == pytest.approx(2.0)
        assert case.lines[0].variable_cost == 5.0
        assert case.provenance.parameters['capacity_scale'] == pytest.approx(0.02)

    def test_garver_capacity_scale_override(self):
        """Test an explicit scale keeps the full-size ratings."""
        case = generate_garver_case(7, {'agents_per_node': 2, 'capacity_scale': 1.0})

        assert case.lines[0].existing_capacity == 100.0
        assert case.lines[0].lumps[-1] == 400.0
        assert case.provenance.parameters['capacity_scale'] == 1.0

    def test_garver_rejects_nonpositive_scale(self):
        """Test a zero scale is refused."""
        with pytest.raises(CaseValidationError) as exc_info:
            generate_garver_case(7, {'agents_per_node': 2, 'capacity_scale': 0.0})
        assert exc_info.value.field == 'capacity_scale'


class TestGeneratorProperties:
    """Invariants of generated cases over many seeds."""

    @pytest.mark.parametrize('seed', range(100))
    def test_two_node_bids_within_bounds(self, seed):
        """Test every generated bid has 0 = q_min <= q_max <= the draw ceiling."""
        case = generate_two_node_case(seed, {'n_generators': 10, 'n_consumers': 10})

        assert all(bid.q_min == 0.0 <= bid.q_max <= 10.0 for bid in case.bids)
        assert all(a < b for line in case.lines for a, b in zip(line.lumps, line.lumps[1:]))
        assert case_from_dict(case_to_dict(case)) == case

    @pytest.mark.parametrize('seed', range(0, 100, 5))
    def test_garver_load_growth(self, seed):
        """Test every consumer's year-2 bound is 1.05 times its year-1 bound."""
        case = generate_garver_case(seed, {'agents_per_node': 3})
        consumers = {
            year: [bid for bid in case.bids if not bid.is_generator and bid.year == year]
            for year in (1, 2)
        }

        assert len(consumers[1]) == len(consumers[2]) == 15
        for first, second in zip(consumers[1], consumers[2]):
            assert first.node == second.node
            assert first.price == second.price
            assert second.q_max == pytest.approx(1.05 * first.q_max)
        generators = [bid for bid in case.bids if bid.is_generator]
        assert all(0.0 <= bid.q_max <= (1.0 if bid.node == 6 else 0.5) for bid in generators)


class TestCaseFiles:
    """Test cases for reading and writing case files."""

    def test_save_and_load(self, toy_case, temp_directory):
        """Test a saved case loads back equal."""
        path = save_case(toy_case, Path(temp_directory) / 'cases' / 'toy.json')

        assert load_case(path) == toy_case

    def test_serialized_aliases(self, toy_case):
        """Test lines serialize with from/to/capacity keys."""
        line = case_to_dict(toy_case)['lines'][0]

        assert line['from'] == 1
        assert line['to'] == 2
        assert line['capacity'] == 0.0
        assert line['k_fix'] == 2.0

    def test_missing_file(self, temp_directory):
        """Test a missing file raises an I/O error."""
        with pytest.raises(CaseIOError):
            load_case(Path(temp_directory) / 'missing.json')

    def test_malformed_file(self, temp_directory):
        """Test invalid JSON raises a parse error."""
        path = Path(temp_directory) / 'bad.json'
        path.write_text('{not json', encoding='utf-8')

        with pytest.raises(CaseParseError):
            load_case(path)

    def test_non_object_document(self, temp_directory):
        """Test a JSON array is not a case."""
        path = Path(temp_directory) / 'list.json'
        path.write_text(json.dumps([1, 2]), encoding='utf-8')

        with pytest.raises(CaseParseError):
            load_case(path)
