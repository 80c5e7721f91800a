"""Integration tests for the command-line surface and its exit codes."""

import json
from pathlib import Path

import pandas as pd
import pytest

from main import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION, exit_code_for, run_cli
from src.duality_check import MissingDualsError
from src.milp_reform import BigMError, CertificationFailure
from src.network_model import CaseIOError, save_case
from src.oracle import EnumerationBudgetError
from src.solver_iface import BackendError
from tests.conftest import slice_bids, two_bus_case

pytestmark = pytest.mark.integration


@pytest.fixture
def undersized_case_file(temp_directory):
    """Case that needs M >= 10 in year 2, saved with a generous M."""
    bids = (slice_bids(1, [(40.0, 10.0)], [(50.0, 5.0)])
            + slice_bids(2, [(40.0, 30.0)], [(50.0, 20.0)]))
    case = two_bus_case(bids, capacity=10.0, lumps=(20.0,), fixed_cost=0.1, variable_cost=0.01)
    return save_case(case, Path(temp_directory) / 'undersized.json')


class TestExitCodes:
    """Tests for error-to-exit-code mapping."""

    @pytest.mark.parametrize('error, code', [
        (EnumerationBudgetError('too many', count=10, budget=5), 2),
        (CaseIOError('missing'), 3),
        (BigMError('small'), 2),
        (CertificationFailure('bad'), 1),
        (MissingDualsError('no duals'), 1),
        (BackendError('crashed'), 4),
    ])
    def test_mapping(self, error, code):
        """Test each error family maps to its code."""
        assert exit_code_for(error) == code


class TestUsage:
    """Tests for usage errors."""

    @pytest.mark.asyncio
    async def test_unknown_generator(self, temp_directory):
        """Test an unknown generator is a usage error."""
        assert await run_cli(['gen-case', 'bogus', '--seed', '1', '--out', temp_directory]) == EXIT_USAGE

    @pytest.mark.asyncio
    async def test_kappa_out_of_range(self, toy_case_file, temp_directory):
        """Test kappa outside [0, 1] is refused before solving."""
        code = await run_cli(['solve', '--case', str(toy_case_file), '--kappa', '1.5', '--out', temp_directory])
        assert code == EXIT_USAGE

    @pytest.mark.asyncio
    async def test_two_case_sources(self, toy_case_file, temp_directory):
        """Test a case file and a generator together are refused."""
        code = await run_cli([
            'solve', '--case', str(toy_case_file), '--generator', 'two_node', '--seed', '1',
            '--out', temp_directory])
        assert code == EXIT_USAGE

    @pytest.mark.asyncio
    async def test_bad_grid(self, toy_case_file, temp_directory):
        """Test a malformed grid is a usage error."""
        code = await run_cli(['sweep', '--case', str(toy_case_file), '--grid', '1:0:0.5', '--out', temp_directory])
        assert code == EXIT_USAGE

    @pytest.mark.asyncio
    async def test_bad_log_level(self, toy_case_file, temp_directory, monkeypatch):
        """Test an unknown log level from the environment is refused."""
        monkeypatch.setenv('GRIDREG_LOG_LEVEL', 'LOUD')
        code = await run_cli(['solve', '--case', str(toy_case_file), '--out', temp_directory])
        assert code == EXIT_USAGE

    @pytest.mark.asyncio
    async def test_unknown_command(self):
        """Test argparse rejects unknown commands with code 2."""
        with pytest.raises(SystemExit) as exc_info:
            await run_cli(['bogus'])
        assert exc_info.value.code == EXIT_USAGE

    @pytest.mark.asyncio
    async def test_missing_case_file(self, temp_directory):
        """Test a missing case file is an I/O error."""
        code = await run_cli(['solve', '--case', str(Path(temp_directory) / 'nope.json'), '--out', temp_directory])
        assert code == EXIT_IO

    @pytest.mark.asyncio
    async def test_big_m_below_bids(self, toy_case_file, temp_directory, mocker):
        """Test an undersized M is refused before solving while the check is on."""
        solve = mocker.patch('main.solve_planning')

        code = await run_cli([
            'solve', '--case', str(toy_case_file), '--big-m', '5', '--out', temp_directory])

        assert code == EXIT_USAGE
        solve.assert_not_called()

    @pytest.mark.asyncio
    async def test_certificate_error_is_verification_failure(self, toy_case_file, temp_directory, mocker):
        """Test a certificate that cannot be computed exits with the verification code."""
        mocker.patch('main.solve_planning', side_effect=MissingDualsError('outcome has no duals'))

        code = await run_cli(['solve', '--case', str(toy_case_file), '--out', temp_directory])

        assert code == EXIT_VERIFICATION


class TestCommands:
    """Tests for each command on small cases."""

    @pytest.mark.asyncio
    async def test_gen_case(self, temp_directory):
        """Test a seeded case is written under a stable name."""
        code = await run_cli(['gen-case', 'two_node', '--seed', '42', '--out', temp_directory])

        assert code == EXIT_OK
        data = json.loads((Path(temp_directory) / 'two_node_seed42.json').read_text(encoding='utf-8'))
        assert data['provenance']['seed'] == 42

    @pytest.mark.asyncio
    async def test_solve(self, toy_case_file, temp_directory):
        """Test solve writes the solution and its metrics."""
        code = await run_cli(['solve', '--case', str(toy_case_file), '--kappa', '0.5', '--out', temp_directory])

        assert code == EXIT_OK
        solution = json.loads((Path(temp_directory) / 'solution_kappa0.5.json').read_text(encoding='utf-8'))
        metrics = json.loads((Path(temp_directory) / 'metrics_kappa0.5.json').read_text(encoding='utf-8'))
        assert solution['plan'] == [{'line': 1, 'year': 2, 'lump_mw': 4.0}]
        assert solution['envelope_audit']['flagged'] is False
        assert metrics['tp'] == pytest.approx(123.0, abs=1e-5)

    @pytest.mark.asyncio
    async def test_sweep(self, toy_case_file, temp_directory):
        """Test the sweep writes one CSV row per grid point and a summary, identically on every run."""
        serial_dir = Path(temp_directory) / 'serial'
        repeat_dir = Path(temp_directory) / 'repeat'
        parallel_dir = Path(temp_directory) / 'parallel'

        serial = await run_cli([
            'sweep', '--case', str(toy_case_file), '--grid', '0:1:0.25', '--out', str(serial_dir)])
        repeat = await run_cli([
            'sweep', '--case', str(toy_case_file), '--grid', '0:1:0.25', '--out', str(repeat_dir)])
        parallel = await run_cli([
            'sweep', '--case', str(toy_case_file), '--grid', '0:1:0.25', '--parallel', '2',
            '--out', str(parallel_dir)])

        assert serial == repeat == parallel == EXIT_OK
        frame = pd.read_csv(serial_dir / 'sweep.csv')
        assert frame['kappa'].tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
        csv_bytes = (serial_dir / 'sweep.csv').read_bytes()
        assert (repeat_dir / 'sweep.csv').read_bytes() == csv_bytes
        assert (parallel_dir / 'sweep.csv').read_bytes() == csv_bytes
        summary = json.loads((serial_dir / 'summary.json').read_text(encoding='utf-8'))
        assert summary['kappa_star'] == 0.25
        assert (serial_dir / 'summary.txt').exists()

    @pytest.mark.asyncio
    async def test_verify(self, toy_case_file, temp_directory):
        """Test the MILP matches the oracle on the toy case."""
        code = await run_cli(['verify', '--case', str(toy_case_file), '--out', temp_directory])

        assert code == EXIT_OK
        report = json.loads((Path(temp_directory) / 'verify.json').read_text(encoding='utf-8'))
        assert report['passed'] is True
        assert [entry['kappa'] for entry in report['kappas']] == [0.0, 0.5, 1.0]
        assert all(entry['plans_enumerated'] == 6 for entry in report['kappas'])

    @pytest.mark.asyncio
    async def test_verify_flags_small_m(self, undersized_case_file, temp_directory):
        """Test verification fails when M is below a congestion dual."""
        code = await run_cli([
            'verify', '--case', str(undersized_case_file), '--kappa', '1',
            '--big-m', '5', '--no-big-m-check', '--out', temp_directory])

        assert code == EXIT_VERIFICATION
        report = json.loads((Path(temp_directory) / 'verify.json').read_text(encoding='utf-8'))
        assert report['passed'] is False
        assert report['kappas'][0]['envelope_audit']['flagged'] is True

    @pytest.mark.asyncio
    async def test_verify_over_budget(self, temp_directory, mocker):
        """Test verification refuses a plan space beyond the budget before any solve."""
        solve = mocker.patch('main.solve_planning')
        oracle = mocker.patch('main.brute_force')

        code = await run_cli([
            'verify', '--generator', 'garver6', '--seed', '1', '--agents', '2', '--out', temp_directory])

        assert code == EXIT_USAGE
        solve.assert_not_called()
        oracle.assert_not_called()
        assert not (Path(temp_directory) / 'verify.json').exists()

    @pytest.mark.asyncio
    async def test_oracle_table(self, toy_case_file, temp_directory):
        """Test the oracle table lists every plan."""
        code = await run_cli([
            'oracle-table', '--case', str(toy_case_file), '--kappa', '1', '--out', temp_directory])

        assert code == EXIT_OK
        table = pd.read_csv(Path(temp_directory) / 'oracle_kappa1.csv')
        assert len(table) == 6
        assert table['profit'].max() == pytest.approx(159.0, abs=1e-4)
