"""Unit tests for grids, metrics, the participant-optimal kappa and reports."""

import json
import math
from dataclasses import replace
from pathlib import Path

import pandas as pd
import pytest

from src.analysis import (
    AnalysisError,
    EmptySweepError,
    InvalidGridError,
    ReportError,
    SweepTable,
    emit_report,
    evaluate_kappa,
    evaluate_metrics,
    format_summary,
    parse_grid,
    participant_optimal_kappa,
    summary_rows,
    summary_to_dict,
    validate_grid,
)
from src.analysis.sweep import failure_status
from src.milp_reform import BigMError, CertificationFailure, PlanningInfeasibleError, solve_planning
from src.solver_iface import BackendError
from tests.conftest import make_row

pytestmark = pytest.mark.unit


class TestGrid:
    """Test cases for kappa grid parsing."""

    @pytest.mark.parametrize('text, expected', [
        ('0:1:0.25', (0.0, 0.25, 0.5, 0.75, 1.0)),
        ('0:1:0.3', (0.0, 0.3, 0.6, 0.9)),
        ('0:1:0.1', tuple(round(0.1 * i, 10) for i in range(11))),
        ('0,0.5,1', (0.0, 0.5, 1.0)),
        (' 0.4 ', (0.4,)),
    ])
    def test_parse(self, text, expected):
        """Test ranges, lists and single values."""
        assert parse_grid(text) == expected

    @pytest.mark.parametrize('text', [
        '', '0:1', '0:1:0', '1:0:0.1', 'a,b', '0.5,0.2', '0.5,0.5', '1.5', '-0.1:1:0.5',
    ])
    def test_invalid(self, text):
        """Test malformed or out-of-range grids are refused."""
        with pytest.raises(InvalidGridError):
            parse_grid(text)

    def test_validate_rejects_nan(self):
        """Test non-finite kappas are refused."""
        with pytest.raises(InvalidGridError):
            validate_grid([0.0, math.nan])


class TestMetricsRow:
    """Test cases for metrics rows."""

    def test_record_columns(self):
        """Test records list metrics, expansion per line and status."""
        row = make_row(0.5, 3.0)

        assert list(row.to_record()) == [
            'kappa', 'tp', 'sw', 'benefits', 'fee', 'ms', 'cost', 'change_in_surplus',
            'expansion_1', 'status']
        assert row.identity_residual() == 0.0
        assert row.total_expansion == 5.0

    def test_failed_row(self, failed_row):
        """Test a failed row keeps kappa and status."""
        assert not failed_row.ok
        assert failed_row.to_record()['status'] == 'solver_error'
        assert failed_row.message == 'backend crashed'


class TestFailureStatus:
    """Test cases for mapping errors to row statuses."""

    @pytest.mark.parametrize('error, status', [
        (CertificationFailure('x'), 'certificate_failed'),
        (PlanningInfeasibleError('x'), 'infeasible'),
        (BigMError('x'), 'big_m_error'),
        (AnalysisError('x'), 'identity_failed'),
        (ValueError('x'), 'error'),
    ])
    def test_mapping(self, error, status):
        """Test the most specific status is chosen."""
        assert failure_status(error) == status

    def test_solver_error(self):
        """Test backend failures map to solver_error."""
        assert failure_status(BackendError('crashed')) == 'solver_error'


class TestEvaluateMetrics:
    """Test cases for metrics of a planning solution."""

    def test_toy_metrics(self, toy_case, solver_settings):
        """Test the toy metrics at kappa = 0.5."""
        solution = solve_planning(toy_case, 0.5, solver_settings)

        row = evaluate_metrics(solution, toy_case)

        assert row.ok
        assert row.transco_profit == pytest.approx(123.0, abs=1e-5)
        assert row.social_welfare == pytest.approx(152.0, abs=1e-5)
        assert row.participant_benefits == pytest.approx(29.0, abs=1e-5)
        assert row.fee_total == pytest.approx(29.0, abs=1e-5)
        assert row.expansion == {1: 4.0}
        assert row.statistics['binaries'] == 12

    def test_unproven_solution(self, toy_case, solver_settings):
        """Test unproven solutions are not reported."""
        solution = solve_planning(toy_case, 0.5, solver_settings)

        with pytest.raises(CertificationFailure):
            evaluate_metrics(replace(solution, proven=False), toy_case)

    def test_evaluate_kappa_failure_row(self, undersized_m_case, solver_settings):
        """Test a refused big-M becomes a failed row."""
        row = evaluate_kappa(undersized_m_case, 0.5, solver_settings, check_big_m=True)

        assert row.status == 'big_m_error'
        assert math.isnan(row.transco_profit)


class TestParticipantOptimalKappa:
    """Test cases for kappa* selection."""

    def test_interior_peak(self, sample_table):
        """Test the benefits peak is found."""
        kappa, row = participant_optimal_kappa(sample_table)

        assert kappa == 0.57
        assert row.participant_benefits == 6.65

    def test_ties_go_to_smallest_kappa(self):
        """Test equal benefits pick the smaller kappa."""
        table = SweepTable(rows=(make_row(0.0, 1.0), make_row(0.25, 5.0), make_row(0.5, 5.0)))
        assert participant_optimal_kappa(table)[0] == 0.25

    def test_decreasing_benefits(self):
        """Test monotone decreasing benefits give kappa* = 0."""
        table = SweepTable(rows=tuple(make_row(k, 10.0 * (1 - k)) for k in (0.0, 0.5, 1.0)))
        assert participant_optimal_kappa(table)[0] == 0.0

    def test_failed_rows_ignored(self, failed_row):
        """Test failed rows never become kappa*."""
        table = SweepTable(rows=(make_row(0.0, 1.0), failed_row, make_row(1.0, 0.0)))
        assert participant_optimal_kappa(table)[0] == 0.0

    def test_no_successful_rows(self, failed_row):
        """Test an all-failed sweep has no kappa*."""
        with pytest.raises(EmptySweepError):
            participant_optimal_kappa(SweepTable(rows=(failed_row,)))

    def test_summary_rows(self, sample_table):
        """Test the three labelled rows in report order."""
        rows = summary_rows(sample_table)

        assert [(label, row.kappa) for label, row in rows] == [
            ('kappa=1', 1.0), ('kappa*', 0.57), ('kappa=0', 0.0)]

    def test_summary_skips_missing_endpoint(self):
        """Test an absent endpoint is left out."""
        table = SweepTable(rows=(make_row(0.0, 1.0), make_row(0.5, 2.0)))
        assert [label for label, _ in summary_rows(table)] == ['kappa*', 'kappa=0']


class TestReport:
    """Test cases for report files."""

    def test_csv(self, sample_table, temp_directory):
        """Test the CSV has one row per kappa with fixed columns."""
        emit_report(sample_table, temp_directory, formats=('csv',))

        frame = pd.read_csv(Path(temp_directory) / 'sweep.csv')
        assert list(frame.columns) == [
            'kappa', 'tp', 'sw', 'benefits', 'fee', 'ms', 'cost', 'change_in_surplus',
            'expansion_1', 'status']
        assert frame['kappa'].tolist() == [0.0, 0.25, 0.57, 0.75, 1.0]
        assert (frame['status'] == 'ok').all()

    def test_csv_with_failure(self, failed_row, temp_directory):
        """Test failed rows stay in the CSV with their status."""
        table = SweepTable(rows=(make_row(0.0, 1.0), failed_row, make_row(1.0, 0.0)))

        emit_report(table, temp_directory, formats=('csv',))

        frame = pd.read_csv(Path(temp_directory) / 'sweep.csv')
        assert frame['status'].tolist() == ['ok', 'solver_error', 'ok']
        assert pd.isna(frame.loc[1, 'tp'])

    def test_json_summary(self, sample_table, temp_directory):
        """Test the JSON summary lists kappa* and the labelled rows."""
        paths = emit_report(sample_table, temp_directory, formats=('json',))

        data = json.loads(paths[0].read_text(encoding='utf-8'))
        assert data['kappa_star'] == 0.57
        assert [row['label'] for row in data['rows']] == ['kappa=1', 'kappa*', 'kappa=0']
        assert data['provenance'] == {'generator': 'two_node', 'seed': 42}
        assert data['failed'] == []

    def test_text_summary(self, sample_table, temp_directory):
        """Test the text summary names every labelled row."""
        paths = emit_report(sample_table, temp_directory, formats=('txt',))

        text = paths[0].read_text(encoding='utf-8')
        assert 'kappa*' in text
        assert 'kappa=0' in text

    def test_all_failed_summary(self, failed_row):
        """Test a sweep without successes still summarizes its failures."""
        table = SweepTable(rows=(failed_row,))

        data = summary_to_dict(table)

        assert data['kappa_star'] is None
        assert data['rows'] == []
        assert data['failed'][0]['status'] == 'solver_error'
        assert 'failed' in format_summary(table)

    def test_empty_formats(self, sample_table, temp_directory):
        """Test no formats writes nothing."""
        assert emit_report(sample_table, Path(temp_directory) / 'none', formats=()) == []
        assert not (Path(temp_directory) / 'none').exists()

    def test_unknown_format(self, sample_table, temp_directory):
        """Test unknown formats are refused."""
        with pytest.raises(ReportError):
            emit_report(sample_table, temp_directory, formats=('xml',))

    def test_empty_table(self, temp_directory):
        """Test a table without rows is refused."""
        with pytest.raises(EmptySweepError):
            emit_report(SweepTable(rows=()), temp_directory)

    def test_write_failure(self, sample_table, temp_directory):
        """Test an unwritable output directory becomes a report error."""
        blocker = Path(temp_directory) / 'blocker'
        blocker.write_text('not a directory', encoding='utf-8')

        with pytest.raises(ReportError):
            emit_report(sample_table, blocker)

    def test_row_metadata_not_in_csv(self, temp_directory):
        """Test timing and model statistics stay out of the CSV."""
        row = replace(make_row(0.0, 1.0), wall_time=3.5, statistics={'binaries': 4})

        emit_report(SweepTable(rows=(row,)), temp_directory, formats=('csv',))

        frame = pd.read_csv(Path(temp_directory) / 'sweep.csv')
        assert 'wall_time' not in frame.columns
        assert 'statistics' not in frame.columns
