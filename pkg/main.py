"""Entry point for the transmission incentive planning application."""

import argparse
import asyncio
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional, Sequence, Tuple

from dotenv import load_dotenv
from pydantic import ValidationError

from src.analysis import (
    AnalysisError,
    InvalidGridError,
    ReportError,
    SweepProgressTracker,
    SweepTable,
    emit_report,
    evaluate_metrics,
    format_summary,
    parse_grid,
    sweep_kappa_async,
)
from src.duality_check import CertificateError
from src.milp_reform import (
    BigMError,
    CertificationFailure,
    PlanningInfeasibleError,
    ReformulationError,
    envelope_audit,
    export_solution,
    solve_planning,
)
from src.network_model import (
    GENERATORS,
    CaseError,
    CaseStudy,
    load_case,
    lump_stride,
    max_bid_price,
    save_case,
    with_policy,
)
from src.network_model.io import as_case_validation_error
from src.oracle import (
    EnumerationBudgetError,
    OracleError,
    brute_force,
    check_plan_budget,
    export_table,
)
from src.solver_iface import SolverError, SolverSettings, resolve_settings

# Exit codes
EXIT_OK: int = 0
EXIT_VERIFICATION: int = 1
EXIT_USAGE: int = 2
EXIT_IO: int = 3
EXIT_SOLVER: int = 4

COMMANDS: Tuple[str, ...] = ('gen-case', 'solve', 'sweep', 'verify', 'oracle-table')
DEFAULT_GRID: str = '0:1:0.25'
DEFAULT_VERIFY_GRID: str = '0,0.5,1'
DEFAULT_OUT_DIR: str = 'results'
ENV_LOG_LEVEL: str = 'GRIDREG_LOG_LEVEL'
LOGGER_NAME: str = 'gridreg'

# Objective agreement between the MILP and the oracle, relative
VERIFY_TOLERANCE: float = 1e-6


class UsageError(Exception):
    """Raised for invalid command-line input."""
    pass


@dataclass
class RunConfig:
    """Run configuration resolved from the command line and environment."""
    command: str
    case_path: Optional[Path] = None
    generator: Optional[str] = None
    seed: Optional[int] = None
    kappa: Optional[float] = None
    grid: Tuple[float, ...] = ()
    solver: SolverSettings = field(default_factory=SolverSettings)
    out_dir: Path = Path(DEFAULT_OUT_DIR)
    parallelism: int = 1
    lump_stride: Optional[int] = None
    big_m: Optional[float] = None
    check_big_m: bool = True
    agents: Optional[int] = None
    lump_cap: Optional[int] = None
    log_level: int = logging.INFO


def exit_code_for(error: BaseException) -> int:
    """Map an error family to the process exit code."""
    if isinstance(error, (UsageError, InvalidGridError, EnumerationBudgetError, BigMError)):
        return EXIT_USAGE
    if isinstance(error, (CaseError, ReportError, OSError)):
        return EXIT_IO
    if isinstance(error, (CertificationFailure, CertificateError, AnalysisError)):
        return EXIT_VERIFICATION
    if isinstance(error, (SolverError, ReformulationError, OracleError)):
        return EXIT_SOLVER
    return EXIT_SOLVER


class CaseFileHandler:
    """Generates, loads and adjusts case studies."""

    def __init__(self, logger: logging.Logger):
        self.logger = logger

    def generate(self, config: RunConfig) -> CaseStudy:
        """Generate a case from a named generator and seed."""
        if config.generator not in GENERATORS:
            raise UsageError(
                f"Unknown generator '{config.generator}'; valid: {', '.join(GENERATORS)}")
        if config.seed is None:
            raise UsageError('--seed is required to generate a case')
        overrides: Dict[str, Any] = {}
        if config.agents is not None:
            if config.generator == 'garver6':
                overrides['agents_per_node'] = config.agents
            else:
                overrides.update(n_generators=config.agents, n_consumers=config.agents)
        case = GENERATORS[config.generator](config.seed, overrides)
        return lump_stride(case, config.lump_stride) if config.lump_stride else case

    def load(self, config: RunConfig) -> CaseStudy:
        """Load the case named by the configuration and apply stride and big-M overrides."""
        case = load_case(config.case_path) if config.case_path else self.generate(config)
        if config.case_path and config.lump_stride:
            case = lump_stride(case, config.lump_stride)
        if config.big_m is not None:
            top = max_bid_price(case)
            if config.check_big_m and config.big_m < top:
                raise BigMError(
                    f"--big-m {config.big_m:g} is below the largest bid price {top:g}; "
                    f"raise it or pass --no-big-m-check")
            try:
                case = with_policy(case, big_m=config.big_m, strict=config.check_big_m)
            except ValidationError as e:
                raise as_case_validation_error(e) from e
            self.logger.info(f"Big-M set to {config.big_m:g}")
        return case

    def case_file_name(self, config: RunConfig) -> str:
        return f"{config.generator}_seed{config.seed}.json"


class ReportDisplayer:
    """Prints command results to the console."""

    @staticmethod
    def display_solution(kappa: float, objective: float, plan: str, certified: bool) -> None:
        print(f"\n{'='*80}")
        print(f"kappa = {kappa:g}")
        print(f"{'='*80}")
        print(f"Plan: {plan}")
        print(f"Transco profit: {objective:.6g}")
        print(f"Certificate: {'pass' if certified else 'FAIL'}")

    @staticmethod
    def display_sweep(table: SweepTable, tracker: SweepProgressTracker) -> None:
        print(f"\n{'='*80}")
        print('SWEEP COMPLETE')
        print(f"{'='*80}")
        print(format_summary(table))
        print(f"Total kappas: {tracker.total}")
        print(f"Successful: {tracker.successful}")
        print(f"Failed: {tracker.failed}")
        print(f"Total time: {tracker.elapsed:.2f}s")
        print(f"{'='*80}")

    @staticmethod
    def display_verification(entries: Sequence[Dict[str, Any]]) -> None:
        print(f"\n{'='*80}")
        print('VERIFICATION')
        print(f"{'='*80}")
        for entry in entries:
            status = 'pass' if entry['passed'] else 'FAIL'
            print(f"kappa={entry['kappa']:g}: {status} | {entry['message']}")
        print(f"{'='*80}")

    @staticmethod
    def display_written(paths: Sequence[Path]) -> None:
        for path in paths:
            print(f"Written: {path}")


class ResultSaver:
    """Writes structured results."""

    def __init__(self, logger: logging.Logger):
        self.logger = logger

    def save_json(self, data: Any, path: Path) -> Path:
        """Write data as indented JSON.

        Raises:
            OSError: If the file cannot be written.
        """
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2, ensure_ascii=False)
        self.logger.info(f"Saved {path}")
        return path


class GridRegApplication:
    """Main application class for transmission incentive planning runs."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.logger = self._setup_logging()
        self.case_handler = CaseFileHandler(self.logger)
        self.displayer = ReportDisplayer()
        self.saver = ResultSaver(self.logger)

    def _setup_logging(self) -> logging.Logger:
        """Set up logging configuration.

        Returns:
            Configured logger instance.
        """
        logging.basicConfig(
            level=logging.WARNING,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        logging.getLogger('src').setLevel(self.config.log_level)
        logger = logging.getLogger(LOGGER_NAME)
        logger.setLevel(self.config.log_level)
        return logger

    async def run(self) -> int:
        """Run the configured command and return the exit code."""
        handlers = {
            'gen-case': self.cmd_gen_case,
            'solve': self.cmd_solve,
            'sweep': self.cmd_sweep,
            'verify': self.cmd_verify,
            'oracle-table': self.cmd_oracle_table,
        }
        try:
            self.logger.info(f"Running {self.config.command}")
            return await handlers[self.config.command]()
        except EnumerationBudgetError as e:
            self.logger.error(
                f"{e} Use --lump-stride or --lump-cap to shrink the lump menus before verifying.")
            return exit_code_for(e)
        except (UsageError, BigMError, CaseError, ReportError, OSError) as e:
            self.logger.error(f"{type(e).__name__}: {e}")
            return exit_code_for(e)
        except (CertificationFailure, CertificateError, AnalysisError) as e:
            self.logger.error(f"Verification failed: {e}")
            return exit_code_for(e)
        except (SolverError, ReformulationError, OracleError) as e:
            self.logger.error(f"Solver error: {e}")
            return exit_code_for(e)

    def _kappa(self, case: CaseStudy) -> float:
        return case.policy.kappa if self.config.kappa is None else self.config.kappa

    async def cmd_gen_case(self) -> int:
        case = self.case_handler.generate(self.config)
        path = save_case(case, self.config.out_dir / self.case_handler.case_file_name(self.config))
        self.displayer.display_written([path])
        return EXIT_OK

    async def cmd_solve(self) -> int:
        case = self.case_handler.load(self.config)
        kappa = self._kappa(case)
        solution = solve_planning(case, kappa, self.config.solver, check_big_m=self.config.check_big_m)
        audit = envelope_audit(solution, case, self.config.solver)
        if audit.flagged:
            self.logger.error(f"Envelope audit flagged kappa={kappa:g}: {'; '.join(audit.reasons)}")

        out = self.config.out_dir
        written = [export_solution(solution, case, out / f"solution_kappa{kappa:g}.json", audit)]
        self.displayer.display_solution(kappa, solution.objective, solution.plan.describe(case), solution.certified)
        try:
            row = evaluate_metrics(solution, case)
        finally:
            self.displayer.display_written(written)
        written.append(self.saver.save_json(row.to_record(), out / f"metrics_kappa{kappa:g}.json"))
        self.displayer.display_written(written[-1:])
        return EXIT_VERIFICATION if audit.flagged else EXIT_OK

    async def cmd_sweep(self) -> int:
        case = self.case_handler.load(self.config)
        grid = self.config.grid or parse_grid(DEFAULT_GRID)
        tracker = SweepProgressTracker(len(grid), self.logger)
        table = await sweep_kappa_async(
            case, grid, self.config.parallelism, self.config.solver,
            check_big_m=self.config.check_big_m, tracker=tracker)
        written = emit_report(table, self.config.out_dir, ('csv', 'json', 'txt'))
        self.displayer.display_sweep(table, tracker)
        self.displayer.display_written(written)

        statuses = {row.status for row in table.failed_rows}
        if statuses & {'solver_error', 'infeasible', 'model_error', 'error'}:
            return EXIT_SOLVER
        return EXIT_VERIFICATION if statuses else EXIT_OK

    def _verify_kappa(self, case: CaseStudy, kappa: float) -> Dict[str, Any]:
        entry: Dict[str, Any] = {'kappa': kappa, 'passed': False}
        try:
            solution = solve_planning(case, kappa, self.config.solver, check_big_m=self.config.check_big_m)
        except PlanningInfeasibleError as e:
            entry['message'] = f"planning model infeasible, big-M may be undersized ({e})"
            return entry
        audit = envelope_audit(solution, case, self.config.solver)
        oracle = brute_force(
            case, kappa, self.config.lump_cap, refine_ties=True,
            parallelism=self.config.parallelism, settings=self.config.solver)

        scale = 1.0 + abs(oracle.best_profit)
        objective_delta = abs(solution.objective - oracle.best_profit) / scale
        try:
            plan_delta = abs(oracle.profit_of(solution.plan) - solution.objective) / scale
        except OracleError:
            plan_delta = float('inf')

        problems: List[str] = []
        if not solution.certified:
            problems.append('certificate failed')
        if audit.flagged:
            problems.append(f"envelope audit flagged: {'; '.join(audit.reasons)}")
        if objective_delta > VERIFY_TOLERANCE:
            problems.append(f"MILP objective differs from oracle best by {objective_delta:.3g}")
        if plan_delta > VERIFY_TOLERANCE:
            problems.append(f"oracle profit of the MILP plan differs by {plan_delta:.3g}")

        entry.update(
            passed=not problems,
            message='; '.join(problems) or 'MILP matches oracle',
            milp_objective=solution.objective,
            oracle_best_profit=oracle.best_profit,
            objective_delta=objective_delta,
            plan_delta=plan_delta,
            plans_enumerated=oracle.plans_enumerated,
            milp_plan=list(solution.plan.to_records(case)),
            oracle_plan=list(oracle.best_plan.to_records(case)),
            certificate=solution.certificate.to_dict() if solution.certificate else None,
            envelope_audit=audit.to_dict(),
        )
        return entry

    async def cmd_verify(self) -> int:
        case = self.case_handler.load(self.config)
        plans = check_plan_budget(case, self.config.lump_cap)
        self.logger.info(f"Verification enumerates {plans} plans per kappa")
        if self.config.kappa is not None:
            kappas: Sequence[float] = (self.config.kappa,)
        else:
            kappas = self.config.grid or parse_grid(DEFAULT_VERIFY_GRID)

        entries = []
        for kappa in kappas:
            entry = self._verify_kappa(case, kappa)
            if not entry['passed']:
                self.logger.error(f"Verification failed at kappa={kappa:g}: {entry['message']}")
            entries.append(entry)

        path = self.saver.save_json(
            {'passed': all(e['passed'] for e in entries), 'kappas': entries},
            self.config.out_dir / 'verify.json')
        self.displayer.display_verification(entries)
        self.displayer.display_written([path])
        return EXIT_OK if all(e['passed'] for e in entries) else EXIT_VERIFICATION

    async def cmd_oracle_table(self) -> int:
        case = self.case_handler.load(self.config)
        kappa = self._kappa(case)
        result = brute_force(
            case, kappa, self.config.lump_cap,
            parallelism=self.config.parallelism, settings=self.config.solver)
        path = export_table(result, case, self.config.out_dir / f"oracle_kappa{kappa:g}.csv")
        self.displayer.display_written([path])
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='main.py', description='Transmission expansion under an incentive fee.')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('generator', nargs='?', help='generator name for gen-case')
    parser.add_argument('--case', dest='case_path', help='case file')
    parser.add_argument('--generator', dest='generator_flag', help='generate the case instead of loading one')
    parser.add_argument('--seed', type=int)
    parser.add_argument('--kappa', type=float)
    parser.add_argument('--grid', help='lo:hi:step or comma list')
    parser.add_argument('--parallel', type=int, default=1, dest='parallelism')
    parser.add_argument('--out', default=DEFAULT_OUT_DIR)
    parser.add_argument('--lump-stride', type=int)
    parser.add_argument('--lump-cap', type=int, help='smallest lumps per line enumerated by the oracle')
    parser.add_argument('--big-m', type=float)
    parser.add_argument('--no-big-m-check', action='store_true')
    parser.add_argument('--agents', type=int)
    parser.add_argument('--log-level', default=None)
    parser.add_argument('--solver.backend', dest='solver_backend')
    parser.add_argument('--solver.mip_gap', dest='solver_mip_gap', type=float)
    parser.add_argument('--solver.lp_tol', dest='solver_lp_tol', type=float)
    parser.add_argument('--solver.time_limit_s', dest='solver_time_limit_s', type=float)
    parser.add_argument('--solver.pyomo_solver', dest='solver_pyomo_solver')
    return parser


def create_config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Create run configuration from command line arguments and environment.

    Returns:
        Run configuration.

    Raises:
        SystemExit: If arguments cannot be parsed.
        UsageError: If arguments are inconsistent.
    """
    # Load environment variables from .env file
    load_dotenv()
    args = build_parser().parse_args(argv)

    level_name = (args.log_level or os.getenv(ENV_LOG_LEVEL) or 'INFO').upper()
    log_level = logging.getLevelName(level_name)
    if not isinstance(log_level, int):
        raise UsageError(f"Unknown log level '{level_name}'")

    generator = args.generator or args.generator_flag
    if args.command == 'gen-case':
        if not generator:
            raise UsageError(f"gen-case needs a generator: {', '.join(GENERATORS)}")
    elif bool(args.case_path) == bool(generator):
        raise UsageError('give exactly one case source: --case <file> or --generator <name> --seed <n>')

    if args.kappa is not None and not 0.0 <= args.kappa <= 1.0:
        raise UsageError(f"--kappa must lie in [0, 1], got {args.kappa:g}")
    if args.parallelism < 1:
        raise UsageError('--parallel must be at least 1')
    if args.lump_stride is not None and args.lump_stride < 1:
        raise UsageError('--lump-stride must be at least 1')

    try:
        solver = resolve_settings({
            'solver.backend': args.solver_backend,
            'solver.mip_gap': args.solver_mip_gap,
            'solver.lp_tol': args.solver_lp_tol,
            'solver.time_limit_s': args.solver_time_limit_s,
            'solver.pyomo_solver': args.solver_pyomo_solver,
        })
    except ValueError as e:
        raise UsageError(str(e)) from e

    return RunConfig(
        command=args.command,
        case_path=Path(args.case_path) if args.case_path else None,
        generator=generator,
        seed=args.seed,
        kappa=args.kappa,
        grid=parse_grid(args.grid) if args.grid else (),
        solver=solver,
        out_dir=Path(args.out),
        parallelism=args.parallelism,
        lump_stride=args.lump_stride,
        big_m=args.big_m,
        check_big_m=not args.no_big_m_check,
        agents=args.agents,
        lump_cap=args.lump_cap,
        log_level=log_level,
    )


async def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and return the exit code."""
    try:
        config = create_config_from_args(argv)
    except (UsageError, InvalidGridError, SolverError) as e:
        print(f"Usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    app = GridRegApplication(config)
    return await app.run()


async def main() -> NoReturn:
    """Main entry point for the planning application."""
    sys.exit(await run_cli())


if __name__ == '__main__':
    asyncio.run(main())
