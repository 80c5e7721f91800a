"""Load and save case studies as JSON documents."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from pydantic import ValidationError

from .case import CaseStudy
from .exceptions import CaseIOError, CaseParseError, CaseValidationError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def case_from_dict(data: Dict[str, Any]) -> CaseStudy:
    """Validate a case document.

    Args:
        data: Parsed case document.

    Returns:
        Validated case study.

    Raises:
        CaseValidationError: If any invariant is breached; ``field`` holds
            the dotted path of the first offending field.
    """
    try:
        return CaseStudy.model_validate(data)
    except ValidationError as e:
        raise as_case_validation_error(e) from e


def as_case_validation_error(error: ValidationError) -> CaseValidationError:
    """Convert a pydantic error into a case error naming the first bad field."""
    first = error.errors()[0]
    field = '.'.join(str(part) for part in first['loc']) or 'case'
    return CaseValidationError(f"Invalid case field '{field}': {first['msg']}", field=field)


def case_to_dict(case: CaseStudy) -> Dict[str, Any]:
    return case.model_dump(mode='json', by_alias=True)


def load_case(path: PathLike) -> CaseStudy:
    """Read and validate a case file.

    Args:
        path: Location of the JSON case file.

    Returns:
        Validated case study.

    Raises:
        CaseIOError: If the file cannot be read.
        CaseParseError: If the file is not valid JSON.
        CaseValidationError: If the content breaks a case invariant.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise CaseIOError(f"Cannot read case file {path}: {e}") from e

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise CaseParseError(f"Malformed case file {path}: {e}") from e
    if not isinstance(data, dict):
        raise CaseParseError(f"Case file {path} must contain a JSON object")

    case = case_from_dict(data)
    logger.info(
        f"Loaded case {path}: {len(case.nodes)} nodes, {len(case.lines)} lines, "
        f"{len(case.bids)} bids")
    return case


def save_case(case: CaseStudy, path: PathLike) -> Path:
    """Write a case file.

    Args:
        case: Case to serialize.
        path: Destination file; parent directories are created.

    Returns:
        The written path.

    Raises:
        CaseIOError: If the file cannot be written.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(case_to_dict(case), f, indent=2)
    except OSError as e:
        raise CaseIOError(f"Cannot write case file {path}: {e}") from e

    logger.info(f"Case saved to {path}")
    return path
