"""
Run Executor - runs one experiment and records it.
"""

import json
import logging
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional

from sqlalchemy.orm import Session

from ..errors import DomainError, MaxlabError
from ..models.run import CandidateViolation, ExperimentRun
from ..schemas import CandidateViolationOut, ExperimentReport, RunConfig, dump_function, function_digest

logger = logging.getLogger(__name__)


class RunExecutor:
    """
    Executes an experiment callable and keeps its run record and step log.

    Without a session nothing is persisted; the step log is still kept.
    """

    def __init__(self, db: Optional[Session] = None):
        self.db = db
        self.run: Optional[ExperimentRun] = None
        self.execution_log: List[Dict] = []

    def execute(self, name: str, config: RunConfig, runner: Callable[["RunExecutor"], Any]) -> Any:
        """
        Run ``runner(self)`` and return its result; the run record ends up completed or failed.
        """
        run = ExperimentRun(
            name=name,
            status="running",
            config_json=config.model_dump_json(),
            started_at=datetime.utcnow(),
        )
        if self.db is not None:
            self.db.add(run)
            self.db.commit()
            self.db.refresh(run)
        self.run = run
        self.execution_log = []
        self._log_step("start", {"name": name, "command": config.command})

        try:
            result = runner(self)

            # Mark as completed
            run.status = "completed"
            run.verdict = getattr(result, "verdict", None)
            if isinstance(result, ExperimentReport):
                run.summary_json = json.dumps(result.summary, sort_keys=True, default=str)
            run.completed_at = datetime.utcnow()
            self._log_step("complete", {"verdict": run.verdict})

        except MaxlabError as e:
            run.status = "failed"
            run.error_message = e.detail
            run.completed_at = datetime.utcnow()
            self._log_step("error", {"error": type(e).__name__, "message": e.detail})
            raise

        finally:
            # Save execution log
            run.execution_log = json.dumps(self.execution_log)
            if self.db is not None:
                self.db.commit()
                self.db.refresh(run)

        return result

    def record_violation(self, check: str, instance: Any, detail: Dict[str, Any]) -> Optional[CandidateViolation]:
        """Persist a candidate violation for human review."""
        digest = function_digest(instance)
        self._log_step("violation", {"check": check, "digest": digest})
        if self.db is None or self.run is None:
            return None
        violation = CandidateViolation(
            run_id=self.run.id,
            check=check,
            instance_digest=digest,
            instance_json=json.dumps(dump_function(instance), sort_keys=True),
            detail_json=json.dumps(detail, sort_keys=True, default=str),
        )
        self.db.add(violation)
        self.db.commit()
        self.db.refresh(violation)
        return violation

    def _log_step(self, event: str, data: Dict):
        """Add a step to the execution log."""
        logger.info("[run] %s %s", event, data)
        self.execution_log.append({
            "timestamp": datetime.utcnow().isoformat(),
            "event": event,
            "data": data
        })


def list_violations(db: Session, include_reviewed: bool = False) -> List[CandidateViolationOut]:
    query = db.query(CandidateViolation)
    if not include_reviewed:
        query = query.filter(CandidateViolation.reviewed.is_(False))
    return [CandidateViolationOut.model_validate(v) for v in query.order_by(CandidateViolation.id).all()]


def mark_reviewed(db: Session, violation_id: int) -> CandidateViolationOut:
    violation = db.query(CandidateViolation).filter(CandidateViolation.id == violation_id).first()
    if violation is None:
        raise DomainError(f"no candidate violation with id {violation_id}")
    violation.reviewed = True
    db.commit()
    db.refresh(violation)
    return CandidateViolationOut.model_validate(violation)
