import json

import pytest

from maxlab.errors import DomainError, VerificationError
from maxlab.models.run import CandidateViolation, ExperimentRun
from maxlab.schemas import ExperimentReport, RunConfig, function_digest, load_function
from maxlab.services.run_executor import RunExecutor, list_violations, mark_reviewed


def _report(verdict="pass"):
    return ExperimentReport(name="demo", verdict=verdict, summary={"rows": 0})


def test_completed_run_is_recorded(db):
    executor = RunExecutor(db)
    result = executor.execute("demo", RunConfig(command="check"), lambda ex: _report())
    assert result.verdict == "pass"
    run = db.query(ExperimentRun).one()
    assert run.status == "completed"
    assert run.verdict == "pass"
    assert json.loads(run.summary_json) == {"rows": 0}
    assert json.loads(run.config_json)["command"] == "check"
    assert [step["event"] for step in json.loads(run.execution_log)] == ["start", "complete"]


def test_failed_run_keeps_the_error(db):
    def runner(ex):
        raise VerificationError("member 3 rejected")

    executor = RunExecutor(db)
    with pytest.raises(VerificationError):
        executor.execute("demo", RunConfig(command="reproduce"), runner)
    run = db.query(ExperimentRun).one()
    assert run.status == "failed"
    assert run.error_message == "member 3 rejected"
    assert [step["event"] for step in json.loads(run.execution_log)] == ["start", "error"]


def test_violation_review_cycle(db, delta):
    executor = RunExecutor(db)

    def runner(ex):
        ex.record_violation("var-bound", delta, {"ratio": 1.5})
        return _report("fail")

    executor.execute("fuzz", RunConfig(command="fuzz"), runner)
    pending = list_violations(db)
    assert len(pending) == 1
    stored = pending[0]
    assert stored.check == "var-bound"
    assert stored.instance_digest == function_digest(delta)
    assert load_function(json.loads(stored.instance_json)) == delta
    assert json.loads(stored.detail_json) == {"ratio": 1.5}

    reviewed = mark_reviewed(db, stored.id)
    assert reviewed.reviewed
    assert list_violations(db) == []
    assert len(list_violations(db, include_reviewed=True)) == 1
    assert db.query(CandidateViolation).one().run.name == "fuzz"


def test_mark_unknown_violation(db):
    with pytest.raises(DomainError):
        mark_reviewed(db, 404)


def test_without_session_only_the_log_is_kept(delta):
    executor = RunExecutor()

    def runner(ex):
        assert ex.record_violation("contact", delta, {}) is None
        return _report()

    executor.execute("demo", RunConfig(command="check"), runner)
    assert executor.run.status == "completed"
    assert [step["event"] for step in executor.execution_log] == ["start", "violation", "complete"]
