from sqlalchemy import Boolean, Column, DateTime, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship
from sqlalchemy.sql import func

from ..database import Base


class ExperimentRun(Base):
    """
    One CLI run of an experiment (compute, reproduce, fuzz, converge, probe, check).
    """
    __tablename__ = "experiment_runs"

    id = Column(Integer, primary_key=True, index=True)
    name = Column(String, index=True)

    # Execution status
    status = Column(String, default="pending")  # pending, running, completed, failed
    verdict = Column(String, nullable=True)

    # Validated RunConfig and report summary (JSON)
    config_json = Column(Text, default="{}")
    summary_json = Column(Text, nullable=True)

    # Execution log (JSON array of step logs)
    execution_log = Column(Text, default="[]")

    # Error handling
    error_message = Column(Text, nullable=True)

    # Timestamps
    started_at = Column(DateTime(timezone=True), server_default=func.now())
    completed_at = Column(DateTime(timezone=True), nullable=True)

    # Relationships
    violations = relationship("CandidateViolation", back_populates="run", cascade="all, delete-orphan")


class CandidateViolation(Base):
    """
    A (shrunk) instance that violated a check or looked bad in a probe, kept for human review.
    """
    __tablename__ = "candidate_violations"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("experiment_runs.id"))

    check = Column(String, index=True)
    instance_digest = Column(String, index=True)
    instance_json = Column(Text)  # function payload
    detail_json = Column(Text, default="{}")

    reviewed = Column(Boolean, default=False)
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    run = relationship("ExperimentRun", back_populates="violations")
