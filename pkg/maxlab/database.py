from sqlalchemy import create_engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

from . import config

Base = declarative_base()


def make_engine(url: str = None):
    """Engine for ``url`` (default MAXLAB_DATABASE_URL); SQLite is shared across worker threads."""
    url = url or config.DATABASE_URL
    # Hosted Postgres hands out the legacy scheme
    if url.startswith("postgres://"):
        url = url.replace("postgres://", "postgresql://", 1)
    if url.startswith("sqlite"):
        return create_engine(url, connect_args={"check_same_thread": False})
    return create_engine(url)


def init_db(bind):
    """Create the run and violation tables if they are missing."""
    from . import models  # noqa: F401  registers the tables on Base

    Base.metadata.create_all(bind=bind)


def open_session(url: str = None) -> Session:
    """A session on a ready database."""
    engine = make_engine(url)
    init_db(engine)
    SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    return SessionLocal()
