## db.py - Engine and session factory for the optional result store.
# Sweeps can persist every ResultRow here so that an interrupted run resumes where it stopped.

import os

from sqlalchemy import create_engine
from sqlalchemy.orm import DeclarativeBase, sessionmaker


class Base(DeclarativeBase):
    """Declarative base for every table in the store."""


def database_url(url=None):
    """Returns the explicit URL, else DATABASE_URL, else None (no store)."""
    return url or os.getenv("DATABASE_URL") or None


def make_session_factory(url):
    """Creates the engine for `url`, makes sure the tables exist and returns a session factory."""
    # Importing the model registers its table on Base.metadata
    import models.result  # noqa: F401

    engine = create_engine(url, future=True)
    Base.metadata.create_all(engine)
    return sessionmaker(bind=engine, expire_on_commit=False)
