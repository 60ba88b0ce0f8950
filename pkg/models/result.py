# models/result.py - ResultRowModel, one solved experiment instance in the result store.

from sqlalchemy import Float, Integer, String, Text, UniqueConstraint
from sqlalchemy.orm import Mapped, mapped_column

from db import Base


class ResultRowModel(Base):
    __tablename__ = "result_rows"
    # One row per (plan, seed, scheme, grid point, solver); reruns skip what is already here
    __table_args__ = (UniqueConstraint("plan", "seed", "scheme", "grid_x", "solver", name="uq_result_task"),)

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    plan: Mapped[str] = mapped_column(String(80), nullable=False)
    kind: Mapped[str] = mapped_column(String(20), nullable=False)
    seed: Mapped[int] = mapped_column(Integer, nullable=False)
    scheme: Mapped[str] = mapped_column(String(10), nullable=False)
    grid_x: Mapped[float] = mapped_column(Float, nullable=False)
    solver: Mapped[str] = mapped_column(String(10), nullable=False)
    objective: Mapped[float | None] = mapped_column(Float)
    rates: Mapped[str] = mapped_column(Text, nullable=False)  # JSON list, bits/cu
    common: Mapped[str] = mapped_column(Text, nullable=False)  # JSON list of C_k
    status: Mapped[str] = mapped_column(String(40), nullable=False)
    wall_ms: Mapped[float] = mapped_column(Float, nullable=False, default=0.0)
