# conic/program.py - Solver-agnostic second-order-cone programs.
#
# A program is a real variable vector x, a linear objective and cone blocks of the form
# z = A x + b with z in one of:
#   ZERO    z == 0
#   NONNEG  z >= 0
#   SOC     z[0] >= ||z[1:]||
#   RSOC    z[0] * z[1] >= ||z[2:]||^2,  z[0], z[1] >= 0
# Complex variables are stored as interleaved (re, im) pairs; ProgramBuilder.hprod is the one
# place where h^H p gets lifted to real rows.

import enum
from dataclasses import dataclass

import numpy as np


class ConeKind(str, enum.Enum):
    ZERO = "zero"
    NONNEG = "nonneg"
    SOC = "soc"
    RSOC = "rsoc"


class Sense(str, enum.Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class VariableBlock:
    name: str
    offset: int
    size: int
    complex_: bool = False

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.size)


@dataclass(frozen=True, eq=False)
class ConstraintBlock:
    kind: ConeKind
    A: np.ndarray
    b: np.ndarray
    tag: str

    def value(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x + self.b

    def violation(self, x: np.ndarray) -> float:
        """Absolute violation of the cone membership at x (0 when satisfied)."""
        z = self.value(x)
        if self.kind is ConeKind.ZERO:
            return float(np.max(np.abs(z), initial=0.0))
        if self.kind is ConeKind.NONNEG:
            return float(max(0.0, -np.min(z, initial=0.0)))
        if self.kind is ConeKind.SOC:
            return float(max(0.0, np.linalg.norm(z[1:]) - z[0]))
        tail = float(np.sum(z[2:] ** 2))
        return float(max(0.0, -z[0], -z[1], tail - z[0] * z[1]))

    def scale(self, x: np.ndarray) -> float:
        """Magnitude of the block's data at x, for relative residuals."""
        return float(np.max(np.abs(self.A), initial=0.0) * np.max(np.abs(x), initial=0.0) + np.max(np.abs(self.b), initial=0.0))


@dataclass(frozen=True, eq=False)
class ConicProgram:
    name: str
    variables: tuple[VariableBlock, ...]
    constraints: tuple[ConstraintBlock, ...]
    c: np.ndarray
    c0: float = 0.0
    sense: Sense = Sense.MIN

    @property
    def n(self) -> int:
        return int(self.c.shape[0])

    def block(self, name: str) -> VariableBlock:
        for var in self.variables:
            if var.name == name:
                return var
        raise KeyError(name)

    def has(self, name: str) -> bool:
        return any(var.name == name for var in self.variables)

    def tags(self) -> list[str]:
        return [con.tag for con in self.constraints]

    def normalized(self) -> "ConicProgram":
        """Equivalent program with every block divided by its largest coefficient."""
        blocks = []
        for con in self.constraints:
            peak = max(np.max(np.abs(con.A), initial=0.0), np.max(np.abs(con.b), initial=0.0))
            if peak == 0:
                blocks.append(con)
                continue
            # a positive factor common to the whole block keeps every cone (RSOC included) unchanged
            factor = 1.0 / peak
            blocks.append(ConstraintBlock(con.kind, con.A * factor, con.b * factor, con.tag))
        return ConicProgram(self.name, self.variables, tuple(blocks), self.c, self.c0, self.sense)

    def dump(self) -> str:
        """Text listing of variables, objective and constraint blocks."""
        out = [f"program {self.name} ({self.sense.value}, n={self.n})", "variables:"]
        for var in self.variables:
            kind = "complex" if var.complex_ else "real"
            out.append(f"  {var.name}[{var.offset}:{var.offset + var.size}] {kind}")
        nz = np.flatnonzero(self.c)
        terms = " + ".join(f"{self.c[i]:.6g}*x{i}" for i in nz) or "0"
        out.append(f"objective: {terms} + {self.c0:.6g}")
        out.append("constraints:")
        for con in self.constraints:
            out.append(f"  [{con.kind.value}] {con.tag} rows={con.A.shape[0]}")
            for row, const in zip(con.A, con.b):
                idx = np.flatnonzero(row)
                expr = " + ".join(f"{row[i]:.6g}*x{i}" for i in idx) or "0"
                out.append(f"      {expr} + {const:.6g}")
        return "\n".join(out)


# -----------------------------
# Affine expressions
# -----------------------------


@dataclass(frozen=True, eq=False)
class Affine:
    """Rows of A x + b. Column counts grow as variables are declared; shorter matrices are zero-padded."""

    A: np.ndarray
    b: np.ndarray

    # make `ndarray - Affine` defer to Affine.__rsub__ instead of broadcasting element-wise
    __array_ufunc__ = None

    @property
    def rows(self) -> int:
        return self.A.shape[0]

    def _widen(self, n: int) -> np.ndarray:
        if self.A.shape[1] >= n:
            return self.A
        return np.hstack([self.A, np.zeros((self.rows, n - self.A.shape[1]))])

    def _coerce(self, other) -> "Affine":
        if isinstance(other, Affine):
            return other
        b = np.broadcast_to(np.asarray(other, dtype=float), (self.rows,)).copy()
        return Affine(np.zeros((self.rows, 0)), b)

    def __add__(self, other):
        other = self._coerce(other)
        n = max(self.A.shape[1], other.A.shape[1])
        return Affine(self._widen(n) + other._widen(n), self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return Affine(-self.A, -self.b)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        scalar = float(scalar)
        return Affine(self.A * scalar, self.b * scalar)

    __rmul__ = __mul__

    def __getitem__(self, idx):
        rows = np.atleast_1d(np.arange(self.rows)[idx])
        return Affine(self.A[rows], self.b[rows])

    def dot(self, weights) -> "Affine":
        """Single row sum_i weights_i * row_i."""
        weights = np.asarray(weights, dtype=float)
        return Affine((weights @ self.A).reshape(1, -1), np.atleast_1d(weights @ self.b))

    def sum(self) -> "Affine":
        return self.dot(np.ones(self.rows))

    @staticmethod
    def stack(*items: "Affine") -> "Affine":
        items = [item for item in items if item is not None and item.rows > 0]
        n = max(item.A.shape[1] for item in items)
        return Affine(np.vstack([item._widen(n) for item in items]), np.concatenate([item.b for item in items]))


def lift(z) -> np.ndarray:
    """Complex vector -> interleaved (re, im) reals."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def unlift(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[0::2] + 1j * x[1::2]


class ProgramBuilder:
    """Collects variables and cone blocks, then freezes them into a ConicProgram."""

    def __init__(self, name: str):
        self.name = name
        self._variables: list[VariableBlock] = []
        self._constraints: list[tuple[ConeKind, Affine, str]] = []
        self._objective: Affine | None = None
        self._sense = Sense.MIN
        self._n = 0

    def add_variable(self, name: str, size: int, complex_: bool = False) -> VariableBlock:
        if any(var.name == name for var in self._variables):
            raise ValueError(f"variable {name} declared twice")
        width = 2 * size if complex_ else size
        var = VariableBlock(name, self._n, width, complex_)
        self._variables.append(var)
        self._n += width
        return var

    def has(self, name: str) -> bool:
        return any(var.name == name for var in self._variables)

    def var(self, name: str) -> Affine:
        block = next(var for var in self._variables if var.name == name)
        A = np.zeros((block.size, self._n))
        A[np.arange(block.size), block.offset + np.arange(block.size)] = 1.0
        return Affine(A, np.zeros(block.size))

    def const(self, values) -> Affine:
        values = np.atleast_1d(np.asarray(values, dtype=float))
        return Affine(np.zeros((values.size, self._n)), values.copy())

    def hprod(self, h, name: str) -> Affine:
        """Two rows [Re h^H p, Im h^H p] for the complex variable `name`."""
        block = next(var for var in self._variables if var.name == name)
        if not block.complex_ or block.size != 2 * len(h):
            raise ValueError(f"{name} is not a complex vector of length {len(h)}")
        h = np.asarray(h, dtype=complex)
        A = np.zeros((2, self._n))
        cols = block.offset + 2 * np.arange(h.size)
        # conj(h)(a + ib) = (hr a + hi b) + i (hr b - hi a)
        A[0, cols] = h.real
        A[0, cols + 1] = h.imag
        A[1, cols] = -h.imag
        A[1, cols + 1] = h.real
        return Affine(A, np.zeros(2))

    # -----------------------------
    # Constraints
    # -----------------------------

    def equal(self, expr: Affine, tag: str) -> None:
        self._constraints.append((ConeKind.ZERO, expr, tag))

    def nonneg(self, expr: Affine, tag: str) -> None:
        self._constraints.append((ConeKind.NONNEG, expr, tag))

    def soc(self, head: Affine, tail: Affine, tag: str) -> None:
        """||tail|| <= head."""
        self._constraints.append((ConeKind.SOC, Affine.stack(head, tail), tag))

    def rsoc(self, first: Affine, second: Affine, tail: Affine, tag: str) -> None:
        """||tail||^2 <= first * second."""
        self._constraints.append((ConeKind.RSOC, Affine.stack(first, second, tail), tag))

    def minimize(self, expr: Affine) -> None:
        self._objective, self._sense = expr, Sense.MIN

    def maximize(self, expr: Affine) -> None:
        self._objective, self._sense = expr, Sense.MAX

    def build(self) -> ConicProgram:
        n = self._n
        blocks = tuple(
            ConstraintBlock(kind, expr._widen(n).copy(), expr.b.copy(), tag) for kind, expr, tag in self._constraints
        )
        objective = self._objective if self._objective is not None else self.const(0.0)
        c = objective._widen(n)[0].copy()
        return ConicProgram(self.name, tuple(self._variables), blocks, c, float(objective.b[0]), self._sense)
