# experiments/plans.py - Experiment plans, declared as key=value sections of a config file.
#
#   [sum-rate]
#   kind = sum-rate
#   grid = 5,10,15,20,25,30
#   qos = 0.1,0.2,0.4,0.6,0.8,1.0

import configparser
import enum
import io
from dataclasses import dataclass, field

from marshmallow import ValidationError

from errors import PlanError

# weight exponents for rate regions: -3, -1, -0.95 .. 0.95 in steps of 0.05, 1, 3
RATE_REGION_EXPONENTS = tuple([-3.0, -1.0] + [round(-0.95 + 0.05 * i, 2) + 0.0 for i in range(39)] + [1.0, 3.0])
# SNR grid and its paired QoS ladder for sum-rate sweeps
SUM_RATE_SNR_DB = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
SUM_RATE_QOS = (0.1, 0.2, 0.4, 0.6, 0.8, 1.0)
# transmit powers for EE sweeps (plots usually stop at 24 dBm)
EE_POWER_DBM = tuple(float(p) for p in range(4, 31, 2))


class PlanKind(str, enum.Enum):
    RATE_REGION = "rate-region"
    SUM_RATE = "sum-rate"
    EE = "ee"


@dataclass(frozen=True)
class ExperimentPlan:
    name: str
    kind: PlanKind
    grid: list
    K: int = 2
    M: int = 2
    variances: list | None = None
    seed_start: int = 0
    count: int = 20
    qos: list = field(default_factory=list)
    schemes: list = field(default_factory=lambda: ["rsma", "mulp", "noma"])
    solvers: list = field(default_factory=lambda: ["bb", "sca"])
    snr_db: float = 20.0
    eta: float = 0.05
    epsilon: float = 1e-7
    max_time: float = 600.0
    warm_start: bool = True
    mu: float = 0.35
    noise_var: float = 1e-4
    p_dyn_dbm: float = 27.0
    p_sta_mw: float = 1.0
    out: str = "results"

    def __post_init__(self):
        object.__setattr__(self, "kind", PlanKind(self.kind))
        if not self.grid:
            raise PlanError(f"plan {self.name}: grid must not be empty")
        if len(self.qos) > 1 and len(self.qos) != len(self.grid):
            raise PlanError(f"plan {self.name}: {len(self.qos)} QoS values for {len(self.grid)} grid points")
        if self.count < 1:
            raise PlanError(f"plan {self.name}: count must be at least 1")
        if "noma" in self.schemes and self.K != 2:
            raise PlanError(f"plan {self.name}: NOMA needs K = 2")

    @property
    def seeds(self) -> list[int]:
        return list(range(self.seed_start, self.seed_start + self.count))

    @property
    def channel_variances(self) -> list[float]:
        return list(self.variances) if self.variances is not None else [1.0] * self.K

    def qos_at(self, index: int) -> float:
        """QoS threshold for grid point `index` (paired ladder, a single value, or none)."""
        if not self.qos:
            return 0.0
        if len(self.qos) == 1:
            return float(self.qos[0])
        return float(self.qos[index])


def parse_plans(text: str) -> list[ExperimentPlan]:
    from schemas import ExperimentPlanSchema

    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # K and M are case-sensitive
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise PlanError(f"malformed plan file: {err}") from err
    schema = ExperimentPlanSchema()
    plans = []
    for name in parser.sections():
        data = dict(parser[name])
        data["name"] = name
        try:
            plans.append(schema.load(data))
        except ValidationError as err:
            raise PlanError(f"plan {name}: {err.messages}") from err
    if not plans:
        raise PlanError("no plan sections found")
    return plans


def load_plans(path) -> list[ExperimentPlan]:
    with open(path, encoding="utf-8") as fh:
        return parse_plans(fh.read())


def dumps_plans(plans) -> str:
    from schemas import ExperimentPlanSchema

    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    schema = ExperimentPlanSchema()
    for plan in plans:
        data = schema.dump(plan)
        name = data.pop("name")
        parser[name] = {key: str(value) for key, value in data.items() if value is not None}
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()
