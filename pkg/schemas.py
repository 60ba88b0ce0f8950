# schemas.py - marshmallow schemas for everything that leaves or enters the process.
#
# Complex vectors travel as lists of [re, im] pairs. Plans are flat string dictionaries because
# they come from (and go back to) key=value config sections.

import json
import math

import numpy as np
from marshmallow import Schema, ValidationError, fields, post_load, validate, validates_schema

# ------------------------------
# Custom fields
# ------------------------------


class ComplexArray(fields.Field):
    """ndarray of complex numbers <-> nested lists of [re, im]."""

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        arr = np.asarray(value, dtype=complex)
        return np.stack([arr.real, arr.imag], axis=-1).tolist()

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            arr = np.asarray(value, dtype=float)
        except (TypeError, ValueError) as err:
            raise ValidationError("expected nested [re, im] pairs") from err
        if arr.ndim == 0 or arr.shape[-1] != 2:
            raise ValidationError("expected nested [re, im] pairs")
        return arr[..., 0] + 1j * arr[..., 1]


class FloatArray(fields.Field):
    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        return [None if not math.isfinite(v) else float(v) for v in np.asarray(value, dtype=float).reshape(-1)]

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            return np.asarray(value, dtype=float)
        except (TypeError, ValueError) as err:
            raise ValidationError("expected a list of numbers") from err


class CsvList(fields.Field):
    """Comma-separated string in config files, list in Python."""

    def __init__(self, cast=str, **kwargs):
        super().__init__(**kwargs)
        self.cast = cast

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        return ",".join(str(self.cast(v)) for v in value)

    def _deserialize(self, value, attr, data, **kwargs):
        items = value if isinstance(value, (list, tuple)) else [tok for tok in str(value).split(",") if tok.strip()]
        try:
            return [self.cast(item.strip() if isinstance(item, str) else item) for item in items]
        except (TypeError, ValueError) as err:
            raise ValidationError(f"could not read list item as {self.cast.__name__}") from err


class FiniteFloat(fields.Float):
    """Float that dumps +-inf/nan as None (JSON has no infinities)."""

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None or not math.isfinite(value):
            return None
        return super()._serialize(value, attr, obj, **kwargs)


# ------------------------------
# Physical model
# ------------------------------


class ChannelSetSchema(Schema):
    K = fields.Int(dump_only=True)
    M = fields.Int(dump_only=True)
    h = ComplexArray(required=True)  # one row per user, noise-normalized
    seed = fields.Int(allow_none=True, load_default=None)
    meta = fields.Dict(keys=fields.Str(), values=fields.Str(), load_default=dict)

    @post_load
    def make(self, data, **kwargs):
        from models.channel import ChannelSet

        return ChannelSet(**data)


class PrecoderSetSchema(Schema):
    p_c = ComplexArray(required=True)
    p = ComplexArray(required=True)

    @post_load
    def make(self, data, **kwargs):
        from models.precoder import PrecoderSet

        return PrecoderSet(**data)


class SchemeConfigSchema(Schema):
    kind = fields.Str(required=True, validate=validate.OneOf(["rsma", "mulp", "noma"]))
    noma_order = fields.List(fields.Int(), allow_none=True, load_default=None)

    def get_attribute(self, obj, attr, default):
        value = super().get_attribute(obj, attr, default)
        return value.value if attr == "kind" and hasattr(value, "value") else value

    @post_load
    def make(self, data, **kwargs):
        from models.problem import SchemeConfig

        order = tuple(data["noma_order"]) if data.get("noma_order") is not None else None
        return SchemeConfig(data["kind"], order)


class ProblemSpecSchema(Schema):
    channels = fields.Nested(ChannelSetSchema, required=True)
    u = FloatArray(required=True)
    R_th = FloatArray(required=True)
    P = fields.Float(required=True)
    mu = fields.Float(load_default=0.0)
    P_circ = fields.Float(load_default=1.0)
    scheme = fields.Nested(SchemeConfigSchema, load_default=None)
    objective_kind = fields.Str(validate=validate.OneOf(["wsr", "ee"]), load_default="wsr")
    min_common_rate = fields.Float(load_default=0.0)

    def get_attribute(self, obj, attr, default):
        value = super().get_attribute(obj, attr, default)
        return value.value if attr == "objective_kind" else value

    @post_load
    def make(self, data, **kwargs):
        from models.problem import ProblemSpec, SchemeConfig

        if data.get("scheme") is None:
            data["scheme"] = SchemeConfig()
        return ProblemSpec(**data)


class ViolationSchema(Schema):
    constraint = fields.Str()
    magnitude = fields.Float()


class SolutionReportSchema(Schema):
    precoders = fields.Nested(PrecoderSetSchema)
    C = FloatArray()
    gamma_p = FloatArray()
    gamma_c = FloatArray()
    rates = FloatArray()
    objective = FiniteFloat()
    feasible = fields.Bool()
    violations = fields.List(fields.Nested(ViolationSchema))


# ------------------------------
# Solver output
# ------------------------------


class TraceEventSchema(Schema):
    iter = fields.Int()
    node = fields.Int()
    event = fields.Str()
    beta = fields.Method("_beta")  # +inf stays readable as the string "inf"
    delta = fields.Float()
    parent = fields.Int(allow_none=True)
    parent_beta = fields.Method("_parent_beta")
    live_min = FiniteFloat(allow_none=True)
    detail = fields.Str()

    @staticmethod
    def _finite_or_text(value):
        if value is None:
            return None
        return value if math.isfinite(value) else ("inf" if value > 0 else "-inf")

    def _beta(self, obj):
        return self._finite_or_text(obj.beta)

    def _parent_beta(self, obj):
        return self._finite_or_text(obj.parent_beta)


class SolverOutcomeSchema(Schema):
    status = fields.Method("_status")
    incumbent = fields.Nested(SolutionReportSchema, allow_none=True)
    delta_final = fields.Float()
    certificate = fields.Method("_certificate")  # lower end of [objective, objective + eta]
    iterations = fields.Int()
    nodes_explored = fields.Int()
    wall_time = fields.Float()

    def _status(self, obj):
        return obj.status.value

    def _certificate(self, obj):
        return obj.delta_final - obj.eta if obj.incumbent is not None else None


# ------------------------------
# Experiments
# ------------------------------


class ExperimentPlanSchema(Schema):
    name = fields.Str(required=True)
    kind = fields.Str(required=True, validate=validate.OneOf(["rate-region", "sum-rate", "ee"]))
    K = fields.Int(load_default=2, validate=validate.Range(min=1))
    M = fields.Int(load_default=2, validate=validate.Range(min=1))
    variances = CsvList(float, load_default=None)
    seed_start = fields.Int(load_default=0)
    count = fields.Int(load_default=20, validate=validate.Range(min=1))
    grid = CsvList(float, required=True)
    qos = CsvList(float, load_default=list)
    schemes = CsvList(str, load_default=lambda: ["rsma", "mulp", "noma"])
    solvers = CsvList(str, load_default=lambda: ["bb", "sca"])
    snr_db = fields.Float(load_default=20.0)  # rate regions only
    eta = fields.Float(load_default=0.05, validate=validate.Range(min=0, min_inclusive=False))
    epsilon = fields.Float(load_default=1e-7, validate=validate.Range(min=0, min_inclusive=False))
    max_time = fields.Float(load_default=600.0)
    warm_start = fields.Bool(load_default=True)
    mu = fields.Float(load_default=0.35)
    noise_var = fields.Float(load_default=1e-4)
    p_dyn_dbm = fields.Float(load_default=27.0)
    p_sta_mw = fields.Float(load_default=1.0)
    out = fields.Str(load_default="results")

    def get_attribute(self, obj, attr, default):
        value = super().get_attribute(obj, attr, default)
        return value.value if attr == "kind" and hasattr(value, "value") else value

    @validates_schema
    def check(self, data, **kwargs):
        if not data.get("grid"):
            raise ValidationError("grid must not be empty", "grid")
        qos = data.get("qos") or []
        if len(qos) > 1 and len(qos) != len(data["grid"]):
            raise ValidationError("a QoS ladder needs one value per grid point", "qos")
        for scheme in data.get("schemes", []):
            if scheme not in ("rsma", "mulp", "noma"):
                raise ValidationError(f"unknown scheme {scheme!r}", "schemes")
        for solver in data.get("solvers", []):
            if solver not in ("bb", "sca"):
                raise ValidationError(f"unknown solver {solver!r}", "solvers")
        variances = data.get("variances")
        if variances is not None and (len(variances) != data.get("K", 2) or min(variances) <= 0):
            raise ValidationError("need one positive variance per user", "variances")

    @post_load
    def make(self, data, **kwargs):
        from experiments.plans import ExperimentPlan

        return ExperimentPlan(**data)


class ResultRowSchema(Schema):
    plan = fields.Str()
    kind = fields.Str()
    seed = fields.Int()
    scheme = fields.Str()
    grid_x = fields.Float()
    solver = fields.Str()
    objective = FiniteFloat(allow_none=True)
    rates = fields.Function(lambda row: json.dumps([float(r) for r in row.rates]))
    common = fields.Function(lambda row: json.dumps([float(c) for c in row.common]))
    status = fields.Str()
    wall_ms = fields.Float()
