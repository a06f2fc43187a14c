"""Scenario files: YAML documents validated against a JSON schema.

Every physical field carries its unit in the key (``power_watts``,
``sigma_db``, ``reference_distance_m``).  Validation happens before any
model object is built, and errors name the offending field path.
"""

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .errors import DomainError, SchemaError
from .gamma import GammaParams, LogNormalParams
from .geometry import CrossTierSpec, NetworkConfig, PathLossModel, TierSpec, dbm_to_watts, typical_cell_radius
from .montecarlo import SimPlan

DEFAULT_THRESHOLDS_DB = (0.0, 5.0, 10.0)


def load_schema(name="scenario"):
    text = resources.files("hybridcell").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def format_path(parts):
    """['tiers', 0, 'power_watts'] -> 'tiers[0].power_watts'."""
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


@dataclass(frozen=True)
class CompareSpec:
    analytic_method: str = "analytic-gamma"
    beta_max: float = 1.0
    coverage_tolerance: float = 0.03
    rate_tolerance_nats: float = 0.1
    thresholds_db: tuple = None
    metrics: tuple = ("coverage", "rate_nats")


@dataclass(frozen=True)
class Scenario:
    name: str
    config: NetworkConfig
    betas: tuple
    thresholds_db: tuple
    plan: SimPlan
    compare: CompareSpec = field(default_factory=CompareSpec)
    series_tolerance: float = 1e-8
    exact_dominant: bool = False
    laplace_rate: bool = False
    workers: int = None
    outputs: dict = field(default_factory=dict)
    source: Path = None


def validate(doc, schema=None):
    """Raise SchemaError for the first (deepest-path) violation."""
    validator = jsonschema.Draft202012Validator(schema or load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: (-len(e.absolute_path), str(e.absolute_path)))
    if errors:
        err = errors[0]
        path = format_path(list(err.absolute_path))
        raise SchemaError(f"{path}: {err.message}", path=path)


def _power(node):
    return node["power_watts"] if "power_watts" in node else dbm_to_watts(node["power_dbm"])


def _fading(node):
    f = node.get("fading")
    if f is None:
        return GammaParams(1.0, 1.0)
    return GammaParams(f["shape"], f.get("scale", 1.0))


def _tier(node, base_density, path):
    if "density_multiple" in node:
        if base_density is None:
            raise SchemaError(f"{path}.density_multiple: requires base_density_per_m2", path=f"{path}.density_multiple")
        density = node["density_multiple"] * base_density
    else:
        density = node["density_per_m2"]
    return TierSpec(
        power=_power(node),
        density=density,
        fading=_fading(node),
        penetration_loss_db=node.get("penetration_loss_db", 0.0),
        name=node.get("name", ""),
    )


def build(doc, source=None):
    """Validated document -> Scenario."""
    validate(doc)
    base = doc.get("base_density_per_m2")
    try:
        pl = doc["path_loss"]
        model = PathLossModel(pl["constant"], pl["exponent"], pl["reference_distance_m"])
        tiers = []
        for i, node in enumerate(doc["tiers"]):
            tier = _tier(node, base, f"tiers[{i}]")
            tiers.append(tier if tier.name else TierSpec(tier.power, tier.density, tier.fading, tier.penetration_loss_db, f"tier{i + 1}"))
        cross = None
        if "cross_tier" in doc:
            node = doc["cross_tier"]
            tier = _tier(node, base, "cross_tier")
            cross = CrossTierSpec(tier if tier.name else TierSpec(tier.power, tier.density, tier.fading, tier.penetration_loss_db, "cross"), node["exclusion_radius_m"])
        config = NetworkConfig(
            path_loss=model,
            serving_power=_power(doc["serving"]),
            tiers=tuple(tiers),
            serving_fading=_fading(doc["serving"]),
            shadow=LogNormalParams.from_db(doc.get("shadowing", {}).get("sigma_db", 0.0)),
            cross_tier=cross,
            cell_radius_override=doc.get("cell_radius_m"),
            noise_power=doc.get("noise_power_watts"),
        )
        typical_cell_radius(config)
        betas = tuple(float(b) for b in doc["sweep"]["betas"])
        thresholds = tuple(float(t) for t in doc["sweep"].get("thresholds_db", DEFAULT_THRESHOLDS_DB))
        sim = doc.get("simulation", {})
        plan = SimPlan(
            layout_mode=sim.get("layout_mode", "hybrid-small-ball"),
            layouts=sim.get("layouts", 500),
            fading_draws=sim.get("fading_draws", 200),
            seed=sim.get("seed", 0),
            betas=betas,
            thresholds_db=thresholds,
            region_half_width=sim.get("region_half_width_m"),
            tail_tolerance=sim.get("tail_tolerance", 1e-3),
            check_truncation=sim.get("check_truncation", True),
            include_dominant=sim.get("include_dominant", True),
            workers=sim.get("workers"),
        )
        cmp = doc.get("compare", {})
        compare = CompareSpec(
            analytic_method=cmp.get("analytic_method", "analytic-gamma"),
            beta_max=cmp.get("beta_max", 1.0),
            coverage_tolerance=cmp.get("coverage_tolerance", 0.03),
            rate_tolerance_nats=cmp.get("rate_tolerance_nats", 0.1),
            thresholds_db=tuple(cmp["thresholds_db"]) if "thresholds_db" in cmp else None,
            metrics=tuple(cmp.get("metrics", ("coverage", "rate_nats"))),
        )
    except DomainError as exc:
        # values the schema accepts but the model rejects (e.g. zero total density)
        raise SchemaError(str(exc), path="<model>") from exc
    analysis = doc.get("analysis", {})
    return Scenario(
        name=doc["name"],
        config=config,
        betas=betas,
        thresholds_db=thresholds,
        plan=plan,
        compare=compare,
        series_tolerance=analysis.get("series_tolerance", 1e-8),
        exact_dominant=analysis.get("exact_dominant", False),
        laplace_rate=analysis.get("laplace_rate", False),
        workers=analysis.get("workers"),
        outputs=dict(doc.get("output", {})),
        source=Path(source) if source is not None else None,
    )


def load_scenario(path):
    """Read, validate and build a scenario from a YAML file."""
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise SchemaError(f"{path}: not valid YAML ({exc})", path="<root>") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be a mapping", path="<root>")
    return build(doc, source=path)
