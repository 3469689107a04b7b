"""Batch verification runner: config parsing, suites and report emission."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .algebra import ConfigFunction, character, involution, random_function, star, unit
from .ground import ContinuousSpace, ExactSpace, intensity_of
from .ktransform import homomorphism_residual, k_apply, k_inverse
from .lebesgue_poisson import cylinder_consistency_residual, lambda_total, lp_integral
from .moments import (
    character_norm_bound,
    commutator_residual,
    gram_matrix,
    growth_check,
    inner_product,
    norm,
    operator_matrix,
    s_apply,
    subcharacter_tails,
    symmetry_residual,
)
from .process import (
    ProcessSampler,
    consistency_check,
    finite_mass_trend,
    laplace_closed_form,
    laplace_estimate,
    lp_p_residual,
    open_set_hits,
)
from .spectral import (
    bernoulli_residual,
    eigenvalue_residual,
    joint_diagonalize,
    laplace_of_rho,
    spectral_moment_residual,
)

SUITES = ("algebra", "ktransform", "measures", "process", "moment", "spectral")

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "ground": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "atoms": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["label", "weight"],
                        "properties": {"label": {"type": "string"}, "weight": {"type": "number"}},
                    },
                },
                "n_atoms": {"type": "integer", "minimum": 1, "maximum": 12},
                "weight_range": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
        },
        "continuous": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "low": {"type": "array", "items": {"type": "number"}, "minItems": 1, "maxItems": 2},
                "high": {"type": "array", "items": {"type": "number"}, "minItems": 1, "maxItems": 2},
                "order": {"type": "integer", "minimum": 2},
            },
        },
        "suite": {
            "oneOf": [
                {"enum": list(SUITES) + ["all"]},
                {"type": "array", "items": {"enum": list(SUITES)}},
            ]
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "samples": {"type": "integer", "minimum": 100},
        "trials": {"type": "integer", "minimum": 1},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "exact": {"type": "number", "exclusiveMinimum": 0},
                "operator": {"type": "number", "exclusiveMinimum": 0},
                "spectral": {"type": "number", "exclusiveMinimum": 0},
                "series": {"type": "number", "exclusiveMinimum": 0},
                "sigmas": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "format": {"enum": ["json", "csv", "both"]},
            },
        },
    },
}

DEFAULT_TOLERANCES = {"exact": 1e-12, "operator": 1e-10, "spectral": 1e-8, "series": 1e-10, "sigmas": 3.0}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    exact: ExactSpace
    continuous: ContinuousSpace
    suites: list
    seed: int = 0
    samples: int = 100_000
    trials: int = 20
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out_dir: str = "reports"
    format: str = "both"
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict, seed: int | None = None, suite: str | None = None) -> "ExperimentConfig":
        validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
        errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.path))
        if errors:
            lines = []
            for err in errors:
                where = "/".join(str(p) for p in err.path) or "<root>"
                lines.append(f"{where}: {err.message}")
            raise ConfigError("invalid config:\n  " + "\n  ".join(lines))
        seed = raw.get("seed", 0) if seed is None else seed
        ground = raw.get("ground", {})
        try:
            if "atoms" in ground:
                exact = ExactSpace(
                    tuple(a["label"] for a in ground["atoms"]), tuple(a["weight"] for a in ground["atoms"])
                )
            else:
                lo, hi = ground.get("weight_range", [0.2, 0.8])
                rng = np.random.default_rng(seed)
                exact = ExactSpace.random(ground.get("n_atoms", 6), rng, lo, hi)
            cont = raw.get("continuous", {})
            continuous = ContinuousSpace(cont.get("low", [0.0]), cont.get("high", [1.0]), order=cont.get("order", 32))
        except ValueError as exc:
            raise ConfigError(f"invalid ground space: {exc}") from exc
        suite = raw.get("suite", "all") if suite is None else suite
        if isinstance(suite, str):
            if suite != "all" and suite not in SUITES:
                raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)} or all")
            suites = list(SUITES) if suite == "all" else [suite]
        else:
            suites = list(suite)
        tolerances = dict(DEFAULT_TOLERANCES)
        tolerances.update(raw.get("tolerances", {}))
        out = raw.get("output", {})
        return cls(
            exact=exact,
            continuous=continuous,
            suites=suites,
            seed=int(seed),
            samples=raw.get("samples", 100_000),
            trials=raw.get("trials", 20),
            tolerances=tolerances,
            out_dir=out.get("dir", "reports"),
            format=out.get("format", "both"),
            raw=raw,
        )


@dataclass
class Check:
    suite: str
    name: str
    anchor: str
    value: float | None
    expected: float | None
    tolerance: float | None
    passed: bool
    residual: float | None = None
    mask: int | None = None


@dataclass
class RunReport:
    checks: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"checks": [asdict(c) for c in self.checks], "environment": self.environment}

    @classmethod
    def from_dict(cls, obj: dict) -> "RunReport":
        return cls([Check(**c) for c in obj["checks"]], obj["environment"])

    def __eq__(self, other):
        if not isinstance(other, RunReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


CSV_FIELDS = ["suite", "name", "anchor", "mask", "value", "expected", "residual", "tolerance", "passed"]


def emit(report: RunReport, fmt: str, path: str | Path | None = None) -> str:
    """Serialise ``report`` as ``json`` or ``csv``; also write it to ``path`` when given."""
    if fmt == "json":
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for c in report.checks:
            writer.writerow({k: getattr(c, k) for k in CSV_FIELDS})
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def parse(text: str) -> RunReport:
    return RunReport.from_dict(json.loads(text))


def _check(suite, name, anchor, value, expected, tol, residual=None, mask=None, passed=None) -> Check:
    if residual is None and value is not None and expected is not None:
        residual = abs(value - expected)
    if passed is None:
        passed = residual is not None and residual <= tol
    return Check(
        suite,
        name,
        anchor,
        None if value is None else float(value),
        None if expected is None else float(expected),
        None if tol is None else float(tol),
        bool(passed),
        None if residual is None else float(residual),
        mask,
    )


def _rng(cfg: ExperimentConfig, salt: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, salt])


def suite_algebra(cfg: ExperimentConfig) -> list:
    sp, tol = cfg.exact, cfg.tolerances["exact"]
    rng = _rng(cfg, 1)
    level = min(3, sp.size)
    worst = {"commutativity": 0.0, "associativity": 0.0, "unit": 0.0, "involution": 0.0}
    exact_failures = 0
    for _ in range(cfg.trials):
        f, g, h = (random_function(sp, level, rng) for _ in range(3))
        worst["commutativity"] = max(worst["commutativity"], star(f, g).max_abs_diff(star(g, f)))
        worst["associativity"] = max(
            worst["associativity"], star(star(f, g), h).max_abs_diff(star(f, star(g, h)))
        )
        worst["unit"] = max(worst["unit"], star(unit(sp), f).max_abs_diff(f))
        worst["involution"] = max(
            worst["involution"], involution(star(f, g)).max_abs_diff(star(involution(g), involution(f)))
        )
        fe, ge, he = (random_function(sp, level, rng, exact=True) for _ in range(3))
        exact_failures += int(star(fe, ge) != star(ge, fe))
        exact_failures += int(star(star(fe, ge), he) != star(fe, star(ge, he)))
        exact_failures += int(star(unit(sp), fe) != fe)
        exact_failures += int(involution(star(fe, ge)) != star(involution(ge), involution(fe)))
    out = [_check("algebra", k, "commutative algebra with involution", v, 0.0, tol) for k, v in worst.items()]
    out.append(
        _check("algebra", "rational_axioms", "commutative algebra with involution", exact_failures, 0, 0,
               residual=exact_failures)
    )
    char = 0.0
    for _ in range(cfg.trials):
        phi, psi = sp.function(rng.uniform(-1, 1, sp.size)), sp.function(rng.uniform(-1, 1, sp.size))
        lhs = star(character(phi), character(psi))
        char = max(char, lhs.max_abs_diff(character(phi + psi + phi * psi)))
    out.append(_check("algebra", "character_law", "character product", char, 0.0, tol))
    return out


def suite_ktransform(cfg: ExperimentConfig) -> list:
    sp, tol = cfg.exact, cfg.tolerances["exact"]
    rng = _rng(cfg, 2)
    level = min(3, sp.size)
    inv1 = inv2 = hom = lin = 0.0
    for _ in range(cfg.trials):
        f, g = random_function(sp, level, rng), random_function(sp, level, rng)
        inv1 = max(inv1, k_inverse(k_apply(f), level).max_abs_diff(f))
        table = rng.uniform(-1, 1, 1 << sp.size)
        back = k_apply(k_inverse(lambda gamma: table[gamma.mask], sp.size, sp)).table()
        inv2 = max(inv2, float(np.max(np.abs(back - table))))
        hom = max(hom, homomorphism_residual(f, g))
        a, b = complex(*rng.uniform(-1, 1, 2)), complex(*rng.uniform(-1, 1, 2))
        lhs = k_apply(a * f + b * g).table()
        rhs = a * k_apply(f).table() + b * k_apply(g).table()
        lin = max(lin, float(np.max(np.abs(lhs - rhs))))
    return [
        _check("ktransform", "inverse_after_forward", "Moebius inverse", inv1, 0.0, tol),
        _check("ktransform", "forward_after_inverse", "Moebius inverse", inv2, 0.0, tol),
        _check("ktransform", "homomorphism", "K maps star to pointwise product", hom, 0.0, tol),
        _check("ktransform", "linearity", "K is linear", lin, 0.0, tol),
    ]


def suite_measures(cfg: ExperimentConfig) -> list:
    sp, tol = cfg.exact, cfg.tolerances["exact"]
    out = []
    big = ContinuousSpace([0.0], [2.0])
    for sigma in (0.5, 1.0, 2.0):
        win = big.window([0.0], [sigma])
        series = lp_integral(character(big.constant(1.0, ([0.0], [sigma]))), win)
        out.append(
            _check("measures", f"lambda_total_sigma_{sigma}", "total Lebesgue-Poisson mass", series,
                   lambda_total(win).value, cfg.tolerances["series"])
        )
    ones = character(sp.function(np.ones(sp.size)))
    total = lambda_total(sp.window())
    out.append(_check("measures", "exact_total_mass", "subset-product total", complex(lp_integral(ones)).real,
                      total.value, tol))
    rng = _rng(cfg, 3)
    worst = 0.0
    labels = sp.labels
    inner = sp.window(labels[: max(1, sp.size // 2)])
    for _ in range(cfg.trials):
        event = {m for m in range(1 << sp.size) if m & ~inner.mask == 0 and rng.random() < 0.5}
        worst = max(worst, cylinder_consistency_residual(event, sp.window(), inner))
    out.append(_check("measures", "cylinder_consistency", "consistent normalised restrictions", worst, 0.0, tol))
    neg = 0.0
    for _ in range(cfg.trials):
        f = random_function(sp, min(3, sp.size), rng)
        neg = min(neg, complex(lp_integral(star(f, involution(f)))).real)
    out.append(_check("measures", "positivity", "positive functional", neg, 0.0, tol, residual=max(-neg, 0.0),
                      passed=neg >= -tol))
    return out


def suite_process(cfg: ExperimentConfig) -> list:
    n, k = cfg.samples, cfg.tolerances["sigmas"]
    cs, sp = cfg.continuous, cfg.exact
    out = []
    win = cs.window()
    tests = {
        "ln2": cs.constant(math.log(2.0)),
        "minus_one": cs.constant(-1.0),
        "linear": cs.function(lambda x: x[:, 0] - cs.low[0]),
        "sine": cs.function(lambda x: 0.5 * np.sin(2 * np.pi * x[:, 0])),
        "bump": cs.function(lambda x: np.exp(-((x[:, 0] - 0.5) ** 2) / 0.1)),
    }
    sampler = ProcessSampler(win, cfg.seed)
    for j, (name, f) in enumerate(tests.items()):
        est, se = laplace_estimate(sampler, f, n, replica=10 + j)
        exact = laplace_closed_form(f, win)
        out.append(_check("process", f"laplace_{name}", "Laplace transform of the Poisson measure", est, exact,
                          k * se))
    w = sp.w
    ex_sampler = ProcessSampler(sp.window(), cfg.seed)
    est, se = laplace_estimate(ex_sampler, sp.function(np.log(1 + np.arange(sp.size) / sp.size)), n)
    out.append(_check("process", "laplace_bernoulli", "exact-mode Laplace functional", est,
                      laplace_closed_form(sp.function(np.log(1 + np.arange(sp.size) / sp.size))), k * se))
    counts = sampler.sample(n).counts
    out.append(_check("process", "mean_count", "Poisson count law", counts.mean(), sampler.mass,
                      k * math.sqrt(sampler.mass / n)))
    rng = _rng(cfg, 4)
    worst = 0.0
    for _ in range(cfg.trials):
        worst = max(worst, lp_p_residual(random_function(sp, min(3, sp.size), rng)).residual)
    out.append(_check("process", "lp_p_exact", "Lebesgue-Poisson / Poisson relation", worst, 0.0,
                      cfg.tolerances["exact"]))
    for j, (c, level) in enumerate(((0.7, 8), (0.3, 3), (-0.5, 5))):
        phi = cs.constant(c / intensity_of(win))
        res = lp_p_residual(character(phi, level), n, window=win, seed=cfg.seed + 100 + j)
        out.append(_check("process", f"lp_p_mc_{j}", "Lebesgue-Poisson / Poisson relation", res.rhs, res.lhs,
                          k * res.std_error))
    half = cs.window(cs.low, [0.5 * (cs.low[0] + cs.high[0])] + list(cs.high[1:]))
    rep = consistency_check(win, half, n, cfg.seed)
    out.append(_check("process", "consistency_mean", "projective consistency", rep.projected_mean,
                      rep.direct_mean, k * rep.mean_se))
    out.append(_check("process", "consistency_var", "projective consistency", rep.projected_var,
                      rep.direct_var, k * rep.var_se))
    rep = consistency_check(sp.window(), sp.window(sp.labels[:1]), n, cfg.seed)
    incl = next(iter(rep.inclusion.values()))
    out.append(_check("process", "consistency_bernoulli", "projective consistency", incl["projected"],
                      incl["weight"], k * math.sqrt(w[0] * (1 - w[0]) / n)))
    line = ContinuousSpace([0.0], [5.0])
    trend = finite_mass_trend([line.window([0.0], [float(m)]) for m in range(1, 6)], n, cfg.seed)
    for s, f, p, se in zip(trend.intensities, trend.fractions, trend.predicted, trend.std_errors):
        out.append(_check("process", f"finite_mass_sigma_{s:g}", "finite configurations are null", f, p,
                          k * se, passed=abs(f - p) <= k * se if se > 0 else f == p))
    hit = open_set_hits(win, half, n, cfg.seed + 7)
    out.append(_check("process", "open_set_hits", "positive on open sets", hit.lhs, hit.rhs, k * hit.std_error))
    return out


def suite_moment(cfg: ExperimentConfig) -> list:
    sp, tol = cfg.exact, cfg.tolerances["operator"]
    rng = _rng(cfg, 5)
    bundle = gram_matrix(sp)
    out = [
        _check("moment", "gram_min_eigenvalue", "positivity", bundle.min_eigenvalue, 0.0, None,
               residual=None, passed=bundle.min_eigenvalue > 0)
    ]
    oracle = 0.0
    basis = bundle.basis
    for i in range(len(basis)):
        for j in range(i, len(basis)):
            fa = ConfigFunction(sp, {basis[i]: 1})
            fb = ConfigFunction(sp, {basis[j]: 1})
            oracle = max(oracle, abs(complex(inner_product(fa, fb)) - bundle.gram[i, j]))
    out.append(_check("moment", "gram_closed_form", "quasi-scalar product", oracle, 0.0,
                      cfg.tolerances["exact"]))
    sym = comm = 0.0
    for _ in range(cfg.trials):
        phi, psi = sp.function(rng.normal(size=sp.size)), sp.function(rng.normal(size=sp.size))
        sym = max(sym, symmetry_residual(operator_matrix(phi, bundle), bundle))
        comm = max(comm, commutator_residual(phi, psi, bundle))
    out.append(_check("moment", "symmetry", "selfadjoint family", sym, 0.0, tol))
    out.append(_check("moment", "commutator", "commuting family", comm, 0.0, tol))
    bound_ok, tails_ok = True, True
    for _ in range(cfg.trials):
        phi = sp.function(rng.uniform(0.05, 1.5, sp.size))
        norm_sq, bound = character_norm_bound(phi)
        direct = complex(inner_product(character(phi), character(phi))).real
        bound_ok &= norm_sq <= bound and abs(direct - norm_sq) <= cfg.tolerances["exact"] * max(1, norm_sq)
        tails = subcharacter_tails(phi)
        tails_ok &= all(b < a for a, b in zip(tails, tails[1:]))
    out.append(_check("moment", "character_norm_bound", "characters belong to the space", None, None, None,
                      passed=bound_ok))
    out.append(_check("moment", "subcharacter_tails", "subcharacters converge", None, None, None,
                      passed=tails_ok))
    cont = 0.0
    for _ in range(cfg.trials):
        f = random_function(sp, sp.size, rng)
        cont = max(cont, abs(complex(s_apply(f))) - norm(f))
    out.append(_check("moment", "s_continuity", "s is bounded by the norm", cont, 0.0, cfg.tolerances["exact"],
                      residual=max(cont, 0.0), passed=cont <= cfg.tolerances["exact"]))
    masses, bounds = growth_check(sp.window())
    out.append(_check("moment", "growth_bound", "level growth bound", float(np.max(masses - bounds)), 0.0, 0.0,
                      residual=max(float(np.max(masses - bounds)), 0.0), passed=bool(np.all(masses <= bounds))))
    return out


def suite_spectral(cfg: ExperimentConfig) -> list:
    sp, tol = cfg.exact, cfg.tolerances["spectral"]
    rng = _rng(cfg, 6)
    bundle = gram_matrix(sp)
    report = joint_diagonalize(bundle, seed=cfg.seed)
    out = [
        _check("spectral", "bernoulli_residual", "spectral measure is Poisson", bernoulli_residual(report), 0.0,
               tol),
        _check("spectral", "weight_sum", "spectral measure is a probability", report.weights.sum(), 1.0,
               cfg.tolerances["operator"]),
    ]
    eig = mom = lap = 0.0
    for _ in range(cfg.trials):
        eig = max(eig, eigenvalue_residual(sp.function(rng.normal(size=sp.size)), report, bundle))
        mom = max(mom, spectral_moment_residual(random_function(sp, sp.size, rng), report))
        lhs, rhs = laplace_of_rho(sp.function(rng.normal(scale=0.7, size=sp.size)), report)
        lap = max(lap, abs(lhs - rhs))
    out.append(_check("spectral", "eigenvalue_additivity", "joint generalized eigenvector", eig, 0.0, tol))
    out.append(_check("spectral", "moment_representation", "s as integral against rho", mom, 0.0,
                      cfg.tolerances["operator"]))
    out.append(_check("spectral", "laplace_of_rho", "essential equality", lap, 0.0, tol))
    for row in report.rows():
        out.append(_check("spectral", "spectral_weight", "recovered spectral weight", row["recovered"],
                          row["predicted"], tol, mask=row["mask"]))
    return out


SUITE_FUNCS = {
    "algebra": suite_algebra,
    "ktransform": suite_ktransform,
    "measures": suite_measures,
    "process": suite_process,
    "moment": suite_moment,
    "spectral": suite_spectral,
}


def run(cfg: ExperimentConfig) -> RunReport:
    checks = []
    timings = {}
    for name in cfg.suites:
        start = time.perf_counter()
        checks.extend(SUITE_FUNCS[name](cfg))
        timings[name] = round(time.perf_counter() - start, 3)
    env = {
        "seed": cfg.seed,
        "version": __version__,
        "suites": list(cfg.suites),
        "atoms": {lab: float(w) for lab, w in zip(cfg.exact.labels, cfg.exact.weights)},
        "samples": cfg.samples,
        "trials": cfg.trials,
        "rng": "numpy Philox (seed + replica)",
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "timings": timings,
    }
    return RunReport(checks, env)
