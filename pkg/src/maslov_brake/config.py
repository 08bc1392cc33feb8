"""Run configuration: a versioned JSON document validated field by field."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from .errors import ConfigError

SCHEMA_VERSION = 1
TASKS = ("index", "iterate", "bott", "ineq", "split", "relindex", "solve", "verify", "corpus")

DEFAULT_TOLERANCES = {
    "period": 1e-6,
    "junction": 1e-8,
}


@dataclass
class RunConfig:
    """One task run.

    The coefficient system comes from ``system`` (a path or an inline
    coefficient-path document), ``normal_form`` (``["N1", 1, 1]``, ``["R", 2.0]``,
    ``["hyperbolic", 1.0]``) or the seeded ``corpus`` block.
    """

    task: str
    schema_version: int = SCHEMA_VERSION
    seed: int = 0
    system: object = None
    normal_form: Optional[list] = None
    corpus: Optional[dict] = None
    hamiltonian: object = None
    flavor: str = "l0"
    method: str = "both"
    omega: Optional[list] = None
    k: Optional[list] = None
    kind: str = "L0-fourier"
    theta: float = 0.0
    m_max: int = 64
    scan: Optional[list] = None
    tau: Optional[list] = None
    variant: Optional[str] = None
    seeds: Optional[list] = None
    morse_levels: list = field(default_factory=lambda: [8, 16])
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    workers: int = 1
    out: str = "out"

    # ---- construction -----------------------------------------------------

    @classmethod
    def from_dict(cls, d: dict, where: str = "config") -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError(f"{where}: top level must be a JSON object")
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"{where}: unknown field(s) {unknown}")
        if "task" not in d:
            raise ConfigError(f"{where}: missing field 'task'")
        tol = dict(DEFAULT_TOLERANCES)
        if "tolerances" in d:
            if not isinstance(d["tolerances"], dict):
                raise ConfigError(f"{where}: field 'tolerances' must be an object")
            bad = sorted(set(d["tolerances"]) - set(DEFAULT_TOLERANCES))
            if bad:
                raise ConfigError(f"{where}: unknown tolerance(s) {bad}")
            tol.update(d["tolerances"])
        cfg = cls(**{**d, "tolerances": tol})
        cfg.validate(where)
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        return cls.from_dict(data, str(path))

    def merged(self, overrides: dict) -> "RunConfig":
        d = asdict(self)
        d.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_dict(d, "command line")

    def to_dict(self) -> dict:
        return asdict(self)

    # ---- validation ---------------------------------------------------------

    def validate(self, where: str = "config") -> None:
        def fail(name, msg):
            raise ConfigError(f"{where}: field '{name}': {msg}")

        if self.schema_version != SCHEMA_VERSION:
            fail("schema_version", f"expected {SCHEMA_VERSION}, got {self.schema_version!r}")
        if self.task not in TASKS:
            fail("task", f"must be one of {list(TASKS)}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            fail("seed", "must be a non-negative integer")
        for name, v in self.tolerances.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                fail("tolerances", f"{name} must be a positive number")
        if self.flavor not in ("l0", "omega", "l0-omega"):
            fail("flavor", "must be l0, omega or l0-omega")
        if self.method not in ("winding", "galerkin", "both"):
            fail("method", "must be winding, galerkin or both")
        if self.kind not in ("L0-fourier", "L0-omega", "periodic-omega"):
            fail("kind", "must be L0-fourier, L0-omega or periodic-omega")
        if not isinstance(self.m_max, int) or self.m_max < 2:
            fail("m_max", "must be an integer >= 2")
        if not isinstance(self.workers, int) or self.workers < 1:
            fail("workers", "must be a positive integer")
        if not isinstance(self.theta, (int, float)):
            fail("theta", "must be a number")
        if self.k is not None:
            self.k = [self.k] if isinstance(self.k, int) else self.k
            if not self.k or not all(isinstance(v, int) and v >= 1 for v in self.k):
                fail("k", "must be a positive integer or a list of them")
        if self.tau is not None:
            self.tau = [self.tau] if isinstance(self.tau, (int, float)) else self.tau
            if not self.tau or not all(isinstance(v, (int, float)) and v > 0 for v in self.tau):
                fail("tau", "must be a positive number or a list of them")
        if self.omega is not None:
            self.omega = [self.omega] if isinstance(self.omega, (int, float)) else self.omega
            if not all(isinstance(v, (int, float)) for v in self.omega):
                fail("omega", "must be a list of angles")
        if self.scan is not None and (len(self.scan) != 3 or not int(self.scan[2]) >= 2):
            fail("scan", "must be [theta0, theta1, steps] with steps >= 2")
        if self.scan is not None and not 0 < float(self.scan[0]) < float(self.scan[1]) < math.pi:
            fail("scan", "angles must satisfy 0 < theta0 < theta1 < pi")
        if self.variant not in (None, "odd", "odd-dirichlet", "neumann"):
            fail("variant", "must be odd-dirichlet or neumann")
        if self.corpus is not None:
            allowed = {"n", "count", "scale", "order", "mixed", "dims", "scales"}
            if not isinstance(self.corpus, dict):
                fail("corpus", "must be an object")
            bad = sorted(set(self.corpus) - allowed)
            if bad:
                fail("corpus", f"unknown key(s) {bad}")
            if int(self.corpus.get("count", 1)) < 1:
                fail("corpus", "count must be >= 1")
        if self.normal_form is not None and (not isinstance(self.normal_form, list) or not self.normal_form):
            fail("normal_form", "must be a list like ['N1', 1, 1]")
        if not isinstance(self.morse_levels, list) or len(self.morse_levels) != 2 or not 1 <= self.morse_levels[0] <= self.morse_levels[1]:
            fail("morse_levels", "must be [m_first, m_last]")
        # task-specific requirements
        sources = sum(x is not None for x in (self.system, self.normal_form, self.corpus))
        if self.task in ("index", "iterate", "relindex") and sources != 1:
            fail("system", "exactly one of system, normal_form, corpus is required")
        if self.task in ("bott", "ineq", "split") and sources == 0:
            fail("system", "one of system, normal_form, corpus is required")
        if self.task == "corpus" and self.corpus is None:
            fail("corpus", "required for the corpus task")
        if self.task in ("iterate", "bott", "ineq") and self.k is None:
            fail("k", "required for this task")
        if self.task == "split" and self.omega is None:
            fail("omega", "required for the split task")
        if self.task == "index" and self.flavor != "l0" and self.omega is None:
            fail("omega", "required for the omega flavors")
        if self.task in ("solve", "verify"):
            if self.hamiltonian is None:
                fail("hamiltonian", "required for this task")
            if self.tau is None:
                fail("tau", "required for this task")
