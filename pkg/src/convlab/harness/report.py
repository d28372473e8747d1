"""Scenario parameters and reports, with a stable JSON form."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"

DEFAULT_PRECISION = 256


def default_precision() -> int:
    raw = os.environ.get("CONVLAB_PRECISION")
    if raw is None:
        return DEFAULT_PRECISION
    try:
        bits = int(raw)
    except ValueError:
        raise ValueError(f"CONVLAB_PRECISION must be an integer, got {raw!r}") from None
    if bits < 32:
        raise ValueError("CONVLAB_PRECISION must be >= 32")
    return bits


@dataclass(frozen=True)
class ScenarioParams:
    scenario: str
    horizon: int
    eps: tuple[str, ...]
    samples: int
    seed: int
    precision: int
    k_max: int
    polys: int

    def __post_init__(self):
        for name in ("horizon", "samples", "precision", "k_max", "polys"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.precision < 32:
            raise ValueError("precision must be >= 32")
        for e in self.eps_values():
            if e <= 0:
                raise ValueError("eps values must be positive")

    def eps_values(self) -> list[Fraction]:
        return [Fraction(e) for e in self.eps]

    def with_overrides(self, **kw) -> "ScenarioParams":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "eps" in kw:
            kw["eps"] = tuple(str(Fraction(e)) for e in kw["eps"])
        return replace(self, **kw)


@dataclass(frozen=True)
class Check:
    name: str
    claim: str
    status: str
    certificate: str
    payload: dict = field(default_factory=dict)


@dataclass
class ScenarioReport:
    scenario: str
    params: ScenarioParams
    checks: list[Check]
    seed: int
    precision: int
    runtime_ms: int = 0

    @property
    def outcome(self) -> str:
        statuses = {c.status for c in self.checks}
        if FAIL in statuses:
            return FAIL
        if INDETERMINATE in statuses:
            return INDETERMINATE
        return PASS

    def exit_code(self) -> int:
        return {PASS: 0, FAIL: 1, INDETERMINATE: 2}[self.outcome]

    def to_dict(self, with_runtime: bool = True) -> dict:
        d = {
            "scenario": self.scenario,
            "params": asdict(self.params),
            "checks": [asdict(c) for c in self.checks],
            "seed": self.seed,
            "precision": self.precision,
        }
        d["params"]["eps"] = list(self.params.eps)
        if with_runtime:
            d["runtime_ms"] = self.runtime_ms
        return d

    def to_json(self, with_runtime: bool = True) -> str:
        return json.dumps(self.to_dict(with_runtime), indent=2, sort_keys=False)

    def payload_json(self) -> str:
        """The report without the runtime field; identical across reruns."""
        return self.to_json(with_runtime=False)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioReport":
        d = json.loads(text)
        p = d["params"]
        p["eps"] = tuple(p["eps"])
        params = ScenarioParams(**{f.name: p[f.name] for f in fields(ScenarioParams)})
        checks = [Check(**c) for c in d["checks"]]
        return cls(d["scenario"], params, checks, d["seed"], d["precision"], d.get("runtime_ms", 0))

    def to_text(self) -> str:
        lines = [f"scenario {self.scenario}: {self.outcome.upper()}  (seed {self.seed}, {self.precision} bits, {self.runtime_ms} ms)"]
        for c in self.checks:
            lines.append(f"  [{c.status:^13}] {c.name}: {c.claim}")
            lines.append(f"                  {c.certificate}")
        return "\n".join(lines)
