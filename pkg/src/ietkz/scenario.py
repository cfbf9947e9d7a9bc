"""Scenario files: strict parsing, backend construction, reproducible sampling."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional

from .combinatorics import CombinatorialData, validate_pi
from .errors import (
    InvalidLengths,
    NotBijection,
    NotSuspensionVector,
    ParseError,
    Reducible,
    ValidationError,
)
from .induction import InductionState, canonical_tau, make_state
from .numerics import Ball, scalar_from_json

KNOWN_KEYS = {
    "alphabet",
    "top",
    "bottom",
    "backend",
    "D",
    "precision_bits",
    "max_bits",
    "lambda",
    "tau",
    "depth",
    "backward_depth",
    "zorich_depth",
    "tolerance",
    "seed",
    "test_functions",
    "diagram_cap",
    "connection_depth",
}

TEST_FUNCTION_KEYS = {"count", "modes", "eta"}


@dataclass
class Scenario:
    pi: CombinatorialData
    backend: str
    lam_spec: list
    tau_spec: Optional[list]
    precision_bits: int = 256
    max_bits: int = 4096
    depth: int = 20
    backward_depth: int = 20
    zorich_depth: Optional[int] = None
    tolerance: float = 0.2
    seed: int = 0
    test_functions: Dict[str, float] = field(default_factory=lambda: {"count": 2, "modes": 4, "eta": 0.5})
    diagram_cap: int = 100000
    connection_depth: int = 50

    def rng(self) -> random.Random:
        return random.Random(self.seed)

    def _scalar(self, spec, bits: Optional[int] = None):
        value = scalar_from_json(spec, bits or self.precision_bits)
        if self.backend == "ball" and not isinstance(value, Ball):
            value = Ball.exact(value, bits or self.precision_bits)
        return value

    def state(self, bits: Optional[int] = None) -> InductionState:
        lam = tuple(self._scalar(x, bits) for x in self.lam_spec)
        tau = tuple(self._scalar(x, bits) for x in self.tau_spec) if self.tau_spec else None
        try:
            return make_state(self.pi, lam, tau)
        except (InvalidLengths, NotSuspensionVector) as exc:
            raise ValidationError(str(exc)) from exc

    def rebuild(self):
        return lambda bits: self.state(bits)


def parse_scenario(path: str) -> Scenario:
    """Strict scenario parse: unknown keys are rejected, the combinatorial
    data is validated, and the state is constructed once to surface
    suspension violations early (naming k and side)."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ParseError(str(exc), path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}", path) from exc
    return scenario_from_dict(raw, where=path)


def scenario_from_dict(raw: dict, where: str = "<dict>") -> Scenario:
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ParseError(f"unknown keys {sorted(unknown)}", where)
    for key in ("alphabet", "top", "bottom", "lambda", "backend"):
        if key not in raw:
            raise ParseError(f"missing required key {key!r}", where)
    backend = raw["backend"]
    if backend not in ("rational", "quadratic", "ball"):
        raise ParseError(f"unknown backend {backend!r}", where)
    tf = dict(raw.get("test_functions", {"count": 2, "modes": 4, "eta": 0.5}))
    if set(tf) - TEST_FUNCTION_KEYS:
        raise ParseError(f"unknown test_functions keys {sorted(set(tf) - TEST_FUNCTION_KEYS)}", where)
    pi = CombinatorialData(tuple(raw["alphabet"]), tuple(raw["top"]), tuple(raw["bottom"]))
    try:
        validate_pi(pi)
    except (NotBijection, Reducible) as exc:
        raise ValidationError(str(exc)) from exc
    sc = Scenario(
        pi=pi,
        backend=backend,
        lam_spec=list(raw["lambda"]),
        tau_spec=list(raw["tau"]) if "tau" in raw and raw["tau"] is not None else None,
        precision_bits=int(raw.get("precision_bits", 256)),
        max_bits=int(raw.get("max_bits", 4096)),
        depth=int(raw.get("depth", 20)),
        backward_depth=int(raw.get("backward_depth", 20)),
        zorich_depth=int(raw["zorich_depth"]) if raw.get("zorich_depth") is not None else None,
        tolerance=float(raw.get("tolerance", 0.2)),
        seed=int(raw.get("seed", 0)),
        test_functions={"count": int(tf.get("count", 2)), "modes": int(tf.get("modes", 4)), "eta": float(tf.get("eta", 0.5))},
        diagram_cap=int(raw.get("diagram_cap", 100000)),
        connection_depth=int(raw.get("connection_depth", 50)),
    )
    sc.state()  # validate lengths and suspension data now
    return sc


# ---------------------------------------------------------------------------
# reproducible sampling helpers


def sample_rational_lengths(pi: CombinatorialData, rng: random.Random, lo: int = 10**4, hi: int = 10**6) -> tuple:
    return tuple(Fraction(rng.randint(lo, hi), rng.randint(1, 97)) for _ in pi.letters)


def sample_rational_suspension(pi: CombinatorialData, rng: random.Random, den: int = 10007) -> tuple:
    """Canonical suspension vector plus a small random rational perturbation."""
    base = canonical_tau(pi)
    d = pi.d
    while True:
        tau = tuple(
            b + Fraction(rng.randint(-den // (2 * d), den // (2 * d)), den) for b in base
        )
        try:
            make_state(pi, tuple(Fraction(1) for _ in pi.letters), tau)
        except (InvalidLengths, NotSuspensionVector):
            continue
        if sum(tau) != 0:
            return tau


def golden_scenario_dict(depth: int = 40) -> dict:
    """The stock quadratic example: golden lengths with a golden suspension."""
    return {
        "alphabet": ["A", "B"],
        "top": ["A", "B"],
        "bottom": ["B", "A"],
        "backend": "quadratic",
        "lambda": [
            {"a": "1/2", "b": "1/2", "D": 5},
            {"a": "1/1", "b": "0/1", "D": 5},
        ],
        "tau": [
            {"a": "1/1", "b": "0/1", "D": 5},
            {"a": "1/2", "b": "-1/2", "D": 5},
        ],
        "depth": depth,
        "backward_depth": depth,
        "seed": 7,
    }
