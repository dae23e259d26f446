"""Run configuration shared by the optimizers and the CLI."""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

SEED_ENV = "CHOI_LAB_SEED"


@dataclass(frozen=True)
class RunConfig:
    """Numerical knobs for see-saw searches, oracles and certificates.

    Attributes:
        seed: base seed; restart ``r`` uses the stream ``(seed, r)``.
        restarts: number of see-saw restarts.
        max_sweeps: sweep cap per restart.
        improve_tol: a restart is converged after 3 successive sweeps improving less than this.
        oracle_cap: the sampling oracle runs when ``m * n`` is at most this.
        oracle_tol: see-saw and oracle must agree within this to certify.
        degeneracy_tol: ``mu >= 1 - degeneracy_tol`` counts as "not entangled".
        safety_margin: slack added to heuristic norm values before certifying an upper-bound test.
        max_d: largest single-copy dimension accepted by two-copy analyses.
        tol: threshold below which a block-positivity minimum counts as negative.
        herm_tol: relative Hermiticity / zero-eigenvalue band.
        witness_samples: number of states sampled inside a projection by the witness builder.
    """

    seed: int = 0
    restarts: int = 32
    max_sweeps: int = 500
    improve_tol: float = 1e-10
    oracle_cap: int = 16
    oracle_tol: float = 1e-6
    degeneracy_tol: float = 1e-7
    safety_margin: float = 1e-4
    max_d: int = 6
    tol: float = 1e-9
    herm_tol: float = 1e-9
    witness_samples: int = 500

    def __post_init__(self):
        for name in ("improve_tol", "oracle_tol", "degeneracy_tol", "safety_margin", "tol", "herm_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("restarts", "max_sweeps", "max_d"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.oracle_cap < 0 or self.witness_samples < 0:
            raise ValueError("oracle_cap and witness_samples must be >= 0")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path | None = None, env: dict | None = None) -> "RunConfig":
        """Build a config from an optional JSON file, falling back to ``CHOI_LAB_SEED`` for the seed."""
        env = os.environ if env is None else env
        data = {}
        if path is not None:
            data = json.loads(Path(path).read_text())
        if "seed" not in data and env.get(SEED_ENV):
            data["seed"] = int(env[SEED_ENV])
        return cls.from_dict(data)


DEFAULT = RunConfig()
