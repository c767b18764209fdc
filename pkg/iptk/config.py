"""
IPTK - Configuration, Logging and Proof Statistics

Central place for the toolkit's tunables (read from the environment),
the logging setup shared by every module, and the thread-safe statistics
collector that the checker and the transformations report into.
"""

import logging
import os
import sys
from dataclasses import dataclass, field
from threading import Lock
from time import time
from typing import Any, Dict, List

logging.basicConfig(
    level=getattr(logging, os.getenv("IPTK_LOG_LEVEL", "INFO").upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

# Proof objects nest formulas deeply (long premise chains, deduction output).
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclass
class Config:
    """Configuration for proof construction, search and checking."""

    cache_dir: str = ""
    seed: int = 0
    max_worlds: int = 6
    prover_budget: int = 200000
    ext_depth: int = 1
    ext_instances: int = 8
    unfold_bound: int = 10 ** 6
    log_level: str = "INFO"
    shipped_logics: List[str] = field(default_factory=lambda: [
        "ipc", "kc", "lc", "lc-impl"
    ])
    shipped_pairs: List[str] = field(default_factory=lambda: [
        "kc-ipc", "lc-lc"
    ])

    @property
    def cache_enabled(self) -> bool:
        return bool(self.cache_dir)

    @classmethod
    def from_env(cls) -> 'Config':
        return cls(
            cache_dir=os.getenv("IPTK_CACHE", ""),
            seed=int(os.getenv("IPTK_SEED", "0")),
            max_worlds=int(os.getenv("IPTK_MAX_WORLDS", "6")),
            prover_budget=int(os.getenv("IPTK_PROVER_BUDGET", "200000")),
            ext_depth=int(os.getenv("IPTK_EXT_DEPTH", "1")),
            ext_instances=int(os.getenv("IPTK_EXT_INSTANCES", "8")),
            unfold_bound=int(os.getenv("IPTK_UNFOLD_BOUND", str(10 ** 6))),
            log_level=os.getenv("IPTK_LOG_LEVEL", "INFO").upper(),
        )


config = Config.from_env()


@dataclass
class ProofStats:
    """Track checker and transformation activity."""

    checks: int = 0
    checks_ok: int = 0
    checks_failed: int = 0
    lines_checked: int = 0
    transforms: Dict[str, int] = field(default_factory=dict)
    largest_proof: int = 0
    _latencies: List[float] = field(default_factory=list)
    _lock: Lock = field(default_factory=Lock)

    def record_check(self, ok: bool, lines: int, size: int, latency_ms: float):
        with self._lock:
            self.checks += 1
            if ok:
                self.checks_ok += 1
            else:
                self.checks_failed += 1
            self.lines_checked += lines
            self.largest_proof = max(self.largest_proof, size)
            self._latencies.append(latency_ms)
            if len(self._latencies) > 1000:
                self._latencies = self._latencies[-1000:]

    def record_transform(self, name: str, size: int):
        with self._lock:
            self.transforms[name] = self.transforms.get(name, 0) + 1
            self.largest_proof = max(self.largest_proof, size)

    def get_stats(self) -> Dict[str, Any]:
        with self._lock:
            total = max(self.checks, 1)
            avg_latency = sum(self._latencies) / len(self._latencies) if self._latencies else 0
            return {
                "checks": self.checks,
                "checks_ok": self.checks_ok,
                "checks_failed": self.checks_failed,
                "pass_rate": round(self.checks_ok / total, 3),
                "lines_checked": self.lines_checked,
                "largest_proof": self.largest_proof,
                "transforms": dict(self.transforms),
                "avg_check_ms": round(avg_latency, 2),
                "uptime_seconds": int(time() - _start_time)
            }

    def reset(self):
        with self._lock:
            self.checks = 0
            self.checks_ok = 0
            self.checks_failed = 0
            self.lines_checked = 0
            self.largest_proof = 0
            self.transforms.clear()
            self._latencies.clear()


_metrics = ProofStats()
_start_time = time()


def get_metrics() -> Dict[str, Any]:
    return _metrics.get_stats()


def get_stats_collector() -> ProofStats:
    return _metrics


def get_config() -> Dict[str, Any]:
    return {
        "cache_dir": config.cache_dir or "(memory)",
        "seed": config.seed,
        "max_worlds": config.max_worlds,
        "prover_budget": config.prover_budget,
        "ext_depth": config.ext_depth,
        "ext_instances": config.ext_instances,
        "unfold_bound": config.unfold_bound,
        "log_level": config.log_level,
        "shipped_logics": ",".join(config.shipped_logics),
        "shipped_pairs": ",".join(config.shipped_pairs),
    }
