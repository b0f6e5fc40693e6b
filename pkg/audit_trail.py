# Run metadata for a RiskBench run.
# Nothing in here may feed the CSV or the text report: those must be
# byte-identical for a given (plan, seed) whatever the machine or thread count.

import platform
import time
from dataclasses import dataclass, field


@dataclass
class BenchAudit:
    """
    Timings and environment of one bench or calibration run.
    Populated by RiskBench as phases complete; printed by the CLI and
    rendered into the PDF summary.
    """

    # Inputs
    command: str = "bench"
    seed: int = 0
    threads: int = 1

    # Environment
    python_version: str = field(default_factory=platform.python_version)
    machine: str = field(default_factory=platform.machine)

    # Wall-clock seconds per phase, in the order the phases ran
    timings: dict[str, float] = field(default_factory=dict)
    grid_points: list[int] = field(default_factory=list)   # N_j per level of the system used
    warnings: list[str] = field(default_factory=list)

    _started: dict[str, float] = field(default_factory=dict, repr=False)

    def start(self, phase: str) -> None:
        self._started[phase] = time.perf_counter()

    def stop(self, phase: str) -> float:
        elapsed = time.perf_counter() - self._started.pop(phase)
        self.timings[phase] = self.timings.get(phase, 0.0) + elapsed
        return elapsed

    def warn(self, message: str) -> None:
        print(f"[Audit] WARNING: {message}")
        self.warnings.append(message)

    @property
    def total_seconds(self) -> float:
        return sum(self.timings.values())

    def summary_lines(self) -> list[str]:
        lines = [f"command={self.command} seed={self.seed} threads={self.threads}",
                 f"python={self.python_version} machine={self.machine}"]
        lines += [f"{phase}: {secs:.2f}s" for phase, secs in self.timings.items()]
        lines += [f"warning: {w}" for w in self.warnings]
        return lines
