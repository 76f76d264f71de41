"""Engine drivers."""

from sdnbi.engines.common import ALGORITHMS, EngineConfig, EngineResult, IterationRecord
from sdnbi.engines.mnbi import run_mnbi
from sdnbi.engines.sd import run_sd
from sdnbi.engines.sdnbi import run_sdnbi

RUNNERS = {"sd": run_sd, "mnbi": run_mnbi, "sdnbi": run_sdnbi}


def run(spec, cfg: EngineConfig, observer=None) -> EngineResult:
    """Run the engine named by ``cfg.algorithm``."""
    return RUNNERS[cfg.algorithm](spec, cfg, observer)


__all__ = ["ALGORITHMS", "EngineConfig", "EngineResult", "IterationRecord", "run", "run_sd", "run_mnbi", "run_sdnbi"]
