"""
Resource reporting for MBM Forensics.

Captures the machine an experiment ran on (OS, CPU, memory) and the peak
resident memory of the process, so timing tables can be read in context.
"""

import os
import platform
import time
from dataclasses import dataclass, asdict
from typing import Dict, Any

import psutil

from ..utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class ResourceSnapshot:
    """Machine description plus current process usage."""
    os_name: str
    processor: str
    cpu_count: int
    memory_total_gb: float
    process_rss_mb: float
    disk_free_gb: float
    timestamp: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class PerformanceMonitor:
    """Reads system and process statistics through psutil."""

    def __init__(self, disk_path: str = "."):
        self.disk_path = disk_path
        self._process = psutil.Process()
        self._peak_rss_mb = 0.0

    def snapshot(self) -> ResourceSnapshot:
        """Take a ResourceSnapshot; never raises."""
        try:
            rss_mb = self._process.memory_info().rss / (1024 * 1024)
            self._peak_rss_mb = max(self._peak_rss_mb, rss_mb)
            disk_free_gb = psutil.disk_usage(os.path.abspath(self.disk_path)).free / (1024 ** 3)
            return ResourceSnapshot(
                os_name=f"{platform.system()} {platform.release()}",
                processor=platform.processor() or platform.machine(),
                cpu_count=psutil.cpu_count(logical=True) or 1,
                memory_total_gb=psutil.virtual_memory().total / (1024 ** 3),
                process_rss_mb=rss_mb,
                disk_free_gb=disk_free_gb,
                timestamp=time.time(),
            )
        except Exception as e:
            logger.error(f"Failed to get resource stats: {e}")
            return ResourceSnapshot(
                os_name=platform.system(),
                processor="unknown",
                cpu_count=1,
                memory_total_gb=0.0,
                process_rss_mb=0.0,
                disk_free_gb=0.0,
                timestamp=time.time(),
            )

    @property
    def peak_rss_mb(self) -> float:
        return self._peak_rss_mb
