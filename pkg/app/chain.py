"""
Groupoid-dim 인증 체인 모듈
"""

import logging
import time
from typing import Optional


logger = logging.getLogger(__name__)

VERIFIED = "verified"
CITED = "cited"
UNSUPPORTED = "unsupported"


class CertificateChain:
    """인증 단계 추적

    Serialized steps carry no timing; durations only go to the log.
    """

    def __init__(self):
        self.start_time: Optional[float] = None
        self.end_time: Optional[float] = None
        self._last: Optional[float] = None
        self.steps: list[dict] = []

    def start(self):
        self.start_time = self._last = time.perf_counter()
        logger.debug("certificate chain started")

    def end(self):
        self.end_time = time.perf_counter()
        if self.start_time is not None:
            logger.info(
                "certificate chain finished: %d steps in %.3fs",
                len(self.steps), self.end_time - self.start_time,
            )

    def add_step(
        self,
        step: str,
        status: str,
        description: str,
        witness: Optional[str] = None,
        details: Optional[dict] = None,
    ):
        """단계 추가"""
        now = time.perf_counter()
        if self._last is not None:
            logger.debug("step %s (%s) took %.1fms", step, status, (now - self._last) * 1000)
        self._last = now

        entry = {"step": step, "status": status, "description": description}
        if witness is not None:
            entry["witness"] = witness
        if details:
            entry["details"] = details
        self.steps.append(entry)

    @property
    def all_verified(self) -> bool:
        return bool(self.steps) and all(s["status"] == VERIFIED for s in self.steps)

    def get_summary(self) -> list[dict]:
        return list(self.steps)
