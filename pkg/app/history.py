"""
Groupoid-dim 분석 히스토리 모듈
"""

from collections import deque
from typing import Optional


class AnalysisHistory:
    """분석 히스토리 관리 (메모리 기반)"""

    def __init__(self, max_size: int = 1000):
        self.records = deque(maxlen=max_size)
        self.stats = {
            "total_analyses": 0,
            "by_bound": {},
            "by_classification": {},
        }

    def add_record(
        self,
        case_id: str,
        formula: str,
        bound: Optional[int],
        status: str,
        vertex_count: int,
        edge_count: int,
        classification: str,
    ):
        """분석 기록 추가"""
        record = {
            "case_id": case_id,
            "formula": formula,
            "bound": bound,
            "status": status,
            "vertex_count": vertex_count,
            "edge_count": edge_count,
            "classification": classification,
        }
        self.records.append(record)

        # 통계 업데이트
        self.stats["total_analyses"] += 1
        bound_key = "none" if bound is None else str(bound)
        by_bound = self.stats["by_bound"]
        by_bound[bound_key] = by_bound.get(bound_key, 0) + 1
        by_class = self.stats["by_classification"]
        by_class[classification] = by_class.get(classification, 0) + 1

    def get_recent(self, limit: int = 20) -> list[dict]:
        return list(self.records)[-limit:] if limit > 0 else []

    def get_stats(self) -> dict:
        return self.stats


def classification_label(classification: dict) -> str:
    if not classification.get("has_cycles"):
        return "af"
    if classification.get("stably_finite"):
        return "stably-finite"
    if classification.get("condition_K"):
        return "condition-k"
    return "mixed"
