"""
Groupoid-dim 인증서 ZIP 패키지 생성 모듈
"""

import zipfile
from pathlib import Path
from typing import Optional

from .dad_bounds import BoundReport
from .unfurl import UnfurledGraph


README = """{rule}
Groupoid-dim certificate bundle
{rule}

Case ID: {case_id}

  report.json    machine-readable bound report (facts, formula, bound, chain)
  summary.txt    the same report as text
{unfurled}
Every chain step marked "verified" was checked exactly on the finite
data listed in the report; "cited" steps rely on published results.
{rule}
"""

UNFURLED_LINES = """  unfurled.json  unfurled graph F, truncated, in the graph file format
  unfurled.dot   the same graph for Graphviz
"""


def create_certificate_package(
    case_id: str,
    report: BoundReport,
    summary_report: str,
    output_dir: Path,
    unfurled: Optional[UnfurledGraph] = None,
) -> Path:
    """인증서 패키지 ZIP 생성"""
    output_dir.mkdir(parents=True, exist_ok=True)
    zip_path = output_dir / f"{case_id}.zip"

    with zipfile.ZipFile(zip_path, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("report.json", report.to_json())
        zf.writestr("summary.txt", summary_report)
        if unfurled is not None:
            zf.writestr("unfurled.json", unfurled.to_json())
            zf.writestr("unfurled.dot", unfurled.to_dot())
        zf.writestr("README.txt", README.format(
            rule="=" * 72,
            case_id=case_id,
            unfurled=UNFURLED_LINES if unfurled is not None else "",
        ))

    return zip_path
