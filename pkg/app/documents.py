"""
Groupoid-dim 보고서 문서 생성 모듈
"""

from .dad_bounds import BoundReport


RULE = "=" * 80


def _section(number: int, title: str) -> str:
    return f"\n{RULE}\n{number}. {title}\n{RULE}\n"


def generate_summary_report(case_id: str, report: BoundReport) -> str:
    """인증 보고서 요약 (텍스트)"""

    facts = report.facts
    classification = facts.get("classification", {})
    bound = "n/a" if report.bound is None else str(report.bound)

    text = f"""{"#" * 80}
#{"Groupoid-dim certificate summary".center(78)}#
{"#" * 80}
"""
    text += _section(1, "Case")
    text += f"""
  Case ID   : {case_id}
  Formula   : {report.formula}
  Bound     : {bound}
  Status    : {report.status}
"""

    text += _section(2, "Classification")
    if classification:
        for key in sorted(classification):
            text += f"  {key:<24}: {classification[key]}\n"
    else:
        text += "\n  no classification recorded\n"

    text += _section(3, "Certificate chain")
    for i, step in enumerate(report.chain, 1):
        text += f"\n  [{i}] {step['step']} ({step['status']})\n      {step['description']}\n"
        if "witness" in step:
            text += f"      witness: {step['witness']}\n"

    generators = facts.get("isotropy_generators")
    if generators:
        text += _section(4, "Isotropy generators")
        for path in sorted(generators):
            text += f"  {path:<30} Z, generator {generators[path]}\n"

    lag_table = facts.get("lag_table")
    if lag_table:
        text += _section(5, "Lag consistency")
        inconsistent = [row for row in lag_table if not row["consistent"]]
        text += f"\n  pairs checked : {len(lag_table)}\n  inconsistent  : {len(inconsistent)}\n"

    text += f"\n{'#' * 80}\n"
    return text
