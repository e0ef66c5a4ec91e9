"""
Groupoid-dim Service - graph groupoids, unfurling and nuclear-dimension bounds
"""

import hashlib
import logging
from typing import Literal, Optional

from fastapi import FastAPI, File, HTTPException, Query, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, PlainTextResponse

from . import config
from .dad_bounds import FORMULAS, BoundReport, certified_pipeline, evaluate_bound
from .documents import generate_summary_report
from .errors import CapExceededError, GroupoidDimError, PreconditionError, VerificationError
from .graph_core import DirectedGraph, GraphFile, load_graph
from .history import AnalysisHistory, classification_label
from .unfurl import required_depth, unfurl
from .zipper import create_certificate_package


logger = logging.getLogger(__name__)

VERSION = "1.0.0"

app = FastAPI(
    title="Groupoid-dim",
    description="Graph groupoids, unfurling and certified nuclear-dimension bounds",
    version=VERSION,
    docs_url="/docs",
    redoc_url="/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

analysis_history = AnalysisHistory()


def generate_case_id(g: DirectedGraph, depth: Optional[int], seed: int) -> str:
    digest = hashlib.md5(f"{g.to_json()}|{depth}|{seed}".encode()).hexdigest()[:8].upper()
    return f"GDIM-{digest}"


def to_http_error(e: GroupoidDimError) -> HTTPException:
    if isinstance(e, VerificationError):
        return HTTPException(status_code=422, detail=e.to_dict())
    if isinstance(e, (PreconditionError, CapExceededError)):
        return HTTPException(status_code=400, detail=e.to_dict())
    return HTTPException(status_code=500, detail=e.to_dict())


@app.get("/", tags=["Info"])
async def root():
    return {
        "service": "Groupoid-dim",
        "version": VERSION,
        "status": "running",
        "features": ["analyze", "unfurl", "bound", "certificate_bundle"],
        "docs": "/docs",
    }


@app.get("/health", tags=["Info"])
async def health_check():
    return {"status": "healthy", "version": VERSION}


def run_analysis(g: DirectedGraph, depth: Optional[int], seed: int) -> dict:
    """파이프라인 실행, 문서 및 ZIP 생성, 히스토리 기록"""
    case_id = generate_case_id(g, depth, seed)

    # 1. 인증 파이프라인
    report: BoundReport = certified_pipeline(g, depth=depth, seed=seed)

    # 2. 문서 생성
    summary = generate_summary_report(case_id, report)

    # 3. ZIP 생성
    unfurled = None
    if report.formula == "cor-abelian":
        unfurled = unfurl(g, depth if depth is not None else required_depth(g))
    zip_path = create_certificate_package(
        case_id=case_id,
        report=report,
        summary_report=summary,
        output_dir=config.output_dir(),
        unfurled=unfurled,
    )

    # 히스토리 저장
    classification = report.facts.get("classification", {})
    analysis_history.add_record(
        case_id=case_id,
        formula=report.formula,
        bound=report.bound,
        status=report.status,
        vertex_count=len(g.vertices),
        edge_count=len(g.edges),
        classification=classification_label(classification),
    )
    logger.info("analysis %s: formula=%s bound=%s", case_id, report.formula, report.bound)

    return {
        "case_id": case_id,
        "report": report.to_dict(),
        "summary": summary,
        "download_url": f"/download/{zip_path.name}",
        "status": "success",
    }


@app.post("/analyze", tags=["Analysis"])
async def analyze_graph_endpoint(
    graph: GraphFile,
    depth: Optional[int] = Query(None, ge=0),
    seed: int = config.DEFAULT_SEED,
):
    """그래프 분석 및 인증서 패키지 생성"""
    try:
        g = load_graph(graph.model_dump_json())
        return run_analysis(g, depth, seed)
    except GroupoidDimError as e:
        raise to_http_error(e)
    except HTTPException:
        raise
    except Exception as e:
        logger.exception("analysis failed")
        raise HTTPException(status_code=500, detail=f"분석 중 오류: {e}")


@app.post("/analyze-file", tags=["Analysis"])
async def analyze_file_endpoint(
    file: UploadFile = File(...),
    depth: Optional[int] = Query(None, ge=0),
    seed: int = config.DEFAULT_SEED,
):
    """그래프 파일 업로드 분석"""
    try:
        content = await file.read()
        g = load_graph(content.decode("utf-8"))
        return run_analysis(g, depth, seed)
    except GroupoidDimError as e:
        raise to_http_error(e)
    except UnicodeDecodeError:
        raise HTTPException(status_code=400, detail="그래프 파일은 UTF-8 JSON이어야 합니다.")


@app.post("/unfurl", tags=["Analysis"])
async def unfurl_endpoint(
    graph: GraphFile,
    depth: int = Query(4, ge=0),
    format: Literal["json", "dot"] = "json",
):
    """Unfurled graph F (truncated)"""
    try:
        f = unfurl(load_graph(graph.model_dump_json()), depth)
    except GroupoidDimError as e:
        raise to_http_error(e)
    if format == "dot":
        return PlainTextResponse(f.to_dot(), media_type="text/vnd.graphviz")
    return f.materialized.to_dict()


@app.get("/bound/{formula}", tags=["Bounds"])
async def bound_endpoint(formula: str, request: Request):
    """Bound 공식 계산; inputs are query parameters"""
    if formula not in FORMULAS:
        raise HTTPException(status_code=404, detail=f"unknown formula {formula!r}")
    inputs = {}
    for name, raw in request.query_params.items():
        try:
            inputs[name] = int(raw)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"{name} must be an integer")
    try:
        return evaluate_bound(formula, inputs).to_dict()
    except GroupoidDimError as e:
        raise to_http_error(e)


@app.get("/download/{filename}", tags=["Download"])
async def download_package(filename: str):
    """ZIP 패키지 다운로드"""
    output = config.output_dir().resolve()
    file_path = (output / filename).resolve()

    if file_path.parent != output or not file_path.exists():
        raise HTTPException(status_code=404, detail="파일을 찾을 수 없습니다.")

    return FileResponse(path=file_path, filename=filename, media_type="application/zip")


@app.get("/history", tags=["History"])
async def get_history(limit: int = 20):
    """분석 히스토리"""
    return analysis_history.get_recent(limit)


@app.get("/stats", tags=["Stats"])
async def get_stats():
    """분석 통계"""
    return analysis_history.get_stats()
