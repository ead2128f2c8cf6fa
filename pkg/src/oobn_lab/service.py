"""HTTP service over a read-only model bundle.

Stateless by construction: evidence lives only in the request, the bundle
is shared immutable state, and every handler is a pure function of its
body. Report bodies are rendered through the same serializer as the CLI,
so identical inputs produce identical bytes.

Error contract: 400 malformed evidence or body, 404 unknown preset or
variable, 422 zero-probability evidence; user input never yields a 500.
"""

from __future__ import annotations

from dataclasses import dataclass

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    InvalidEvidence,
    OobnLabError,
    UnknownPreset,
    UnknownVariable,
    ZeroProbabilityEvidence,
)
from .reporting import DEFAULT_PRECISION, render_report
from .stateless.bundle import ModelBundle, run_scenario
from .stateless.reports import (
    build_infer_report,
    build_model_report,
    build_sensitivity_report,
)

NOT_FOUND = (UnknownPreset, UnknownVariable)
UNPROCESSABLE = (ZeroProbabilityEvidence,)


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8348
    bundle_path: str = ""
    read_only: bool = True

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise InvalidEvidence(f"port {self.port} outside [1, 65535]", port=self.port)


class InferRequest(BaseModel):
    evidence: dict[str, str] = {}


class ScenarioRequest(BaseModel):
    preset: str | None = None
    evidence: dict[str, str] = {}
    compare: str | None = None


class Hypothesis(BaseModel):
    variable: str
    state: str


class SensitivityRequest(BaseModel):
    hypothesis: Hypothesis
    scenario: str | None = None
    evidence: dict[str, str] = {}
    evidence_sensitivity_only: bool = False
    top: int | None = None


def create_app(bundle: ModelBundle, precision: int | None = DEFAULT_PRECISION) -> FastAPI:
    app = FastAPI(title="oobn-lab", version=bundle.bundle_hash[:12])

    def report_response(report: dict, status_code: int = 200) -> Response:
        return Response(
            content=render_report(report, precision),
            media_type="application/json",
            status_code=status_code,
        )

    @app.exception_handler(OobnLabError)
    async def handle_domain_error(_request: Request, exc: OobnLabError):
        if isinstance(exc, NOT_FOUND):
            status = 404
        elif isinstance(exc, UNPROCESSABLE):
            status = 422
        else:
            status = 400
        return JSONResponse(status_code=status, content=exc.to_dict())

    @app.get("/health")
    async def health():
        return {"status": "ok", "bundle_hash": bundle.bundle_hash}

    @app.get("/model")
    async def model():
        return report_response(build_model_report(bundle))

    @app.post("/infer")
    async def infer(request: InferRequest):
        return report_response(build_infer_report(bundle, request.evidence))

    @app.post("/scenario")
    async def scenario(request: ScenarioRequest):
        if request.preset is not None:
            report = run_scenario(bundle, request.preset, compare=request.compare,
                                  extra_evidence=request.evidence)
        else:
            report = run_scenario(bundle, request.evidence, compare=request.compare)
        return report_response(report)

    @app.post("/sensitivity")
    async def sensitivity(request: SensitivityRequest):
        evidence = dict(request.evidence)
        scenario_name = None
        if request.scenario and request.scenario != "none":
            preset = bundle.preset(request.scenario)
            evidence = {**preset.evidence, **evidence}
            scenario_name = request.scenario
        report = build_sensitivity_report(
            bundle,
            (request.hypothesis.variable, request.hypothesis.state),
            evidence,
            scenario=scenario_name,
            include_parameters=not request.evidence_sensitivity_only,
            include_evidence_ranges=True,
            top=request.top,
        )
        return report_response(report)

    return app
