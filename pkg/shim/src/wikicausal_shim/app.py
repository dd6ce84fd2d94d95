"""FastAPI application exposing the inference wire protocol."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backends import BackendError


class GenerateRequest(BaseModel):
    prompt: str
    n: int = Field(default=1, ge=1, le=64)
    max_new_tokens: int = Field(default=8, ge=1, le=512)
    temperature: float = Field(default=0.7, ge=0.0)
    seed: int | None = None


class GenerateResponse(BaseModel):
    completions: list[str]


class QaProtocolRequest(BaseModel):
    question: str
    context: str


class QaProtocolResponse(BaseModel):
    text: str
    score: float | None = None
    no_answer: bool = False


def create_app(backend) -> FastAPI:
    app = FastAPI(title="wikicausal-shim")

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request, exc):
        return JSONResponse(status_code=400, content={"error": "malformed request body"})

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "models": {
                "generate": backend.generate_model_id,
                "qa": backend.qa_model_id,
            },
        }

    @app.post("/v1/generate", response_model=GenerateResponse)
    def generate(request: GenerateRequest):
        try:
            completions = backend.generate(
                request.prompt,
                request.n,
                request.max_new_tokens,
                request.temperature,
                request.seed,
            )
        except BackendError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return GenerateResponse(completions=completions)

    @app.post("/v1/qa", response_model=QaProtocolResponse)
    def qa(request: QaProtocolRequest):
        try:
            text, score, no_answer = backend.qa(request.question, request.context)
        except BackendError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return QaProtocolResponse(text=text, score=score, no_answer=no_answer)

    return app
