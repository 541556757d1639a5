"""HTTP surface over the retrieval toolkit."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import models, ops


def create_app() -> FastAPI:
    app = FastAPI(
        title="pir-asym",
        description=("Retrieval schemes, capacity bounds, simulation, and "
                     "verification for replicated databases under asymmetric "
                     "per-database traffic constraints."),
        version="0.1.0",
    )

    def guarded(fn, request):
        try:
            return fn(request)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/corners", response_model=models.CornersResponse)
    def corners(request: models.CornersRequest):
        return guarded(ops.corners_op, request)

    @app.post("/bound", response_model=models.BoundResponse)
    def bound(request: models.BoundRequest):
        return guarded(ops.bound_op, request)

    @app.post("/synth", response_model=models.SynthResponse)
    def synth(request: models.SynthRequest):
        return guarded(ops.synth_op, request)

    @app.post("/run", response_model=models.RunResponse)
    def run(request: models.RunRequest):
        return guarded(ops.run_op, request)

    @app.post("/verify", response_model=models.VerifyResponse)
    def verify(request: models.VerifyRequest):
        return guarded(ops.verify_op, request)

    @app.post("/sweep", response_model=models.SweepResponse)
    def do_sweep(request: models.SweepRequest):
        return guarded(ops.sweep_op, request)

    return app


app = create_app()
