"""
FastAPI backend for the singularity classification toolkit.
"""
import logging
from typing import Any, Dict

from fastapi import FastAPI, HTTPException

from src.api.models import ClassifyRequest, GridRow, SampleRequest, SampleResponse
from src.core.classifier import classify_singularity
from src.core.metrics import grid_rows
from src.core.verification import run_suite
from src.utils.config import FD_STEP, LOG_LEVEL, RunConfig
from src.utils.helpers import checks_to_dict, report_to_dict

# Configure logging
logging.basicConfig(level=LOG_LEVEL)
logger = logging.getLogger(__name__)

app = FastAPI(title="Singularity Classifier - conformal hyperbolic metrics near a puncture")


@app.post("/classify")
def classify(request: ClassifyRequest) -> Dict[str, Any]:
    """Classify the singularity developed by a map spec"""
    try:
        config = request.config.to_config()
        F = request.map.to_spec()
        logger.info(f"Classify request for a {type(F.core).__name__} map")
        report = classify_singularity(F, config)
        return report_to_dict(report)
    except ValueError as e:
        logger.warning(f"Classification rejected: {e}")
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        logger.error(f"Unexpected error during classification: {e}")
        raise HTTPException(status_code=500, detail=f"Internal server error: {str(e)}")


@app.post("/sample", response_model=SampleResponse)
def sample(request: SampleRequest):
    """Sample a metric and its curvature residual on a grid"""
    try:
        metric = request.metric.to_metric()
        rows = grid_rows(metric, request.grid.points(), request.step or FD_STEP)
        logger.info(f"Sampled {len(rows)} points of {type(metric).__name__}")
        return SampleResponse(rows=[GridRow(**row) for row in rows])
    except ValueError as e:
        logger.warning(f"Sampling rejected: {e}")
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        logger.error(f"Unexpected error during sampling: {e}")
        raise HTTPException(status_code=500, detail=f"Internal server error: {str(e)}")


@app.get("/verify")
def verify(order: int = 32, radius: float = 0.25, samples: int = 512) -> Dict[str, Any]:
    """Run the verification suite"""
    try:
        config = RunConfig(truncation_order=order, radius=radius, samples=samples)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return checks_to_dict(run_suite(config))


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy"}


if __name__ == "__main__":
    import uvicorn
    from src.utils.config import API_HOST, API_PORT
    uvicorn.run(app, host=API_HOST, port=API_PORT)
