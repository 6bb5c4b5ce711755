"""HTTP session service for the interactive gallery.

The service owns the optimization loop; clients only upload an image,
fetch parameter grids, and post cell choices.  Previews are rendered
client-side from the returned parameters, so grid payloads stay small.

State is in-memory; ``GET /sessions/{id}/snapshot`` and
``POST /sessions/restore`` give JSON persistence and replay.
"""

import io
import json
import secrets
import threading
import time
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel

from .. import jsonio
from ..acquisition import AcquisitionConfig
from ..errors import FitFailure, InvalidState, RejectedChoice
from ..gridsession import GridSpec, PlaneSession, choose, finalize_preference, grid_cells
from ..prefgp import Dataset, FittedModel, current_best, map_fit
from ..rng import stream
from ..space import SearchSpace
from ..subspace import construct_plane, initial_plane
from .enhance import PARAM_COUNT, EnhanceParams

MAX_PIXELS = 16_000_000

# rng stream ids; one fresh stream per constructed plane so that a restored
# session keeps producing the same planes as an uninterrupted one
INIT_STREAM = 10
PLANE_STREAM = 11


def new_token() -> str:
    return secrets.token_hex(16)


def session_rng(seed: int, iteration: int) -> np.random.Generator:
    """Stream used to construct the plane for ``iteration`` (0 = initial)."""
    if iteration == 0:
        return stream(seed, INIT_STREAM)
    return stream(seed, PLANE_STREAM, iteration)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class CreateSessionBody(BaseModel):
    image_id: str
    seed: int | None = None
    grid_res: int | None = None
    levels: int | None = None


class ChooseBody(BaseModel):
    i: int
    j: int


@dataclass
class StoredImage:
    id: str
    width: int
    height: int
    pixels: np.ndarray  # uint8 (H, W, 3)


@dataclass
class GallerySession:
    id: str
    seed: int
    image_id: str
    grid: GridSpec
    acquisition: AcquisitionConfig
    dataset: Dataset
    plane_session: PlaneSession
    model: FittedModel | None = None
    iteration: int = 0
    satisfied_at: list = dataclass_field(default_factory=list)
    event_log: list = dataclass_field(default_factory=list)
    lock: threading.Lock = dataclass_field(default_factory=threading.Lock)


def _new_session_state(
    session_id: str, seed: int, image_id: str, grid: GridSpec, acquisition: AcquisitionConfig
) -> GallerySession:
    space = SearchSpace(PARAM_COUNT)
    plane = initial_plane(space, session_rng(seed, 0))
    return GallerySession(
        id=session_id,
        seed=seed,
        image_id=image_id,
        grid=grid,
        acquisition=acquisition,
        dataset=Dataset(space),
        plane_session=PlaneSession(plane, grid),
    )


def _best_params(session: GallerySession) -> EnhanceParams:
    if session.model is None or not session.dataset.records:
        return EnhanceParams.neutral()
    idx = current_best(session.model, "last_chosen")
    return EnhanceParams.from_vector(session.model.points[idx])


def _grid_payload(session: GallerySession) -> dict:
    cells = []
    for cell in grid_cells(session.plane_session):
        cells.append({
            "i": cell.i,
            "j": cell.j,
            "params": EnhanceParams.from_vector(np.clip(cell.point, 0.0, 1.0)).to_json()
            if cell.valid
            else None,
            "valid": cell.valid,
        })
    return {
        "cells": cells,
        "level": session.plane_session.level,
        "iteration": session.iteration,
        "best": _best_params(session).to_json(),
    }


def _snapshot_doc(session: GallerySession) -> dict:
    return {
        "id": session.id,
        "seed": session.seed,
        "image_id": session.image_id,
        "iteration": session.iteration,
        "dataset": session.dataset.to_json(),
        "session": session.plane_session.to_json(),
        "satisfied": [[it, ts] for it, ts in session.satisfied_at],
        "events": [list(e) for e in session.event_log],
    }


def _restore_session_state(doc: dict, acquisition: AcquisitionConfig) -> GallerySession:
    try:
        dataset = Dataset.from_json(doc["dataset"])
        plane_session = PlaneSession.from_json(doc["session"])
        session = GallerySession(
            id=str(doc["id"]),
            seed=int(doc["seed"]),
            image_id=str(doc["image_id"]),
            grid=plane_session.spec,
            acquisition=acquisition,
            dataset=dataset,
            plane_session=plane_session,
            iteration=int(doc["iteration"]),
            satisfied_at=[(int(it), float(ts)) for it, ts in doc.get("satisfied", [])],
            event_log=[tuple(int(x) for x in e) for e in doc.get("events", [])],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ApiError(422, "malformed", f"snapshot document invalid: {exc}") from exc
    if dataset.records:
        session.model = map_fit(dataset)
    return session


def create_app(acquisition: AcquisitionConfig | None = None) -> FastAPI:
    """Build the service with its own in-memory stores."""
    acquisition = acquisition or AcquisitionConfig()
    app = FastAPI(title="gallery service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    images: dict[str, StoredImage] = {}
    sessions: dict[str, GallerySession] = {}
    store_lock = threading.Lock()
    app.state.images = images
    app.state.sessions = sessions

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422, content={"code": "malformed", "message": str(exc.errors())}
        )

    def get_session(session_id: str) -> GallerySession:
        session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, "not-found", f"unknown session {session_id!r}")
        return session

    @app.post("/images")
    async def upload_image(request: Request):
        data = await request.body()
        try:
            with Image.open(io.BytesIO(data)) as img:
                if img.format not in ("PNG", "JPEG"):
                    raise ApiError(422, "malformed", f"unsupported format {img.format!r}")
                if img.width * img.height > MAX_PIXELS:
                    raise ApiError(
                        422, "malformed",
                        f"image has {img.width * img.height} pixels, limit {MAX_PIXELS}",
                    )
                pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
        except UnidentifiedImageError as exc:
            raise ApiError(422, "malformed", "body is not a decodable image") from exc
        image_id = new_token()
        with store_lock:
            images[image_id] = StoredImage(image_id, pixels.shape[1], pixels.shape[0], pixels)
        return {"id": image_id}

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        if body.image_id not in images:
            raise ApiError(404, "not-found", f"unknown image {body.image_id!r}")
        seed = body.seed if body.seed is not None else secrets.randbits(63)
        try:
            grid = GridSpec(
                resolution=body.grid_res if body.grid_res is not None else 5,
                levels=body.levels if body.levels is not None else 4,
            )
        except ValueError as exc:
            raise ApiError(422, "malformed", str(exc)) from exc
        session = _new_session_state(new_token(), seed, body.image_id, grid, acquisition)
        with store_lock:
            sessions[session.id] = session
        return {"id": session.id, "grid": _grid_payload(session)}

    @app.get("/sessions/{session_id}/grid")
    def get_grid(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return _grid_payload(session)

    @app.post("/sessions/{session_id}/choose")
    def post_choice(session_id: str, body: ChooseBody):
        session = get_session(session_id)
        with session.lock:
            try:
                advanced = choose(session.plane_session, body.i, body.j)
            except RejectedChoice as exc:
                raise ApiError(409, "invalid-cell", str(exc)) from exc
            except (ValueError, InvalidState) as exc:
                raise ApiError(422, "malformed", str(exc)) from exc

            event = (session.iteration, session.plane_session.level, body.i, body.j)
            completed = advanced.completed
            if completed:
                # Commit only after the refit and the next plane both succeed.
                dataset = session.dataset.copy()
                dataset.add_preference(finalize_preference(advanced))
                try:
                    model = map_fit(dataset)
                    plane = construct_plane(
                        model,
                        session.acquisition,
                        session_rng(session.seed, session.iteration + 1),
                        best_mode="last_chosen",
                    )
                except FitFailure as exc:
                    raise ApiError(500, "fit-failure", str(exc)) from exc
                session.dataset = dataset
                session.model = model
                session.iteration += 1
                session.plane_session = PlaneSession(plane, session.grid)
            else:
                session.plane_session = advanced
            session.event_log.append(event)
            return {
                "grid": _grid_payload(session),
                "iteration": session.iteration,
                "completed_plane": completed,
            }

    @app.post("/sessions/{session_id}/satisfied")
    def post_satisfied(session_id: str):
        session = get_session(session_id)
        with session.lock:
            session.satisfied_at.append((session.iteration, time.time()))
            return {"count": len(session.satisfied_at)}

    @app.get("/sessions/{session_id}/best")
    def get_best(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return _best_params(session).to_json()

    @app.get("/sessions/{session_id}/snapshot")
    def get_snapshot(session_id: str):
        session = get_session(session_id)
        with session.lock:
            text = jsonio.dumps(_snapshot_doc(session))
        return Response(content=text, media_type="application/json")

    @app.post("/sessions/restore")
    async def restore(request: Request):
        raw = await request.body()
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ApiError(
                422, "malformed",
                f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
            ) from exc
        if not isinstance(doc, dict):
            raise ApiError(422, "malformed", "snapshot must be a JSON object")
        session = _restore_session_state(doc, acquisition)
        with store_lock:
            sessions[session.id] = session
        return {"id": session.id, "grid": _grid_payload(session)}

    return app


app = create_app()
