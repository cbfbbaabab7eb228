"""Interactive teleoperation sessions and their wire protocol.

A session owns one dictionary, one posterior, and one swarm. Inputs are
only accepted while the session awaits them; each accepted input updates
the posterior, installs the new guess's density in the swarm, and puts the
session into the settling phase until the robots stop, at which point the
next input is requested (or the trial ends). The JSON protocol (version 1)
carries five message kinds: snapshot, input, input_request, converged, and
error; timeouts arrive as a converged message with timeout=true.

Sessions are driven either by a human client (keyboard UI, scripts) or by
a built-in scripted user that replies ideally, optionally through the
noisy channel. Finished trials append to a JSON-lines log when a log
directory is configured.
"""

from __future__ import annotations

import asyncio
import json
import os
import uuid
from dataclasses import dataclass
from typing import Optional

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from . import codec
from .channel import ErrorProfile, corrupt, parse_profile_arg
from .dictionary import DictionarySpec, decode_index, load_dictionary, swarm_dictionary, synthetic_dictionary, to_polygon
from .metrics import TrialInput, TrialRecord, trial_to_dict
from .swarm import SwarmParams, SwarmState, control_step, polygon_to_gmm, random_swarm, settled

__all__ = [
    "PROTOCOL_VERSION",
    "Session",
    "SessionManager",
    "ServiceConfig",
    "create_app",
]

PROTOCOL_VERSION = 1
POSTERIOR_WIRE_LIMIT = 200  # above this, snapshots carry a top-k summary
MODES = ("human", "scripted-ideal", "scripted-with-channel")


@dataclass(frozen=True)
class ServiceConfig:
    """Declarative session setup; JSON-file friendly."""

    preset: str = "swarm60"  # or "synthetic:<b>:<r>" or a dictionary file path
    mode: str = "human"
    assumed_p: float = 0.1
    tau: float = 0.95
    max_inputs: int = 50
    n_robots: int = 10
    grid_shape: tuple[int, int] = (75, 50)
    physical_scale: float = 1.0
    seed: int = 0
    target: Optional[int] = None  # fixed practice target; scripted modes draw one
    error: Optional[str] = None  # channel spec for scripted-with-channel
    settle_speed: float = 5e-3
    log_dir: Optional[str] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "scripted-with-channel" and not self.error:
            raise ValueError("scripted-with-channel needs an error profile")

    @staticmethod
    def from_file(path) -> "ServiceConfig":
        with open(path) as fh:
            raw = json.load(fh)
        if "grid_shape" in raw:
            raw["grid_shape"] = tuple(raw["grid_shape"])
        return ServiceConfig(**raw)

    def build_dictionary(self) -> DictionarySpec:
        if self.preset == "swarm60":
            return swarm_dictionary()
        if self.preset.startswith("synthetic:"):
            _, b, r = self.preset.split(":")
            return synthetic_dictionary(int(b), int(r))
        return load_dictionary(self.preset)


class Session:
    """One interactive trial: posterior, swarm, phase machine, trial log."""

    def __init__(self, config: ServiceConfig):
        self.id = uuid.uuid4().hex
        self.config = config
        self.spec = config.build_dictionary()
        if len(self.spec.alphabets) != 4:
            raise ValueError("interactive sessions need a 4-alphabet polygon dictionary")

        ss = np.random.SeedSequence(config.seed).spawn(4)
        self.posterior = codec.init_posterior(
            self.spec.size, config.assumed_p, np.random.default_rng(ss[0])
        )
        self.rule = codec.StoppingRule(tau=config.tau, max_inputs=config.max_inputs)

        self.target: Optional[int] = config.target
        if self.target is None and config.mode != "human":
            self.target = int(np.random.default_rng(ss[2]).integers(1, self.spec.size + 1))
        if self.target is not None and not 1 <= self.target <= self.spec.size:
            raise ValueError("target outside the dictionary")

        self.profile: Optional[ErrorProfile] = (
            parse_profile_arg(config.error) if config.error else None
        )
        self.channel_rng = np.random.default_rng(ss[3])

        self.guess = codec.select_guess(self.posterior).n
        params = SwarmParams(grid_shape=config.grid_shape, settle_speed=config.settle_speed)
        density = self._density_for(self.guess)
        self.swarm: SwarmState = random_swarm(
            density, n_robots=config.n_robots, seed=ss[1], params=params
        )

        self.phase = "swarm-settling"  # robots move to the first guess
        self.inputs: list[TrialInput] = []
        self.outcome: Optional[codec.StopResult] = None
        self._pending: Optional[codec.StopResult] = None
        self.record: Optional[TrialRecord] = None

    # -- internals ---------------------------------------------------------

    def _density_for(self, index: int):
        poly = to_polygon(decode_index(index, self.spec), self.config.physical_scale)
        return polygon_to_gmm(
            poly, arena=self.spec.arena, grid_shape=self.config.grid_shape
        )

    def _finalize(self, outcome: codec.StopResult) -> None:
        self.outcome = outcome
        self.phase = "converged" if outcome.converged else "timed-out"
        self.record = TrialRecord(
            target=self.target if self.target is not None else 0,
            inputs=tuple(self.inputs),
            estimate=outcome.j_star,
            k_star=outcome.k_star,
            converged=outcome.converged,
            n_d=self.spec.size,
            seed_key=(self.config.seed,),
            algorithm="posterior_matching",
        )
        if self.config.log_dir:
            os.makedirs(self.config.log_dir, exist_ok=True)
            path = os.path.join(self.config.log_dir, f"trial_{self.id}.jsonl")
            with open(path, "a") as fh:
                fh.write(json.dumps(trial_to_dict(self.record)) + "\n")

    # -- protocol operations ------------------------------------------------

    def submit_input(self, y) -> dict:
        """Apply one binary reply; only legal while awaiting input."""
        if self.phase != "awaiting-input":
            raise PhaseError(f"input rejected in phase {self.phase!r}")
        if y not in (0, 1):
            raise ProtocolError("input payload must be 0 or 1")
        queried = self.guess
        codec.update_posterior(self.posterior, queried, y)
        x = codec.correct_input(self.target, queried) if self.target is not None else y
        self.inputs.append(
            TrialInput(
                guess=queried,
                x=x,
                y=int(y),
                crossover=self.profile.crossover(self.posterior.k) if self.profile else 0.0,
                map_index=codec.map_estimate(self.posterior),
            )
        )
        stop = codec.check_stopped(self.posterior, self.rule)
        if stop is not None:
            self._pending = stop
            next_density_index = stop.j_star
        else:
            self.guess = codec.select_guess(self.posterior).n
            next_density_index = self.guess
        self.swarm.density = self._density_for(next_density_index)
        self.swarm.pdot = None  # force a fresh settle check
        self.phase = "swarm-settling"
        return {"accepted": True, "k": self.posterior.k, "guess": next_density_index}

    def ideal_input(self) -> int:
        """The scripted user's reply, channel-corrupted when configured."""
        if self.target is None:
            raise ProtocolError("session has no target to script against")
        x = codec.correct_input(self.target, self.guess)
        if self.config.mode == "scripted-with-channel" and self.profile is not None:
            return corrupt(x, self.posterior.k + 1, self.profile, self.channel_rng)
        return x

    def tick(self, max_steps: int = 200) -> dict:
        """Advance the swarm if settling; no-op in other phases.

        Returns {"settled": bool, "steps": int, "cost": last H}; on
        settling completion the phase moves to awaiting-input or to the
        pending terminal phase.
        """
        if self.phase != "swarm-settling":
            return {"settled": self.phase != "swarm-settling", "steps": 0, "cost": None}
        steps = 0
        cost = None
        while steps < max_steps and not settled(self.swarm):
            cost = control_step(self.swarm)
            steps += 1
        if settled(self.swarm):
            if self._pending is not None:
                self._finalize(self._pending)
                self._pending = None
            else:
                self.phase = "awaiting-input"
            return {"settled": True, "steps": steps, "cost": cost}
        return {"settled": False, "steps": steps, "cost": cost}

    def auto_step(self, max_steps: int = 2000) -> dict:
        """One scripted round: settle, then submit the scripted reply."""
        if self.config.mode == "human":
            raise ProtocolError("auto stepping needs a scripted session")
        if self.phase == "swarm-settling":
            return self.tick(max_steps=max_steps)
        if self.phase == "awaiting-input":
            return self.submit_input(self.ideal_input())
        return {"phase": self.phase}

    def drive(self, max_rounds: int = 200) -> dict:
        """Run a scripted session to termination."""
        rounds = 0
        while self.phase not in ("converged", "timed-out") and rounds < max_rounds:
            self.auto_step()
            rounds += 1
        return self.snapshot()

    def snapshot(self) -> dict:
        alpha = self.posterior.alpha
        if self.spec.size <= POSTERIOR_WIRE_LIMIT:
            posterior = [float(a) for a in alpha]
            topk = None
        else:
            posterior = None
            order = np.argsort(alpha)[::-1][:10]
            topk = [[int(j) + 1, float(alpha[j])] for j in order]
        guess_index = self.outcome.j_star if self.outcome else (
            self._pending.j_star if self._pending else self.guess
        )
        poly = to_polygon(decode_index(guess_index, self.spec), self.config.physical_scale)
        target_poly = (
            to_polygon(decode_index(self.target, self.spec), self.config.physical_scale)
            if self.target is not None
            else None
        )
        return {
            "protocol": PROTOCOL_VERSION,
            "kind": "snapshot",
            "session": self.id,
            "phase": self.phase,
            "k": self.posterior.k,
            "guess": guess_index,
            "guess_polygon": _polygon_wire(poly),
            "target": self.target,
            "target_polygon": _polygon_wire(target_poly) if target_poly else None,
            "posterior": posterior,
            "posterior_topk": topk,
            "estimate": self.outcome.j_star if self.outcome else None,
            "converged": self.outcome.converged if self.outcome else None,
            "robots": [[p.x, p.y, p.theta] for p in self.swarm.poses()],
            "arena": {"width": self.spec.arena.width, "height": self.spec.arena.height},
        }


class ProtocolError(ValueError):
    pass


class PhaseError(ProtocolError):
    pass


def _polygon_wire(poly) -> dict:
    return {
        "center": list(poly.center),
        "n_sides": poly.n_sides,
        "radius": poly.radius,
        "vertices": [list(v) for v in poly.vertices()],
    }


class SessionManager:
    def __init__(self):
        self.sessions: dict[str, Session] = {}

    def create(self, config: ServiceConfig) -> Session:
        session = Session(config)
        self.sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise ProtocolError(f"unknown session {session_id!r}") from None


def _error_message(reason: str) -> dict:
    return {"protocol": PROTOCOL_VERSION, "kind": "error", "reason": reason}


def _input_request(session: Session) -> dict:
    return {"protocol": PROTOCOL_VERSION, "kind": "input_request", "k": session.posterior.k}


def _converged_message(session: Session) -> dict:
    return {
        "protocol": PROTOCOL_VERSION,
        "kind": "converged",
        "j_star": session.outcome.j_star,
        "k_star": session.outcome.k_star,
        "timeout": not session.outcome.converged,
    }


def create_app(manager: SessionManager | None = None, default_config: ServiceConfig | None = None):
    """FastAPI application speaking the session protocol.

    REST: POST /sessions, GET /sessions/{id}/snapshot, POST
    /sessions/{id}/input, POST /sessions/{id}/tick, POST
    /sessions/{id}/drive. Streaming: WS /sessions/{id}/ws (snapshots while
    settling, then input_request; accepts {"kind": "input", "y": 0|1}).
    """
    manager = manager if manager is not None else SessionManager()
    base = default_config if default_config is not None else ServiceConfig()
    app = FastAPI(title="swarmteleop", version="0.1.0")
    app.state.manager = manager
    locks: dict[str, asyncio.Lock] = {}

    def lock_for(session_id: str) -> asyncio.Lock:
        return locks.setdefault(session_id, asyncio.Lock())

    @app.post("/sessions")
    async def create_session(payload: dict | None = None):
        try:
            overrides = payload or {}
            if "grid_shape" in overrides:
                overrides["grid_shape"] = tuple(overrides["grid_shape"])
            config = ServiceConfig(**{**base.__dict__, **overrides})
            session = manager.create(config)
        except (TypeError, ValueError) as exc:
            return JSONResponse(_error_message(str(exc)), status_code=400)
        return {"session": session.id, "snapshot": session.snapshot()}

    @app.get("/sessions/{session_id}/snapshot")
    async def get_snapshot(session_id: str):
        try:
            return manager.get(session_id).snapshot()
        except ProtocolError as exc:
            return JSONResponse(_error_message(str(exc)), status_code=404)

    @app.post("/sessions/{session_id}/input")
    async def post_input(session_id: str, payload: dict):
        try:
            session = manager.get(session_id)
        except ProtocolError as exc:
            return JSONResponse(_error_message(str(exc)), status_code=404)
        async with lock_for(session_id):
            try:
                ack = session.submit_input(payload.get("y"))
            except PhaseError as exc:
                return JSONResponse(_error_message(str(exc)), status_code=409)
            except ProtocolError as exc:
                return JSONResponse(_error_message(str(exc)), status_code=400)
        return {"protocol": PROTOCOL_VERSION, "kind": "ack", **ack}

    @app.post("/sessions/{session_id}/tick")
    async def post_tick(session_id: str, payload: dict | None = None):
        try:
            session = manager.get(session_id)
        except ProtocolError as exc:
            return JSONResponse(_error_message(str(exc)), status_code=404)
        max_steps = int((payload or {}).get("max_steps", 200))
        async with lock_for(session_id):
            result = session.tick(max_steps=max_steps)
            snapshot = session.snapshot()
        return {"result": result, "snapshot": snapshot}

    @app.post("/sessions/{session_id}/drive")
    async def post_drive(session_id: str):
        try:
            session = manager.get(session_id)
        except ProtocolError as exc:
            return JSONResponse(_error_message(str(exc)), status_code=404)
        async with lock_for(session_id):
            try:
                snapshot = session.drive()
            except ProtocolError as exc:
                return JSONResponse(_error_message(str(exc)), status_code=400)
        return snapshot

    @app.websocket("/sessions/{session_id}/ws")
    async def session_ws(ws: WebSocket, session_id: str):
        # Client messages land in a queue via a reader task so inputs are
        # judged against the phase they arrive in: an input during
        # settling is rejected immediately, never deferred.
        await ws.accept()
        try:
            session = manager.get(session_id)
        except ProtocolError as exc:
            await ws.send_json(_error_message(str(exc)))
            await ws.close()
            return

        queue: asyncio.Queue = asyncio.Queue()

        async def reader():
            try:
                while True:
                    queue.put_nowait(await ws.receive_json())
            except Exception:
                queue.put_nowait(None)  # disconnect sentinel

        reader_task = asyncio.create_task(reader())

        async def handle(message) -> bool:
            if message is None:
                return False
            if not isinstance(message, dict) or message.get("kind") != "input":
                await ws.send_json(_error_message("expected an input message"))
                return True
            async with lock_for(session_id):
                try:
                    session.submit_input(message.get("y"))
                except ProtocolError as exc:
                    await ws.send_json(_error_message(str(exc)))
                    return True
            await ws.send_json(session.snapshot())
            return True

        try:
            await ws.send_json(session.snapshot())
            alive = True
            while alive:
                if session.phase == "swarm-settling":
                    async with lock_for(session_id):
                        session.tick(max_steps=50)
                    await ws.send_json(session.snapshot())
                    while alive and not queue.empty():
                        alive = await handle(queue.get_nowait())
                    if session.phase == "awaiting-input":
                        await ws.send_json(_input_request(session))
                    elif session.outcome is not None:
                        await ws.send_json(_converged_message(session))
                    await asyncio.sleep(0)
                else:
                    alive = await handle(await queue.get())
        except WebSocketDisconnect:
            pass
        finally:
            reader_task.cancel()

    return app
