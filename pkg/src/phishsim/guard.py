"""Delayed-logo warning service.

A WebSocket endpoint ingests a short timed screenshot sequence of one page
load and warns when a logo identity first appears after the opening frame.
Legitimate pages show their branding immediately; a page that stalls its
logo past a detector's capture window materializes it late, and that late
appearance is exactly what the temporal diff flags.

Each connection is one session. Snapshots arrive as JSON text frames, the
verdict (or a protocol error) goes back the same way, and sessions are
isolated: identity clusters never leak between connections.
"""

from __future__ import annotations

import asyncio
import base64
import binascii
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping
from urllib.parse import urlsplit

import numpy as np
import uvicorn
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.concurrency import run_in_threadpool

from .detect import (DetectorConfig, ReferenceList, domain_matches, embed,
                     locate_logos, match_brand, similarity)
from .raster import raster_from_png_bytes
from .render import Screenshot

VERDICT_REASONS = ("delayed_logo", "none", "allowlisted")

_BRAND_PREFIX = "brand:"
_CLUSTER_PREFIX = "cluster:"


class GuardError(ValueError):
    """A malformed message, sequencing violation, or bad configuration."""


@dataclass(frozen=True)
class GuardConfig:
    """Service knobs.

    tolerance doubles as the brand-match threshold and the cross-snapshot
    identity threshold: two regions hashing within it are the same logo.
    """

    bind: str = "127.0.0.1:8787"
    num_screenshots: int = 5
    interval_ms: int = 1000
    tolerance: float = 0.87
    allowlist: tuple[str, ...] = ()
    session_timeout_ms: int = 30_000

    def __post_init__(self) -> None:
        host, port = split_bind(self.bind)
        del host, port
        if self.num_screenshots < 2:
            raise GuardError("num_screenshots must be >= 2, a single frame "
                             f"has no timeline (got {self.num_screenshots})")
        if self.interval_ms <= 0:
            raise GuardError(f"interval_ms must be > 0, got {self.interval_ms}")
        if not 0.0 < self.tolerance <= 1.0:
            raise GuardError(f"tolerance must be in (0, 1], got {self.tolerance}")
        if self.session_timeout_ms <= 0:
            raise GuardError("session_timeout_ms must be > 0, got "
                             f"{self.session_timeout_ms}")


def split_bind(bind: str) -> tuple[str, int]:
    """Split "host:port" and validate the port."""
    host, sep, port_text = bind.rpartition(":")
    if not sep or not host:
        raise GuardError(f"bind must look like host:port, got {bind!r}")
    try:
        port = int(port_text)
    except ValueError:
        raise GuardError(f"bind port must be an integer, got {port_text!r}") from None
    if not 0 < port < 65536:
        raise GuardError(f"bind port out of range: {port}")
    return host, port


def load_guard_config(path: str | Path | None = None,
                      env: Mapping[str, str] | None = None) -> GuardConfig:
    """Config from an optional JSON file plus environment overrides.

    GUARD_BIND replaces the bind address; GUARD_ALLOWLIST names a text file
    of allowlisted domains, one per line, replacing the file's list.
    """
    env = os.environ if env is None else env
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise GuardError(f"unreadable config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise GuardError(f"config {path} must hold a JSON object")
        unknown = set(data) - {"bind", "num_screenshots", "interval_ms",
                               "tolerance", "allowlist", "session_timeout_ms"}
        if unknown:
            raise GuardError(f"unknown config keys: {sorted(unknown)}")
    allowlist = data.get("allowlist", [])
    if not isinstance(allowlist, list) or not all(isinstance(d, str)
                                                  for d in allowlist):
        raise GuardError("allowlist must be a list of domain strings")
    if "GUARD_ALLOWLIST" in env:
        try:
            lines = Path(env["GUARD_ALLOWLIST"]).read_text().splitlines()
        except OSError as exc:
            raise GuardError(f"unreadable allowlist file: {exc}") from None
        allowlist = [ln.strip() for ln in lines
                     if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        return GuardConfig(
            bind=env.get("GUARD_BIND", data.get("bind", "127.0.0.1:8787")),
            num_screenshots=data.get("num_screenshots", 5),
            interval_ms=data.get("interval_ms", 1000),
            tolerance=data.get("tolerance", 0.87),
            allowlist=tuple(allowlist),
            session_timeout_ms=data.get("session_timeout_ms", 30_000),
        )
    except TypeError as exc:
        raise GuardError(f"bad config value: {exc}") from None


@dataclass(frozen=True)
class SnapshotMsg:
    """One timed screenshot from a client, seq 0-based within its session."""

    session: str
    seq: int
    url: str
    png_base64: str

    def to_wire(self) -> str:
        return json.dumps({"type": "screenshot", "session": self.session,
                           "seq": self.seq, "url": self.url,
                           "png": self.png_base64},
                          separators=(",", ":"), sort_keys=True)


def parse_snapshot_msg(text: str) -> SnapshotMsg:
    """Decode and validate one client frame."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GuardError(f"frame is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise GuardError("frame must be a JSON object")
    if data.get("type") != "screenshot":
        raise GuardError(f"unexpected frame type {data.get('type')!r}")
    session = data.get("session")
    seq = data.get("seq")
    url = data.get("url")
    png = data.get("png")
    if not isinstance(session, str) or not session:
        raise GuardError("session must be a non-empty string")
    if isinstance(seq, bool) or not isinstance(seq, int) or seq < 0:
        raise GuardError(f"seq must be a non-negative integer, got {seq!r}")
    if not isinstance(url, str) or not url:
        raise GuardError("url must be a non-empty string")
    if not isinstance(png, str) or not png:
        raise GuardError("png must be non-empty base64 text")
    return SnapshotMsg(session=session, seq=seq, url=url, png_base64=png)


@dataclass(frozen=True)
class VerdictMsg:
    """The service's one reply per session.

    warn is only ever true for a delayed logo, and then the sequence number
    of the snapshot that revealed it is always present.
    """

    warn: bool
    reason: str
    matched_brand: str | None = None
    triggering_seq: int | None = None

    def __post_init__(self) -> None:
        if self.reason not in VERDICT_REASONS:
            raise GuardError(f"unknown verdict reason {self.reason!r}")
        if self.warn and (self.reason != "delayed_logo"
                          or self.triggering_seq is None):
            raise GuardError("a warning must carry reason=delayed_logo and "
                             "the triggering sequence number")
        if not self.warn and self.reason == "delayed_logo":
            raise GuardError("reason=delayed_logo requires warn=true")
        if not self.warn and self.triggering_seq is not None:
            raise GuardError("triggering_seq is only meaningful on a warning")

    def to_wire(self, session: str) -> str:
        body: dict = {"type": "verdict", "session": session,
                      "warn": self.warn, "reason": self.reason}
        if self.matched_brand is not None:
            body["matched_brand"] = self.matched_brand
        if self.triggering_seq is not None:
            body["triggering_seq"] = self.triggering_seq
        return json.dumps(body, separators=(",", ":"), sort_keys=True)


def parse_verdict_msg(text: str) -> tuple[str, VerdictMsg]:
    """Decode one service reply; returns (session token, verdict)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GuardError(f"frame is not valid JSON: {exc}") from None
    if not isinstance(data, dict) or data.get("type") != "verdict":
        raise GuardError("frame is not a verdict")
    session = data.get("session")
    if not isinstance(session, str) or not session:
        raise GuardError("verdict lacks a session token")
    if not isinstance(data.get("warn"), bool):
        raise GuardError("verdict warn must be a boolean")
    return session, VerdictMsg(warn=data["warn"],
                               reason=data.get("reason", ""),
                               matched_brand=data.get("matched_brand"),
                               triggering_seq=data.get("triggering_seq"))


def check_allowlist(url: str, cfg: GuardConfig) -> bool:
    """True when the page host or any parent domain is allowlisted."""
    probe = url if "//" in url else "//" + url
    try:
        host = urlsplit(probe).hostname
    except ValueError as exc:
        raise GuardError(f"unparseable url {url!r}: {exc}") from None
    if not host:
        raise GuardError(f"url {url!r} has no host")
    return domain_matches(host, cfg.allowlist)


@dataclass
class SessionState:
    """Everything remembered about one connection.

    identities holds one frozenset per ingested snapshot; clusters holds the
    representative hash of each anonymous identity minted so far, indexed by
    the number in its "cluster:N" name.
    """

    token: str
    url: str
    allowlisted: bool
    created_ms: float = field(default_factory=lambda: time.monotonic() * 1000.0)
    identities: list[frozenset[str]] = field(default_factory=list)
    clusters: list[np.ndarray] = field(default_factory=list)
    closed: bool = False


def snapshot_identities(raster, reference: ReferenceList, cfg: GuardConfig,
                        ref_hashes: dict[str, list[np.ndarray]] | None,
                        clusters: list[np.ndarray]) -> frozenset[str]:
    """Stable names for the logo-like regions in one frame.

    A region matching a reference logo at or above tolerance is named by its
    brand. Anything else joins the first existing cluster its hash sits
    within tolerance of, or mints a new one; clusters is extended in place
    so later snapshots of the same session reuse the same names.
    """
    det = DetectorConfig(theta=cfg.tolerance, localization_mode="naive")
    shot = Screenshot(raster, "guard", "none", 0)
    names: set[str] = set()
    for (x, y, w, h) in locate_logos(shot, det):
        region = raster.crop(x, y, w, h)
        matched = match_brand(region, reference, det, ref_hashes)
        if matched is not None:
            names.add(_BRAND_PREFIX + matched[0])
            continue
        h_region = embed(region, det.hash_grid)
        for idx, rep in enumerate(clusters):
            if similarity(h_region, rep) >= cfg.tolerance:
                names.add(f"{_CLUSTER_PREFIX}{idx}")
                break
        else:
            clusters.append(h_region)
            names.add(f"{_CLUSTER_PREFIX}{len(clusters) - 1}")
    return frozenset(names)


def temporal_logo_diff(session: SessionState, cfg: GuardConfig) -> VerdictMsg:
    """Verdict from the identity timeline alone.

    Warns iff some snapshot k >= 1 carries an identity absent from every
    earlier snapshot; the smallest such k is the triggering sequence.
    Allowlisted sessions never warn, and fewer than two snapshots give the
    diff nothing to compare.
    """
    del cfg
    if session.allowlisted:
        return VerdictMsg(warn=False, reason="allowlisted")
    if len(session.identities) < 2:
        return VerdictMsg(warn=False, reason="none")
    seen: set[str] = set(session.identities[0])
    for k in range(1, len(session.identities)):
        late = session.identities[k] - seen
        if late:
            # "brand:..." sorts before "cluster:...", so a delayed brand
            # logo is reported by name even when slivers cluster anonymously
            first = min(late)
            brand = (first[len(_BRAND_PREFIX):]
                     if first.startswith(_BRAND_PREFIX) else None)
            return VerdictMsg(warn=True, reason="delayed_logo",
                              matched_brand=brand, triggering_seq=k)
        seen |= session.identities[k]
    return VerdictMsg(warn=False, reason="none")


def ingest_snapshot(session: SessionState, msg: SnapshotMsg,
                    reference: ReferenceList, cfg: GuardConfig,
                    ref_hashes: dict[str, list[np.ndarray]] | None = None,
                    ) -> VerdictMsg | None:
    """Fold one snapshot into a session; the verdict once one is due.

    Allowlisted sessions answer on their first snapshot, warnings are
    emitted the moment the timeline shows a delayed identity, and anything
    else waits for the configured final snapshot. A sequencing violation
    (wrong token, wrong seq, seq past the window, a closed session) raises
    GuardError and closes the session; an undecodable payload raises
    GuardError but leaves the session open so the client may resend.
    """
    if session.closed:
        raise GuardError("session already closed")
    if msg.session != session.token:
        session.closed = True
        raise GuardError(f"session token changed mid-stream: {msg.session!r}")
    expected = len(session.identities)
    if msg.seq != expected:
        session.closed = True
        raise GuardError(f"out-of-order seq {msg.seq}, expected {expected}")
    if msg.seq >= cfg.num_screenshots:
        session.closed = True
        raise GuardError(f"seq {msg.seq} outside the {cfg.num_screenshots}"
                         "-snapshot window")
    try:
        raw = base64.b64decode(msg.png_base64, validate=True)
        raster = raster_from_png_bytes(raw)
    except (binascii.Error, ValueError) as exc:
        raise GuardError(f"undecodable screenshot payload: {exc}") from None
    session.identities.append(
        snapshot_identities(raster, reference, cfg, ref_hashes,
                            session.clusters))
    verdict = temporal_logo_diff(session, cfg)
    done = len(session.identities) == cfg.num_screenshots
    if session.allowlisted or verdict.warn or done:
        session.closed = True
        return verdict
    return None


def build_app(cfg: GuardConfig, reference: ReferenceList) -> FastAPI:
    """The ASGI app: WS /guard for sessions, GET /healthz for liveness."""
    det_grid = DetectorConfig(theta=cfg.tolerance,
                              localization_mode="naive").hash_grid
    ref_hashes = {e.brand: [embed(l, det_grid) for l in e.logos]
                  for e in reference}
    sessions: dict[str, SessionState] = {}
    app = FastAPI()

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "active_sessions": len(sessions)}

    @app.websocket("/guard")
    async def guard_ws(ws: WebSocket) -> None:
        await ws.accept()
        state: SessionState | None = None
        try:
            while True:
                try:
                    text = await asyncio.wait_for(
                        ws.receive_text(),
                        timeout=cfg.session_timeout_ms / 1000.0)
                except asyncio.TimeoutError:
                    # idle session reaped; 1001 = going away
                    await ws.close(code=1001)
                    return
                try:
                    msg = parse_snapshot_msg(text)
                    if state is None:
                        state = SessionState(
                            token=msg.session, url=msg.url,
                            allowlisted=check_allowlist(msg.url, cfg))
                        sessions[state.token] = state
                    # detection is numpy-bound; keep the loop free for
                    # other sessions while this frame is analyzed
                    verdict = await run_in_threadpool(
                        ingest_snapshot, state, msg, reference, cfg,
                        ref_hashes)
                except GuardError as exc:
                    await ws.send_text(json.dumps(
                        {"type": "error", "error": str(exc)},
                        separators=(",", ":"), sort_keys=True))
                    if state is not None and state.closed:
                        await ws.close(code=1008)
                        return
                    continue
                if verdict is not None:
                    await ws.send_text(verdict.to_wire(state.token))
                    await ws.close(code=1000)
                    return
        except WebSocketDisconnect:
            return
        finally:
            if state is not None:
                sessions.pop(state.token, None)

    return app


def serve(cfg: GuardConfig, reference: ReferenceList) -> None:
    """Run the service until interrupted."""
    host, port = split_bind(cfg.bind)
    uvicorn.run(build_app(cfg, reference), host=host, port=port,
                log_level="warning")
