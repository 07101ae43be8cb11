"""Deterministic load-time simulation over a bundle's byte inventory.

The model is deliberately simple and fully documented: each fetched
asset costs one round trip plus its bytes over the shared bandwidth,
scheduled over a fixed pool of connections in list order; decoding or
script processing starts when the transfer completes and does not
occupy a connection. Category transfer totals count pure wire time
(rtt excluded), so doubling the bandwidth halves them exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .bundle import ByteInventory

__all__ = [
    "NetworkModel",
    "ClientModel",
    "LoadReport",
    "TimelineRow",
    "DeferredRow",
    "CategoryTime",
    "ProfilerError",
    "REFERENCE_NETWORK",
    "REFERENCE_CLIENT",
    "simulate_load",
    "render_report",
    "report_from_json",
]

# Fixed presentation order for category tables.
CATEGORY_ORDER = ("document", "viewer_script", "viewer_style",
                  "panorama", "preview", "picture", "cubemap")

# Categories whose processing cost uses the script rate; everything else
# decodes as image data.
_SCRIPT_LIKE = {"document", "viewer_script", "viewer_style"}

# Eager fetch groups in order; the first panorama row joins group 3 and
# all other panoramas, pictures and cubemaps load lazily on interaction.
_POLICIES = ("default",)


class ProfilerError(ValueError):
    """Invalid model, policy or report format."""


@dataclass(frozen=True)
class NetworkModel:
    bandwidth_bps: float  # bits per second
    rtt_ms: float
    connections: int

    def __post_init__(self) -> None:
        if not (self.bandwidth_bps > 0 and self.rtt_ms > 0 and self.connections > 0):
            raise ProfilerError("network model fields must all be positive")


@dataclass(frozen=True)
class ClientModel:
    script_rate_bps: float  # bytes per second of script/markup processing
    image_rate_bps: float   # bytes per second of image decode

    def __post_init__(self) -> None:
        if not (self.script_rate_bps > 0 and self.image_rate_bps > 0):
            raise ProfilerError("client model rates must be positive")


# Documented reference profile used by examples and goldens:
# 8 Mbit/s at 50 ms rtt over 6 connections; 2 MB/s script processing,
# 20 MB/s image decode.
REFERENCE_NETWORK = NetworkModel(8_000_000.0, 50.0, 6)
REFERENCE_CLIENT = ClientModel(2_000_000.0, 20_000_000.0)


@dataclass(frozen=True)
class TimelineRow:
    path: str
    category: str
    start_ms: float
    end_ms: float
    transfer_ms: float    # wire time, rtt excluded
    processing_ms: float


@dataclass(frozen=True)
class DeferredRow:
    """Lazy asset: cost on eventual fetch, not part of the page load."""

    path: str
    category: str
    transfer_ms: float
    processing_ms: float


@dataclass(frozen=True)
class CategoryTime:
    transfer_ms: float
    processing_ms: float


@dataclass
class LoadReport:
    categories: dict[str, CategoryTime]
    timeline: list[TimelineRow]
    deferred: list[DeferredRow]
    critical_path_ms: float
    first_scene_ready_ms: float | None
    network: NetworkModel
    client: ClientModel
    policy: str = "default"


def _wire_ms(byte_size: int, net: NetworkModel) -> float:
    return byte_size * 8.0 / net.bandwidth_bps * 1000.0


def _processing_ms(byte_size: int, category: str, client: ClientModel) -> float:
    rate = client.script_rate_bps if category in _SCRIPT_LIKE else client.image_rate_bps
    return byte_size / rate * 1000.0


def _eager_rows(inv: ByteInventory):
    docs = [r for r in inv.rows if r.category == "document"]
    scripts = [r for r in inv.rows if r.category == "viewer_script"]
    styles = [r for r in inv.rows if r.category == "viewer_style"]
    panoramas = [r for r in inv.rows if r.category == "panorama"]
    previews = [r for r in inv.rows if r.category == "preview"]
    eager = docs + scripts + styles + panoramas[:1] + previews
    lazy = panoramas[1:] + [r for r in inv.rows if r.category in ("picture", "cubemap")]
    first_pano = panoramas[0].path if panoramas else None
    return eager, lazy, first_pano


def simulate_load(inv: ByteInventory, net: NetworkModel, client: ClientModel,
                  policy: str = "default") -> LoadReport:
    """Simulate fetching the bundle: document, then scripts and styles,
    then the first-scene panorama and the previews; pictures, cubemaps
    and the remaining panoramas are deferred to interaction time.

    Per asset: transfer takes rtt + bytes*8/bandwidth on the earliest
    free connection (pool walked in list order); processing follows the
    transfer off-connection. The critical path is the time until every
    eager asset is processed.
    """
    if policy not in _POLICIES:
        raise ProfilerError(f"unknown policy {policy!r}; expected one of {_POLICIES}")

    eager, lazy, first_pano = _eager_rows(inv)

    conn_free = [0.0] * net.connections
    timeline: list[TimelineRow] = []
    critical = 0.0
    first_ready: float | None = None
    for row in eager:
        slot = min(range(len(conn_free)), key=conn_free.__getitem__)
        start = conn_free[slot]
        wire = _wire_ms(row.byte_size, net)
        transfer_end = start + net.rtt_ms + wire
        conn_free[slot] = transfer_end
        processing = _processing_ms(row.byte_size, row.category, client)
        end = transfer_end + processing
        timeline.append(TimelineRow(row.path, row.category, start, end, wire, processing))
        critical = max(critical, end)
        if row.path == first_pano:
            first_ready = end

    deferred = [
        DeferredRow(r.path, r.category, _wire_ms(r.byte_size, net),
                    _processing_ms(r.byte_size, r.category, client))
        for r in lazy
    ]

    categories: dict[str, CategoryTime] = {}
    for cat in CATEGORY_ORDER:
        rows = [r for r in inv.rows if r.category == cat]
        if not rows:
            continue
        categories[cat] = CategoryTime(
            transfer_ms=math.fsum(_wire_ms(r.byte_size, net) for r in rows),
            processing_ms=math.fsum(_processing_ms(r.byte_size, r.category, client) for r in rows),
        )

    return LoadReport(
        categories=categories,
        timeline=timeline,
        deferred=deferred,
        critical_path_ms=critical,
        first_scene_ready_ms=first_ready,
        network=net,
        client=client,
        policy=policy,
    )


def _report_dict(r: LoadReport) -> dict:
    return {
        "policy": r.policy,
        "network": {
            "bandwidth_bps": r.network.bandwidth_bps,
            "rtt_ms": r.network.rtt_ms,
            "connections": r.network.connections,
        },
        "client": {
            "script_rate_bps": r.client.script_rate_bps,
            "image_rate_bps": r.client.image_rate_bps,
        },
        "categories": {
            cat: {"transfer_ms": ct.transfer_ms, "processing_ms": ct.processing_ms}
            for cat, ct in r.categories.items()
        },
        "timeline": [
            {
                "path": t.path,
                "category": t.category,
                "start_ms": t.start_ms,
                "end_ms": t.end_ms,
                "transfer_ms": t.transfer_ms,
                "processing_ms": t.processing_ms,
            }
            for t in r.timeline
        ],
        "deferred": [
            {
                "path": d.path,
                "category": d.category,
                "transfer_ms": d.transfer_ms,
                "processing_ms": d.processing_ms,
            }
            for d in r.deferred
        ],
        "critical_path_ms": r.critical_path_ms,
        "first_scene_ready_ms": r.first_scene_ready_ms,
    }


def report_from_json(text: str) -> LoadReport:
    doc = json.loads(text)
    return LoadReport(
        categories={
            cat: CategoryTime(v["transfer_ms"], v["processing_ms"])
            for cat, v in doc["categories"].items()
        },
        timeline=[
            TimelineRow(t["path"], t["category"], t["start_ms"], t["end_ms"],
                        t["transfer_ms"], t["processing_ms"])
            for t in doc["timeline"]
        ],
        deferred=[
            DeferredRow(d["path"], d["category"], d["transfer_ms"], d["processing_ms"])
            for d in doc["deferred"]
        ],
        critical_path_ms=doc["critical_path_ms"],
        first_scene_ready_ms=doc["first_scene_ready_ms"],
        network=NetworkModel(**doc["network"]),
        client=ClientModel(**doc["client"]),
        policy=doc["policy"],
    )


def render_report(r: LoadReport, fmt: str = "text") -> str:
    """Render a LoadReport as a devtools-style text table or as JSON.

    The JSON form round-trips losslessly through report_from_json; the
    text table groups by category in a fixed order.
    """
    if fmt == "json":
        return json.dumps(_report_dict(r), indent=2) + "\n"
    if fmt != "text":
        raise ProfilerError(f"unknown report format {fmt!r}; expected 'text' or 'json'")

    lines = []
    lines.append(f"{'category':<14} {'transfer ms':>12} {'processing ms':>14}")
    lines.append("-" * 42)
    for cat in CATEGORY_ORDER:
        if cat in r.categories:
            ct = r.categories[cat]
            lines.append(f"{cat:<14} {ct.transfer_ms:>12.2f} {ct.processing_ms:>14.2f}")
    lines.append("")
    lines.append(f"{'asset':<34} {'start ms':>10} {'end ms':>10}")
    lines.append("-" * 56)
    for t in r.timeline:
        lines.append(f"{t.path:<34} {t.start_ms:>10.2f} {t.end_ms:>10.2f}")
    if r.deferred:
        lines.append("")
        lines.append("deferred (fetched on interaction):")
        for d in r.deferred:
            lines.append(f"  {d.path:<32} {d.transfer_ms + d.processing_ms:>10.2f} ms when fetched")
    lines.append("")
    if r.first_scene_ready_ms is not None:
        lines.append(f"first scene ready: {r.first_scene_ready_ms:.2f} ms")
    lines.append(f"critical path:     {r.critical_path_ms:.2f} ms")
    return "\n".join(lines) + "\n"
