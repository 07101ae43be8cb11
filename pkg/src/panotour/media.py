"""Panorama media handling: decode, XMP projection tag, validity rules.

The XMP handling is a minimal packet splicer, not an XML/RDF engine:
only the ProjectionType property matters here. Packets are located by
the literal ``<?xpacket begin`` / ``<?xpacket end`` markers.
"""

from __future__ import annotations

import io
import logging
import re
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .geometry import Dimensions
from .projection import EquirectImage, Raster

__all__ = [
    "ProjectionMetadata",
    "MediaLimits",
    "Finding",
    "ValidationReport",
    "MediaError",
    "decode_image",
    "read_xmp_projection",
    "inject_xmp_projection",
    "validate_panorama",
    "encode_png",
    "encode_jpeg",
]

logger = logging.getLogger(__name__)

EQUIRECTANGULAR = "equirectangular"

_XMP_BEGIN = b"<?xpacket begin"
_XMP_END = b"<?xpacket end"
_JPEG_XMP_HEADER = b"http://ns.adobe.com/xap/1.0/\x00"
_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_PNG_XMP_KEYWORD = b"XML:com.adobe.xmp"

_ATTR_RE = re.compile(r'(?:^|[\s"<])(?:[\w-]+:)?ProjectionType\s*=\s*["\']([^"\']*)["\']')
_ELEM_RE = re.compile(r"<(?:[\w-]+:)?ProjectionType(?:\s[^>]*)?>([^<]*)<")


class MediaError(ValueError):
    """Decode or splice failure on an image byte stream."""


@dataclass(frozen=True)
class ProjectionMetadata:
    """Source facts about a decoded panorama stream."""

    projection_type: str | None
    byte_size: int
    dims: Dimensions
    format: str  # "PNG" or "JPEG"

    def __post_init__(self) -> None:
        if self.byte_size <= 0:
            raise MediaError(f"byte_size must be positive, got {self.byte_size}")


@dataclass(frozen=True)
class MediaLimits:
    """Maximum accepted panorama resolution and file size.

    The defaults (8192x4096, 32 MiB) are artifact configuration and can
    be overridden via the CLI config file.
    """

    max_width: int = 8192
    max_height: int = 4096
    max_bytes: int = 32 * 1024 * 1024

    def __post_init__(self) -> None:
        if min(self.max_width, self.max_height, self.max_bytes) <= 0:
            raise MediaError("media limits must all be positive")


@dataclass(frozen=True)
class Finding:
    """One validation outcome; ``location`` is empty for media findings."""

    code: str
    severity: str  # "error" | "warning"
    message: str
    location: str = ""


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(f.severity == "error" for f in self.findings)

    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]


def read_xmp_projection(data: bytes) -> str | None:
    """Extract the ProjectionType value from an embedded XMP packet.

    Accepts both the attribute form (ProjectionType="...") and the
    element form (<ns:ProjectionType>...</ns:ProjectionType>). Returns
    None when no packet or no property is present; a packet that opens
    without closing is noted and treated as absent.
    """
    start = data.find(_XMP_BEGIN)
    if start == -1:
        return None
    end = data.find(_XMP_END, start)
    if end == -1:
        logger.warning("XMP packet opens at offset %d but never closes; ignoring", start)
        return None
    packet = data[start:end].decode("utf-8", errors="replace")
    m = _ATTR_RE.search(packet)
    if m:
        return m.group(1)
    m = _ELEM_RE.search(packet)
    if m:
        return m.group(1).strip()
    return None


def _xmp_packet(value: str) -> bytes:
    body = (
        '<?xpacket begin="﻿" id="W5M0MpCehiHzreSzNTczkc9d"?>\n'
        '<x:xmpmeta xmlns:x="adobe:ns:meta/">\n'
        ' <rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">\n'
        '  <rdf:Description rdf:about=""\n'
        '    xmlns:GPano="http://ns.google.com/photos/1.0/panorama/"\n'
        f'    GPano:ProjectionType="{value}"/>\n'
        " </rdf:RDF>\n"
        "</x:xmpmeta>\n"
        '<?xpacket end="w"?>'
    )
    return body.encode("utf-8")


def _jpeg_header_segments(data: bytes):
    """Yield (marker, start, end) for every segment before the scan data."""
    if len(data) < 4 or data[:2] != b"\xff\xd8":
        raise MediaError("not a JPEG stream (missing SOI)")
    i = 2
    n = len(data)
    while i < n:
        if data[i] != 0xFF:
            raise MediaError(f"bad JPEG marker byte at offset {i}")
        j = i
        while j < n and data[j] == 0xFF:  # fill bytes
            j += 1
        if j >= n:
            raise MediaError(f"truncated JPEG at offset {i}")
        marker = data[j]
        if marker == 0xDA:  # SOS: entropy-coded data follows
            return
        if marker == 0xD9:  # EOI
            return
        if 0xD0 <= marker <= 0xD7 or marker == 0x01:  # RSTn / TEM: no payload
            i = j + 1
            continue
        if j + 3 > n:
            raise MediaError(f"truncated JPEG segment header at offset {j}")
        length = struct.unpack(">H", data[j + 1:j + 3])[0]
        end = j + 1 + length
        if length < 2 or end > n:
            raise MediaError(f"bad JPEG segment length at offset {j}")
        yield marker, i, end
        i = end


def _inject_xmp_jpeg(data: bytes, packet: bytes) -> bytes:
    keep: list[tuple[int, int]] = []
    insert_at = 2
    tail_start = 2
    for marker, start, end in _jpeg_header_segments(data):
        tail_start = end
        payload_start = start
        while data[payload_start] == 0xFF:
            payload_start += 1
        payload_start += 3  # marker id + 2 length bytes
        if marker == 0xE1 and data[payload_start:payload_start + len(_JPEG_XMP_HEADER)] == _JPEG_XMP_HEADER:
            continue  # drop existing XMP APP1
        keep.append((start, end))
        if marker in (0xE0, 0xE1) and insert_at == start:
            insert_at = end  # keep JFIF/Exif blocks ahead of the XMP segment

    app1 = _JPEG_XMP_HEADER + packet
    if len(app1) + 2 > 0xFFFF:
        raise MediaError("XMP packet too large for a JPEG APP1 segment")
    segment = b"\xff\xe1" + struct.pack(">H", len(app1) + 2) + app1

    out = bytearray(data[:2])
    inserted = False
    for start, end in keep:
        if not inserted and start >= insert_at:
            out += segment
            inserted = True
        out += data[start:end]
    if not inserted:
        out += segment
    out += data[tail_start:]
    return bytes(out)


def _png_chunks(data: bytes):
    """Yield (type, start, end) for each chunk; offsets cover the whole chunk."""
    if data[:8] != _PNG_MAGIC:
        raise MediaError("not a PNG stream (bad signature)")
    i = 8
    n = len(data)
    while i < n:
        if i + 8 > n:
            raise MediaError(f"truncated PNG chunk header at offset {i}")
        length = struct.unpack(">I", data[i:i + 4])[0]
        ctype = data[i + 4:i + 8]
        end = i + 12 + length
        if end > n:
            raise MediaError(f"truncated PNG chunk at offset {i}")
        yield ctype, i, end
        i = end


def _png_chunk(ctype: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(ctype + payload) & 0xFFFFFFFF
    return struct.pack(">I", len(payload)) + ctype + payload + struct.pack(">I", crc)


def _inject_xmp_png(data: bytes, packet: bytes) -> bytes:
    itxt = _PNG_XMP_KEYWORD + b"\x00\x00\x00\x00\x00" + packet
    new_chunk = _png_chunk(b"iTXt", itxt)
    out = bytearray(_PNG_MAGIC)
    inserted = False
    for ctype, start, end in _png_chunks(data):
        if ctype == b"iTXt" and data[start + 8:start + 8 + len(_PNG_XMP_KEYWORD) + 1] == _PNG_XMP_KEYWORD + b"\x00":
            continue  # replace existing XMP text chunk
        out += data[start:end]
        if ctype == b"IHDR" and not inserted:
            out += new_chunk
            inserted = True
    if not inserted:
        raise MediaError("PNG stream has no IHDR chunk")
    return bytes(out)


def inject_xmp_projection(data: bytes, value: str) -> bytes:
    """Return a stream with the same raster and an XMP ProjectionType of
    ``value``; any previous XMP packet is replaced, not duplicated."""
    decode_image(data)  # reject non-decodable input up front
    packet = _xmp_packet(value)
    if data[:8] == _PNG_MAGIC:
        return _inject_xmp_png(data, packet)
    if data[:2] == b"\xff\xd8":
        return _inject_xmp_jpeg(data, packet)
    raise MediaError("XMP injection supports PNG and JPEG streams only")


def decode_image(data: bytes) -> tuple[EquirectImage, ProjectionMetadata]:
    """Decode PNG/JPEG bytes into a raster plus its source metadata."""
    if not data:
        raise MediaError("empty byte stream (0 bytes)")
    try:
        with Image.open(io.BytesIO(data)) as im:
            fmt = im.format
            if fmt not in ("PNG", "JPEG"):
                raise MediaError(f"unsupported image format {fmt!r} (want PNG or JPEG)")
            if im.mode not in ("RGB", "RGBA"):
                has_alpha = im.mode in ("RGBA", "LA", "PA") or "transparency" in im.info
                im = im.convert("RGBA" if has_alpha else "RGB")
            pixels = np.asarray(im, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise MediaError(f"cannot identify image format in {len(data)}-byte stream") from exc
    except OSError as exc:
        raise MediaError(f"failed to decode {len(data)}-byte stream: {exc}") from exc

    dims = Dimensions(pixels.shape[1], pixels.shape[0])
    meta = ProjectionMetadata(
        projection_type=read_xmp_projection(data),
        byte_size=len(data),
        dims=dims,
        format=fmt,
    )
    img = EquirectImage(dims=dims, pixels=pixels, source_metadata=meta)
    return img, meta


def validate_panorama(meta: ProjectionMetadata, limits: MediaLimits | None = None) -> ValidationReport:
    """Check the three panorama requirements: 2:1 aspect, the
    equirectangular XMP tag, and resolution/file-size limits."""
    limits = limits or MediaLimits()
    w, h = meta.dims.width, meta.dims.height
    findings: list[Finding] = []
    if w != 2 * h:
        findings.append(Finding(
            "ASPECT", "error",
            f"panorama must have a 2:1 aspect ratio; got {w}x{h}",
        ))
    if meta.projection_type != EQUIRECTANGULAR:
        got = "absent" if meta.projection_type is None else repr(meta.projection_type)
        findings.append(Finding(
            "XMP", "error",
            f"XMP ProjectionType must be {EQUIRECTANGULAR!r}; got {got}",
        ))
    if w > limits.max_width or h > limits.max_height:
        findings.append(Finding(
            "RESOLUTION", "error",
            f"{w}x{h} exceeds the {limits.max_width}x{limits.max_height} limit",
        ))
    if meta.byte_size > limits.max_bytes:
        findings.append(Finding(
            "FILESIZE", "error",
            f"{meta.byte_size} bytes exceeds the {limits.max_bytes}-byte limit",
        ))
    return ValidationReport(findings)


def _to_pil(raster: Raster | EquirectImage | np.ndarray) -> Image.Image:
    pixels = raster if isinstance(raster, np.ndarray) else raster.pixels
    mode = "RGBA" if pixels.shape[2] == 4 else "RGB"
    return Image.fromarray(pixels, mode=mode)


def encode_png(raster: Raster | EquirectImage | np.ndarray) -> bytes:
    buf = io.BytesIO()
    _to_pil(raster).save(buf, format="PNG")
    return buf.getvalue()


def encode_jpeg(raster: Raster | EquirectImage | np.ndarray, quality: int = 90) -> bytes:
    im = _to_pil(raster)
    if im.mode == "RGBA":
        im = im.convert("RGB")
    buf = io.BytesIO()
    im.save(buf, format="JPEG", quality=quality)
    return buf.getvalue()
