"""Media decode, XMP packet handling, and the panorama validity rules."""

import numpy as np
import pytest

from panotour.geometry import Dimensions
from panotour.media import (
    EQUIRECTANGULAR,
    MediaError,
    MediaLimits,
    ProjectionMetadata,
    decode_image,
    encode_jpeg,
    encode_png,
    inject_xmp_projection,
    read_xmp_projection,
    validate_panorama,
)

from conftest import make_noise_panorama


def meta(w=4096, h=2048, projection=EQUIRECTANGULAR, byte_size=1_000_000, fmt="PNG"):
    return ProjectionMetadata(projection_type=projection, byte_size=byte_size,
                              dims=Dimensions(w, h), format=fmt)


class TestReadXmp:
    def test_attribute_form(self):
        data = (b'garbage<?xpacket begin="x" id="y"?><rdf:Description '
                b'GPano:ProjectionType="equirectangular"/><?xpacket end="w"?>tail')
        assert read_xmp_projection(data) == EQUIRECTANGULAR

    def test_element_form_matches_attribute_form(self):
        attr = (b'<?xpacket begin?><x GPano:ProjectionType="cylindrical"/>'
                b'<?xpacket end?>')
        elem = (b'<?xpacket begin?><GPano:ProjectionType>cylindrical'
                b'</GPano:ProjectionType><?xpacket end?>')
        assert read_xmp_projection(attr) == read_xmp_projection(elem) == "cylindrical"

    def test_no_packet(self):
        assert read_xmp_projection(b"just bytes, no markers") is None

    def test_packet_without_property(self):
        data = b'<?xpacket begin?><rdf:RDF/><?xpacket end?>'
        assert read_xmp_projection(data) is None

    def test_unterminated_packet_treated_as_absent(self):
        data = b'<?xpacket begin?><x ProjectionType="equirectangular"/>'
        assert read_xmp_projection(data) is None


class TestInjectXmp:
    @pytest.mark.parametrize("encode", [encode_png, encode_jpeg])
    def test_inject_then_read_round_trips(self, encode):
        stream = encode(make_noise_panorama(64, 32, seed=1))
        tagged = inject_xmp_projection(stream, EQUIRECTANGULAR)
        assert read_xmp_projection(tagged) == EQUIRECTANGULAR

    @pytest.mark.parametrize("encode", [encode_png, encode_jpeg])
    def test_reinjection_replaces_not_duplicates(self, encode):
        stream = encode(make_noise_panorama(64, 32, seed=2))
        once = inject_xmp_projection(stream, "cylindrical")
        twice = inject_xmp_projection(once, EQUIRECTANGULAR)
        assert twice.count(b"<?xpacket begin") == 1
        assert read_xmp_projection(twice) == EQUIRECTANGULAR

    @pytest.mark.parametrize("encode", [encode_png, encode_jpeg])
    def test_raster_bit_exact_after_injection(self, encode):
        stream = encode(make_noise_panorama(64, 32, seed=3))
        tagged = inject_xmp_projection(stream, EQUIRECTANGULAR)
        before, _ = decode_image(stream)
        after, _ = decode_image(tagged)
        assert np.array_equal(before.pixels, after.pixels)

    def test_arbitrary_values_round_trip(self):
        stream = encode_png(make_noise_panorama(16, 8, seed=4))
        for value in ("equirectangular", "Cylindrical-2", "a b c", "panorama_v1.0"):
            assert read_xmp_projection(inject_xmp_projection(stream, value)) == value

    def test_non_decodable_input_rejected(self):
        with pytest.raises(MediaError):
            inject_xmp_projection(b"\xff\xd8 not really a jpeg", "x")


class TestDecodeImage:
    def test_png_with_tag(self):
        img = make_noise_panorama(128, 64, seed=5)
        data = inject_xmp_projection(encode_png(img), EQUIRECTANGULAR)
        decoded, m = decode_image(data)
        assert m.projection_type == EQUIRECTANGULAR
        assert m.format == "PNG"
        assert m.byte_size == len(data)
        assert m.dims == Dimensions(128, 64)
        assert np.array_equal(decoded.pixels, img.pixels)
        assert decoded.source_metadata is m

    def test_jpeg_with_tag(self):
        img = make_noise_panorama(128, 64, seed=6)
        data = inject_xmp_projection(encode_jpeg(img), EQUIRECTANGULAR)
        decoded, m = decode_image(data)
        assert m.projection_type == EQUIRECTANGULAR
        assert m.format == "JPEG"
        assert decoded.dims == Dimensions(128, 64)

    def test_png_without_packet_has_no_projection(self):
        data = encode_png(make_noise_panorama(32, 16, seed=7))
        _, m = decode_image(data)
        assert m.projection_type is None

    def test_empty_input(self):
        with pytest.raises(MediaError):
            decode_image(b"")

    def test_garbage_input(self):
        with pytest.raises(MediaError):
            decode_image(b"\x00" * 64)

    def test_truncated_png(self):
        data = encode_png(make_noise_panorama(64, 32, seed=8))
        with pytest.raises(MediaError):
            decode_image(data[: len(data) // 2])

    def test_rgba_preserved(self):
        img = make_noise_panorama(32, 16, channels=4, seed=9)
        decoded, _ = decode_image(encode_png(img))
        assert decoded.channels == 4
        assert np.array_equal(decoded.pixels, img.pixels)


class TestValidatePanorama:
    def test_conforming_panorama_ok(self):
        report = validate_panorama(meta())
        assert report.ok and report.findings == []

    def test_camera_still_resolution_fails_aspect(self):
        report = validate_panorama(meta(w=2304, h=1296))
        assert not report.ok
        assert [f.code for f in report.errors()] == ["ASPECT"]

    def test_untagged_fails_xmp_only(self):
        report = validate_panorama(meta(projection=None))
        assert [f.code for f in report.errors()] == ["XMP"]

    def test_wrong_tag_fails_xmp(self):
        report = validate_panorama(meta(projection="cylindrical"))
        assert [f.code for f in report.errors()] == ["XMP"]

    def test_resolution_limit(self):
        report = validate_panorama(meta(w=16384, h=8192))
        assert [f.code for f in report.errors()] == ["RESOLUTION"]

    def test_filesize_limit(self):
        report = validate_panorama(meta(byte_size=33 * 1024 * 1024))
        assert [f.code for f in report.errors()] == ["FILESIZE"]

    def test_limits_overridable(self):
        limits = MediaLimits(max_width=1024, max_height=512, max_bytes=100)
        report = validate_panorama(meta(w=2048, h=1024, byte_size=101), limits)
        assert sorted(f.code for f in report.errors()) == ["FILESIZE", "RESOLUTION"]

    def test_all_violations_reported_together(self):
        report = validate_panorama(meta(w=9000, h=5000, projection=None,
                                        byte_size=64 * 1024 * 1024))
        assert sorted(f.code for f in report.errors()) == [
            "ASPECT", "FILESIZE", "RESOLUTION", "XMP",
        ]

    def test_purity(self):
        m = meta(w=100, h=70)
        assert validate_panorama(m).findings == validate_panorama(m).findings
