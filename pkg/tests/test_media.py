import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossfire import media
from crossfire.errors import (
    MalformedHeader,
    ShapeMismatch,
    TruncatedData,
    TruncatedPixelData,
    UnsupportedEncoding,
    UnsupportedMaxval,
)
from crossfire.numerics import Rng


def write_ppm(path, w, h, pixel_bytes):
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(pixel_bytes)


def write_wav(path, samples, rate=44100):
    pcm = np.asarray(samples, dtype="<i2").tobytes()
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE")
        fh.write(b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16))
        fh.write(b"data" + struct.pack("<I", len(pcm)) + pcm)


class TestMediaTensor:
    def test_image_shape_validation(self):
        with pytest.raises(ShapeMismatch):
            media.image(np.zeros((2, 4, 4)))  # C must be 1 or 3

    def test_range_validation(self):
        with pytest.raises(ShapeMismatch):
            media.image(np.full((3, 2, 2), 1.5))
        with pytest.raises(ShapeMismatch):
            media.audio(np.array([-1.2]))

    def test_immutability(self):
        t = media.image(np.zeros((3, 2, 2)))
        with pytest.raises(ValueError):
            t.data[0, 0, 0] = 1.0

    def test_clamp(self):
        dirty = np.array([[[1.3, -0.2], [0.5, 1.0]]] * 3)
        t = media.clamped(media.IMAGE, dirty)
        assert t.data.max() == 1.0 and t.data.min() == 0.0
        a = media.clamped(media.AUDIO, np.array([-1.5, 0.3]))
        assert a.data[0] == -1.0

    def test_clamp_identity_and_idempotence(self):
        t = media.image(Rng(3).uniforms(12).reshape(3, 2, 2))
        once = media.clamp_to_range(t)
        assert np.array_equal(once.data, t.data)
        assert np.array_equal(media.clamp_to_range(once).data, once.data)


class TestPpm:
    def test_single_red_pixel(self, tmp_path):
        p = tmp_path / "px.ppm"
        write_ppm(p, 1, 1, bytes([255, 0, 0]))
        t = media.load_image(str(p))
        np.testing.assert_array_equal(t.data, [[[1.0]], [[0.0]], [[0.0]]])

    def test_all_zero_2x2(self, tmp_path):
        p = tmp_path / "z.ppm"
        write_ppm(p, 2, 2, bytes(12))
        t = media.load_image(str(p))
        assert t.shape == (3, 2, 2)
        assert np.all(t.data == 0.0)

    def test_round_trip_byte_identity(self, tmp_path):
        p1, p2 = tmp_path / "a.ppm", tmp_path / "b.ppm"
        payload = bytes(int(x) for x in Rng(8).raw(48) % 256)
        write_ppm(p1, 4, 4, payload)
        media.save_image(media.load_image(str(p1)), str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    @pytest.mark.parametrize(
        "value,byte", [(1.0, 255), (0.5, 128), (16 / 255, 16), (0.0, 0)]
    )
    def test_save_quantization(self, tmp_path, value, byte):
        p = tmp_path / "q.ppm"
        media.save_image(media.image(np.full((3, 1, 1), value)), str(p))
        assert p.read_bytes()[-3:] == bytes([byte] * 3)

    def test_quantization_error_bound(self, tmp_path):
        p = tmp_path / "e.ppm"
        t = media.image(Rng(12).uniforms(3 * 5 * 7).reshape(3, 5, 7))
        media.save_image(t, str(p))
        back = media.load_image(str(p))
        assert np.abs(back.data - t.data).max() <= 1 / (2 * 255)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.ppm"
        p.write_bytes(b"P5\n1 1\n255\n\x00")
        with pytest.raises(MalformedHeader):
            media.load_image(str(p))

    def test_unsupported_maxval(self, tmp_path):
        p = tmp_path / "m.ppm"
        p.write_bytes(b"P6\n1 1\n65535\n" + bytes(6))
        with pytest.raises(UnsupportedMaxval):
            media.load_image(str(p))

    def test_truncated_pixels(self, tmp_path):
        p = tmp_path / "t.ppm"
        p.write_bytes(b"P6\n2 2\n255\n" + bytes(5))
        with pytest.raises(TruncatedPixelData):
            media.load_image(str(p))

    def test_non_numeric_header(self, tmp_path):
        p = tmp_path / "h.ppm"
        p.write_bytes(b"P6\nxx 1\n255\n" + bytes(3))
        with pytest.raises(MalformedHeader):
            media.load_image(str(p))

    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_round_trip_property(self, w, h, seed):
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            p1, p2 = f"{tmp}/a.ppm", f"{tmp}/b.ppm"
            payload = bytes(int(x) for x in Rng(seed).raw(w * h * 3) % 256)
            write_ppm(p1, w, h, payload)
            media.save_image(media.load_image(p1), p2)
            with open(p1, "rb") as f1, open(p2, "rb") as f2:
                assert f1.read() == f2.read()


class TestWav:
    @pytest.mark.parametrize("sample,value", [(-32768, -1.0), (0, 0.0), (16384, 0.5)])
    def test_load_mapping(self, tmp_path, sample, value):
        p = tmp_path / "s.wav"
        write_wav(p, [sample])
        assert media.load_audio(str(p)).data[0] == value

    def test_round_trip_byte_identity(self, tmp_path):
        p1, p2 = tmp_path / "a.wav", tmp_path / "b.wav"
        samples = (Rng(4).raw(100) % 65536).astype(np.int64) - 32768
        write_wav(p1, samples)
        media.save_audio(media.load_audio(str(p1)), str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_load_save_load_idempotent(self, tmp_path):
        p1, p2 = tmp_path / "a.wav", tmp_path / "b.wav"
        t = media.audio(Rng(6).uniforms(64) * 2 - 1)
        media.save_audio(t, str(p1))
        once = media.load_audio(str(p1))
        media.save_audio(once, str(p2))
        twice = media.load_audio(str(p2))
        assert np.array_equal(once.data, twice.data)

    def test_quantization_error_bound(self, tmp_path):
        p = tmp_path / "e.wav"
        t = media.audio(Rng(13).uniforms(200) * 2 - 1)
        media.save_audio(t, str(p))
        back = media.load_audio(str(p))
        assert np.abs(back.data - t.data).max() <= 1 / (2 * 32767)

    def test_sample_rate_preserved(self, tmp_path):
        p = tmp_path / "r.wav"
        write_wav(p, [0, 100], rate=8000)
        t = media.load_audio(str(p))
        assert t.sample_rate == 8000
        p2 = tmp_path / "r2.wav"
        media.save_audio(t, str(p2))
        assert media.load_audio(str(p2)).sample_rate == 8000

    def test_stereo_rejected(self, tmp_path):
        p = tmp_path / "st.wav"
        pcm = bytes(8)
        with open(p, "wb") as fh:
            fh.write(b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE")
            fh.write(b"fmt " + struct.pack("<IHHIIHH", 16, 1, 2, 44100, 176400, 4, 16))
            fh.write(b"data" + struct.pack("<I", len(pcm)) + pcm)
        with pytest.raises(UnsupportedEncoding):
            media.load_audio(str(p))

    def test_truncated_data_chunk(self, tmp_path):
        p = tmp_path / "tr.wav"
        with open(p, "wb") as fh:
            fh.write(b"RIFF" + struct.pack("<I", 100) + b"WAVE")
            fh.write(b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, 44100, 88200, 2, 16))
            fh.write(b"data" + struct.pack("<I", 64) + bytes(10))
        with pytest.raises(TruncatedData):
            media.load_audio(str(p))


class TestSniffing:
    def test_format_from_magic_not_extension(self, tmp_path):
        p = tmp_path / "actually_audio.ppm"
        write_wav(p, [0, 1, 2])
        assert media.sniff_format(str(p)) == media.FORMAT_WAV
        t = media.load_media(str(p))
        assert t.kind == media.AUDIO

    def test_unknown_magic(self, tmp_path):
        p = tmp_path / "junk.bin"
        p.write_bytes(b"\x00\x01\x02\x03")
        with pytest.raises(MalformedHeader):
            media.sniff_format(str(p))

    def test_media_path_carries_format(self, tmp_path):
        p = tmp_path / "x.ppm"
        write_ppm(p, 1, 1, bytes(3))
        mp = media.MediaPath(str(p))
        assert mp.format == media.FORMAT_PPM
