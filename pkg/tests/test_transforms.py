import numpy as np
import pytest

from crossfire import media
from crossfire.encoders import PatchConvSpec, make_encoder
from crossfire.errors import ShapeMismatch, UnmappedLabel
from crossfire.transforms import (
    DEFAULT_MULTI_ELEMENT_LABELS,
    DEFAULT_SINGLE_ELEMENT_LABELS,
    FileBasedProvider,
    ProceduralProvider,
    TargetedInput,
    label_prototypes,
    synthetic_media,
    transform_target,
)

IMG_SHAPE = (3, 16, 16)


def flat_cos(a, b):
    x, y = a.data.reshape(-1), b.data.reshape(-1)
    return float(x @ y / (np.linalg.norm(x) * np.linalg.norm(y)))


class TestTargetedInput:
    def test_elements_must_be_lowercase_tokens(self):
        with pytest.raises(ValueError):
            TargetedInput("A huge Tiger", ["Tiger"])
        with pytest.raises(ValueError):
            TargetedInput("x", ["two words"])
        with pytest.raises(ValueError):
            TargetedInput("x", [])

    def test_default_label_sets(self):
        assert len(DEFAULT_SINGLE_ELEMENT_LABELS) == 10
        assert len(DEFAULT_MULTI_ELEMENT_LABELS) == 10
        assert DEFAULT_SINGLE_ELEMENT_LABELS[0].elements == ("tiger",)
        assert "dog" in DEFAULT_MULTI_ELEMENT_LABELS[1].elements
        assert "ball" in DEFAULT_MULTI_ELEMENT_LABELS[1].elements


class TestProcedural:
    def setup_method(self):
        self.prov = ProceduralProvider(seed=7)
        self.tiger = TargetedInput("A huge tiger", ["tiger"])
        self.wolf = TargetedInput("A wolf", ["wolf"])

    def test_deterministic(self):
        a = transform_target(self.prov, self.tiger, IMG_SHAPE)
        b = transform_target(self.prov, self.tiger, IMG_SHAPE)
        assert np.array_equal(a.data, b.data)

    def test_in_valid_range(self):
        for target in (self.tiger, TargetedInput("x", ["dog", "ball"])):
            img = transform_target(self.prov, target, IMG_SHAPE)
            assert img.data.min() >= 0.0 and img.data.max() <= 1.0
            aud = transform_target(self.prov, target, (256,))
            assert aud.data.min() >= -1.0 and aud.data.max() <= 1.0

    def test_distinct_labels_distinct_fixtures(self):
        a = transform_target(self.prov, self.tiger, IMG_SHAPE)
        b = transform_target(self.prov, self.wolf, IMG_SHAPE)
        assert 1.0 - flat_cos(a, b) > 0.1

    def test_seed_changes_fixture(self):
        a = transform_target(ProceduralProvider(seed=7), self.tiger, IMG_SHAPE)
        b = transform_target(ProceduralProvider(seed=8), self.tiger, IMG_SHAPE)
        assert np.any(a.data != b.data)

    def test_multi_element_correlates_with_components(self):
        composite = transform_target(self.prov, TargetedInput("x", ["dog", "ball"]), IMG_SHAPE)
        dog = transform_target(self.prov, TargetedInput("x", ["dog"]), IMG_SHAPE)
        zebra = transform_target(self.prov, TargetedInput("x", ["zebra"]), IMG_SHAPE)
        assert flat_cos(composite, dog) > flat_cos(composite, zebra)

    def test_audio_label_frequencies_differ(self):
        a = transform_target(self.prov, self.tiger, (512,))
        b = transform_target(self.prov, self.wolf, (512,))
        fa = np.abs(np.fft.rfft(a.data)).argmax()
        fb = np.abs(np.fft.rfft(b.data)).argmax()
        assert fa != fb


class TestFileBased:
    def test_single_element_pass_through(self, tmp_path):
        fixture = media.image(np.linspace(0, 1, 3 * 4 * 4).reshape(3, 4, 4))
        path = str(tmp_path / "tiger.ppm")
        media.save_image(fixture, path)
        prov = FileBasedProvider({"tiger": path})
        got = transform_target(prov, TargetedInput("A tiger", ["tiger"]), (3, 4, 4))
        assert np.array_equal(got.data, media.load_image(path).data)

    def test_unmapped_label(self, tmp_path):
        prov = FileBasedProvider({})
        with pytest.raises(UnmappedLabel):
            transform_target(prov, TargetedInput("A tiger", ["tiger"]), (3, 4, 4))

    def test_shape_mismatch(self, tmp_path):
        path = str(tmp_path / "t.ppm")
        media.save_image(media.image(np.zeros((3, 2, 2))), path)
        with pytest.raises(ShapeMismatch):
            transform_target(FileBasedProvider({"tiger": path}), TargetedInput("A tiger", ["tiger"]), (3, 4, 4))

    def test_multi_element_averages(self, tmp_path):
        a = media.image(np.full((3, 2, 2), 0.2))
        b = media.image(np.full((3, 2, 2), 0.8))
        pa, pb = str(tmp_path / "a.ppm"), str(tmp_path / "b.ppm")
        media.save_image(a, pa)
        media.save_image(b, pb)
        prov = FileBasedProvider({"dog": pa, "ball": pb})
        got = transform_target(prov, TargetedInput("x", ["dog", "ball"]), (3, 2, 2))
        np.testing.assert_allclose(got.data, 0.5)


class TestLabelPrototypes:
    def test_ten_unit_vectors(self):
        enc = make_encoder(PatchConvSpec(patch=16, hidden=768, out_dim=768), IMG_SHAPE, 1)
        protos = label_prototypes(ProceduralProvider(7), DEFAULT_SINGLE_ELEMENT_LABELS, enc)
        assert len(protos) == 10
        for p in protos:
            assert abs(np.linalg.norm(p) - 1.0) <= 1e-6

    def test_pairwise_similarity_below_guard(self):
        enc = make_encoder(PatchConvSpec(patch=16, hidden=768, out_dim=768), IMG_SHAPE, 1)
        protos = np.array(label_prototypes(ProceduralProvider(7), DEFAULT_SINGLE_ELEMENT_LABELS, enc))
        gram = protos @ protos.T
        off = gram[~np.eye(len(protos), dtype=bool)]
        assert off.max() < 0.99

    def test_single_label(self):
        enc = make_encoder(PatchConvSpec(patch=8, hidden=32, out_dim=16), (3, 8, 8), 1)
        protos = label_prototypes(ProceduralProvider(7), [TargetedInput("A tiger", ["tiger"])], enc)
        assert len(protos) == 1
        assert np.linalg.norm(protos[0]) == pytest.approx(1.0, abs=1e-6)

    def test_duplicate_labels_rejected(self):
        enc = make_encoder(PatchConvSpec(patch=8, hidden=32, out_dim=16), (3, 8, 8), 1)
        labs = [TargetedInput("A tiger", ["tiger"])] * 2
        with pytest.raises(ValueError):
            label_prototypes(ProceduralProvider(7), labs, enc)


class TestSyntheticMedia:
    def test_deterministic_and_in_range(self):
        a = synthetic_media("sample000", 3, IMG_SHAPE)
        b = synthetic_media("sample000", 3, IMG_SHAPE)
        assert np.array_equal(a.data, b.data)
        assert a.data.min() >= 0.0 and a.data.max() <= 1.0

    def test_tags_differ(self):
        a = synthetic_media("sample000", 3, IMG_SHAPE)
        b = synthetic_media("sample001", 3, IMG_SHAPE)
        assert np.any(a.data != b.data)

    def test_audio_in_range(self):
        t = synthetic_media("clip000", 4, (512,))
        assert t.kind == media.AUDIO
        assert t.data.min() >= -1.0 and t.data.max() <= 1.0
