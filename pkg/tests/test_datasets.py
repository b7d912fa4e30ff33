"""
Tests for dataset generation, ingestion, persistence and batching.
"""
import numpy as np
import pytest

from guidance_lab.domain.entities import ParityExample
from guidance_lab.domain.exceptions import DatasetError
from guidance_lab.domain.value_objects import TaskName
from guidance_lab.infrastructure.config import DataConfig
from guidance_lab.infrastructure.datasets import (
    ImageSynthSpec,
    batch_bounds,
    build_dataset,
    build_lm_dataset,
    collate,
    copy_paste_example,
    copy_tokens,
    count_batches,
    gen_copy_paste,
    gen_parity,
    iterate_batches,
    load_dataset,
    load_image_dataset,
    pad_id_for,
    parity_label,
    read_image_file,
    save_dataset,
    split_sizes,
    write_image_file,
)
from guidance_lab.shared.constants import IGNORE_INDEX
from guidance_lab.shared.core import RngState


@pytest.fixture
def corpus_file(tmp_path):
    text = "the quick brown fox jumps over the lazy dog. " * 40
    path = tmp_path / "corpus.txt"
    path.write_text(text, encoding="utf-8")
    return path


class TestSplits:

    def test_full_scale_sizes(self):
        assert split_sizes(100000) == (80000, 10000, 10000)

    def test_remainder_goes_to_test(self):
        assert split_sizes(7) == (5, 0, 2)

    def test_synthetic_image_sizes(self):
        split = load_image_dataset(synth_spec=ImageSynthSpec(classes=4, height=8, width=8, n=40), seed=0)
        assert split.sizes() == (32, 4, 4)


class TestCopyPaste:

    def test_tokens(self):
        assert copy_tokens(10) == (0, 11, 12)

    def test_hand_built_example(self):
        example = copy_paste_example("x", [3, 7, 1])
        assert list(example.input_tokens) == [3, 7, 1, 11, 0, 0, 0]
        assert list(example.target_tokens) == [IGNORE_INDEX] * 4 + [3, 7, 1]

    def test_content_out_of_range(self):
        with pytest.raises(DatasetError):
            copy_paste_example("x", [0, 4])

    def test_generated_lengths(self):
        split = gen_copy_paste(50, (20, 40), seed=1)
        for example in split.train + split.val + split.test:
            k = (len(example) - 1) // 2
            assert 20 <= 2 * k + 2 <= 40
            assert example.input_tokens[k] == 11
            assert list(example.target_tokens[k + 1:]) == list(example.input_tokens[:k])

    def test_seed_reproduces_manifest(self):
        assert gen_copy_paste(30, seed=3).manifest_hash == gen_copy_paste(30, seed=3).manifest_hash
        assert gen_copy_paste(30, seed=3).manifest_hash != gen_copy_paste(30, seed=4).manifest_hash

    def test_len_range_outside_task_bounds(self):
        with pytest.raises(DatasetError):
            gen_copy_paste(10, (10, 40))


class TestParity:

    @pytest.mark.parametrize("bits,label", [("0110", 1), ("1", 0), ("00", 1), ("111", 0)])
    def test_label(self, bits, label):
        assert parity_label([int(b) for b in bits]) == label

    def test_example_rejects_wrong_label(self):
        with pytest.raises(ValueError):
            ParityExample("x", (1, 1), 0)

    def test_generated_lengths_and_labels(self):
        split = gen_parity(40, (2, 5), seed=2)
        for example in split.train:
            assert 2 <= len(example) <= 5
            assert example.label == parity_label(example.bits)
        assert pad_id_for(split) == 0

    def test_ids_are_disjoint(self):
        split = gen_parity(20, seed=0)
        ids = [ex.example_id for ex in split.train + split.val + split.test]
        assert len(ids) == len(set(ids)) == 20


class TestLanguageModeling:

    def test_windows_shift_by_one(self, corpus_file):
        split = build_lm_dataset(corpus_file, context_len=16, seed=0)
        example = split.train[0]
        assert len(example) == 16
        assert example.input_tokens[1:] == example.target_tokens[:-1]
        assert split.meta_value("vocab") == 257

    def test_corpus_too_small(self, tmp_path):
        path = tmp_path / "tiny.txt"
        path.write_text("abc", encoding="utf-8")
        with pytest.raises(DatasetError):
            build_lm_dataset(path, context_len=16)

    def test_non_utf8_corpus(self, tmp_path):
        path = tmp_path / "binary.txt"
        path.write_bytes(b"\xff\xfe" * 500)
        with pytest.raises(DatasetError):
            build_lm_dataset(path, context_len=16)


class TestImages:

    def test_synthetic_is_deterministic(self):
        spec = ImageSynthSpec(classes=3, height=8, width=8, n=20)
        a = load_image_dataset(synth_spec=spec, seed=5)
        b = load_image_dataset(synth_spec=spec, seed=5)
        assert a.manifest_hash == b.manifest_hash
        example = a.train[0]
        assert example.shape == (1, 8, 8)
        assert 0.0 <= example.pixels.min() and example.pixels.max() <= 1.0

    def test_file_round_trip(self, tmp_path):
        pixels = np.random.default_rng(0).integers(0, 256, size=(5, 2, 4, 4)) / 255.0
        labels = np.array([0, 1, 2, 1, 0])
        path = write_image_file(tmp_path / "images.gimg", pixels, labels)
        read_pixels, read_labels = read_image_file(path)
        np.testing.assert_allclose(read_pixels, pixels, atol=1e-6)
        np.testing.assert_array_equal(read_labels, labels)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.gimg"
        path.write_bytes(b"XXXX" + b"\x00" * 40)
        with pytest.raises(DatasetError):
            read_image_file(path)

    def test_truncated_file(self, tmp_path):
        path = write_image_file(tmp_path / "images.gimg", np.zeros((3, 1, 4, 4)), np.zeros(3, dtype=np.int64))
        path.write_bytes(path.read_bytes()[:-1])
        with pytest.raises(DatasetError):
            read_image_file(path)

    def test_file_label_out_of_range(self, tmp_path):
        path = write_image_file(tmp_path / "images.gimg", np.zeros((10, 1, 4, 4)), np.full(10, 3))
        with pytest.raises(DatasetError):
            load_image_dataset(path=path, classes=2)

    def test_exactly_one_source(self):
        with pytest.raises(DatasetError):
            load_image_dataset()


class TestPersistence:

    @pytest.mark.parametrize("task", ["parity", "copy_paste", "images"])
    def test_save_and_load(self, tmp_path, task):
        data = DataConfig(n=30, seed=1, image_size=8, len_range=(2, 6) if task == "parity" else None)
        split = build_dataset(data, TaskName(task))
        save_dataset(split, tmp_path / task)
        loaded = load_dataset(tmp_path / task)
        assert loaded.manifest_hash == split.manifest_hash
        assert loaded.sizes() == split.sizes()

    def test_tampered_file_fails_hash(self, tmp_path):
        split = gen_parity(20, (2, 6), seed=0)
        save_dataset(split, tmp_path)
        lines = (tmp_path / "train.tsv").read_text(encoding="utf-8").splitlines()
        lines = lines[1:] + lines[:1]
        (tmp_path / "train.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(DatasetError):
            load_dataset(tmp_path)

    def test_dataset_dir_task_mismatch(self, tmp_path):
        save_dataset(gen_parity(20, (2, 6), seed=0), tmp_path)
        with pytest.raises(DatasetError):
            build_dataset(DataConfig(dataset_dir=str(tmp_path)), TaskName.COPY_PASTE)

    def test_lm_needs_corpus(self):
        with pytest.raises(DatasetError):
            build_dataset(DataConfig(), TaskName.LANGUAGE_MODELING)


class TestBatching:

    def test_bounds_fold_small_remainder(self):
        assert batch_bounds(10, 4) == [(0, 4), (4, 10)]
        assert batch_bounds(11, 4) == [(0, 4), (4, 8), (8, 11)]
        assert count_batches(130, 64) == 2

    def test_single_short_batch_kept(self):
        assert batch_bounds(2, 64) == [(0, 2)]

    def test_collate_parity_pads_and_masks(self):
        examples = [ParityExample("a", (1, 0, 1), 1), ParityExample("b", (0,), 1)]
        batch = collate(examples)
        np.testing.assert_array_equal(batch.inputs, [[2, 1, 2], [1, 0, 0]])
        np.testing.assert_array_equal(batch.pad_mask, [[True, True, True], [True, False, False]])
        np.testing.assert_array_equal(batch.targets, [1, 1])

    def test_collate_sequences_pad_targets_with_ignore(self):
        batch = collate([copy_paste_example("a", [1, 2]), copy_paste_example("b", [5])])
        assert batch.targets.shape == (2, 5)
        assert batch.targets[1, 3] == IGNORE_INDEX
        assert not batch.pad_mask[1, 3]

    def test_empty_batch(self):
        with pytest.raises(DatasetError):
            collate([])

    def test_shuffled_iteration_covers_everything(self):
        split = gen_parity(50, (2, 4), seed=0)
        ids = [i for batch in iterate_batches(split.train, 16, RngState(0)) for i in batch.ids]
        assert sorted(ids) == sorted(ex.example_id for ex in split.train)
        again = [i for batch in iterate_batches(split.train, 16, RngState(0)) for i in batch.ids]
        assert ids == again
