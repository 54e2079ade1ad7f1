import io

import numpy as np
import pytest

from labelbridge import (LabelVocabulary, UncertainPolicy, load_features,
                         parse_columnar_labels, parse_pipe_labels, split_dataset,
                         write_pipe_labels)
from labelbridge.data import label_matrix, write_features
from labelbridge.errors import InputError


def parse_pipe(text, vocab, **kw):
    return parse_pipe_labels(io.StringIO(text), vocab, **kw)


class TestVocabulary:
    def test_word_decomposition(self):
        vocab = LabelVocabulary(["Pleural_Thickening", "Lung Opacity"])
        assert vocab.words_per_label == [["pleural", "thickening"], ["lung", "opacity"]]

    def test_rejects_duplicates_case_insensitive(self):
        with pytest.raises(InputError):
            LabelVocabulary(["Mass", "mass"])

    def test_requires_two_labels(self):
        with pytest.raises(InputError):
            LabelVocabulary(["Solo"])

    def test_index_is_case_insensitive(self):
        vocab = LabelVocabulary(["Atelectasis", "Effusion"])
        assert vocab.index_of(" effusion ") == 1
        assert vocab.index_of("nodule") is None


class TestPipeLabels:
    def test_membership_row(self):
        vocab = LabelVocabulary(["Atelectasis", "Effusion", "Mass"])
        samples = parse_pipe("img1,Effusion|Atelectasis\n", vocab)
        assert samples[0].labels.tolist() == [1, 1, 0]

    def test_no_finding_maps_to_zero(self):
        vocab = LabelVocabulary(["Atelectasis", "Effusion", "Mass"])
        samples = parse_pipe("img2,No Finding\n", vocab)
        assert samples[0].labels.tolist() == [0, 0, 0]

    def test_no_finding_as_real_label_when_in_vocab(self):
        vocab = LabelVocabulary(["No Finding", "Effusion"])
        samples = parse_pipe("img1,No Finding\nimg2,Effusion\n", vocab)
        assert samples[0].labels.tolist() == [1, 0]
        assert samples[1].labels.tolist() == [0, 1]

    def test_micro_dataset_vectors(self, micro_vocab, micro_samples):
        got = {s.sample_id: s.labels.tolist() for s in micro_samples}
        assert got == {"img1": [1, 1, 0], "img2": [1, 0, 0],
                       "img3": [0, 1, 1], "img4": [1, 1, 0]}

    def test_unknown_token_names_row_and_token(self, micro_vocab):
        with pytest.raises(InputError, match=r"row 2.*'zz'"):
            parse_pipe("img1,a\nimg2,zz\n", micro_vocab)

    def test_duplicate_sample_id_fatal(self, micro_vocab):
        with pytest.raises(InputError, match="duplicate"):
            parse_pipe("img1,a\nimg1,b\n", micro_vocab)

    def test_empty_label_field_fatal(self, micro_vocab):
        with pytest.raises(InputError, match="empty label field"):
            parse_pipe("img1,\n", micro_vocab)

    def test_header_flag(self, micro_vocab):
        samples = parse_pipe("sample_id,labels\nimg1,a\n", micro_vocab, has_header=True)
        assert len(samples) == 1

    def test_tokens_match_case_insensitively(self, micro_vocab):
        samples = parse_pipe("img1, A | B \n", micro_vocab)
        assert samples[0].labels.tolist() == [1, 1, 0]

    def test_round_trip_identity(self, micro_vocab):
        rng = np.random.Generator(np.random.PCG64(7))
        for _ in range(20):
            n = int(rng.integers(1, 12))
            mat = rng.integers(0, 2, size=(n, 3))
            text = "".join(f"id{i},{_row(mat[i], micro_vocab)}\n" for i in range(n))
            samples = parse_pipe(text, micro_vocab)
            out = io.StringIO()
            write_pipe_labels(samples, micro_vocab, out)
            reparsed = parse_pipe(out.getvalue(), micro_vocab)
            assert np.array_equal(label_matrix(samples), label_matrix(reparsed))
            assert np.array_equal(label_matrix(samples), mat)


def _row(bits, vocab):
    active = [vocab.labels[j] for j in range(len(bits)) if bits[j]]
    return "|".join(active) if active else "No Finding"


COLUMNAR = """id,a,b,c
img1,1,-1,0
img2,,1,-1
img3,0,,1
"""


class TestColumnarLabels:
    def test_uncertain_as_positive(self, micro_vocab):
        samples = parse_columnar_labels(io.StringIO(COLUMNAR), micro_vocab,
                                        UncertainPolicy.AS_POSITIVE)
        assert samples[0].labels.tolist() == [1, 1, 0]
        assert samples[1].labels.tolist() == [0, 1, 1]

    def test_uncertain_as_negative(self, micro_vocab):
        samples = parse_columnar_labels(io.StringIO(COLUMNAR), micro_vocab,
                                        UncertainPolicy.AS_NEGATIVE)
        assert samples[0].labels.tolist() == [1, 0, 0]
        assert samples[1].labels.tolist() == [0, 1, 0]

    def test_blank_is_zero(self, micro_vocab):
        samples = parse_columnar_labels(io.StringIO(COLUMNAR), micro_vocab,
                                        UncertainPolicy.AS_POSITIVE)
        assert samples[2].labels.tolist() == [0, 0, 1]

    def test_output_is_binary_for_any_policy(self, micro_vocab):
        rng = np.random.Generator(np.random.PCG64(3))
        cells = rng.choice(["1", "0", "-1", ""], size=(15, 3))
        text = "id,a,b,c\n" + "".join(
            f"r{i}," + ",".join(cells[i]) + "\n" for i in range(15))
        for policy in UncertainPolicy:
            samples = parse_columnar_labels(io.StringIO(text), micro_vocab, policy)
            for s in samples:
                assert set(np.unique(s.labels)) <= {0, 1}

    def test_malformed_cell_names_row_and_column(self, micro_vocab):
        text = "id,a,b,c\nimg1,1,maybe,0\n"
        with pytest.raises(InputError, match="row 2.*'b'"):
            parse_columnar_labels(io.StringIO(text), micro_vocab,
                                  UncertainPolicy.AS_POSITIVE)

    def test_missing_label_column_fatal(self, micro_vocab):
        with pytest.raises(InputError, match="'c'"):
            parse_columnar_labels(io.StringIO("id,a,b\nimg1,1,0\n"), micro_vocab,
                                  UncertainPolicy.AS_POSITIVE)

    def test_extra_columns_ignored(self, micro_vocab):
        text = "id,age,a,b,c\nimg1,42,1,0,1\n"
        samples = parse_columnar_labels(io.StringIO(text), micro_vocab,
                                        UncertainPolicy.AS_POSITIVE)
        assert samples[0].labels.tolist() == [1, 0, 1]


def _make_samples(n, vocab):
    return parse_pipe("".join(f"id{i},a\n" for i in range(n)), vocab)


class TestSplit:
    def test_sizes_by_largest_remainder(self, micro_vocab):
        samples = _make_samples(10, micro_vocab)
        train, val, test = split_dataset(samples, (0.7, 0.1, 0.2), seed=5)
        assert (len(train), len(val), len(test)) == (7, 1, 2)

    def test_deterministic(self, micro_vocab):
        samples = _make_samples(25, micro_vocab)
        a = split_dataset(samples, (0.7, 0.1, 0.2), seed=11)
        b = split_dataset(samples, (0.7, 0.1, 0.2), seed=11)
        for part_a, part_b in zip(a, b):
            assert [s.sample_id for s in part_a] == [s.sample_id for s in part_b]

    def test_partition(self, micro_vocab):
        samples = _make_samples(23, micro_vocab)
        train, val, test = split_dataset(samples, (0.5, 0.25, 0.25), seed=2)
        ids = [s.sample_id for s in train + val + test]
        assert sorted(ids) == sorted(s.sample_id for s in samples)
        assert len(set(ids)) == len(ids)

    def test_bad_ratio_sum(self, micro_vocab):
        with pytest.raises(InputError, match="sum to 1"):
            split_dataset(_make_samples(10, micro_vocab), (0.5, 0.5, 0.5), seed=0)

    def test_nonpositive_ratio(self, micro_vocab):
        with pytest.raises(InputError, match="positive"):
            split_dataset(_make_samples(10, micro_vocab), (1.0, 0.0, 0.0), seed=0)

    def test_too_few_samples(self, micro_vocab):
        with pytest.raises(InputError, match="at least 3"):
            split_dataset(_make_samples(2, micro_vocab), (0.7, 0.1, 0.2), seed=0)


FEATURES = "#dim=4\nimg1 0.5 -1.25 3.0 0.0\nimg2 1.0 2.0 3.0 4.0\n"


class TestFeatures:
    def test_load(self):
        records = load_features(io.StringIO(FEATURES))
        assert len(records) == 2
        assert records[0].sample_id == "img1"
        assert records[0].features.tolist() == [0.5, -1.25, 3.0, 0.0]

    def test_order_preserved(self):
        records = load_features(io.StringIO(FEATURES))
        assert [r.sample_id for r in records] == ["img1", "img2"]

    def test_nan_rejected(self):
        with pytest.raises(InputError, match="non-finite"):
            load_features(io.StringIO("#dim=2\nimg1 nan 1.0\n"))

    def test_dim_mismatch(self):
        with pytest.raises(InputError, match="expected id"):
            load_features(io.StringIO("#dim=3\nimg1 1.0 2.0\n"))

    def test_inconsistent_rows(self):
        with pytest.raises(InputError):
            load_features(io.StringIO("#dim=2\nimg1 1.0 2.0\nimg2 1.0 2.0 3.0\n"))

    def test_missing_header(self):
        with pytest.raises(InputError, match="#dim="):
            load_features(io.StringIO("img1 1.0 2.0\n"))

    def test_duplicate_id(self):
        with pytest.raises(InputError, match="duplicate"):
            load_features(io.StringIO("#dim=1\nimg1 1.0\nimg1 2.0\n"))

    def test_write_read_round_trip(self):
        records = load_features(io.StringIO(FEATURES))
        out = io.StringIO()
        write_features(records, out)
        again = load_features(io.StringIO(out.getvalue()))
        for a, b in zip(records, again):
            assert a.sample_id == b.sample_id
            assert np.array_equal(a.features, b.features)
