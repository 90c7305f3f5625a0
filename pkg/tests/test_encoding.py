import numpy as np
import pytest

from seqembed import (
    Alphabet,
    EncodedDataset,
    EncodingError,
    FormatError,
    OneHotSequenceEncoder,
    OrdinalSequenceEncoder,
    ReferencePanel,
    ReferencePanelEncoder,
    Sequence,
    SequenceSet,
    one_hot_encode,
    ordinal_encode,
    reference_encode,
    sample_references,
    sw_distance,
)

GOLDEN_ATGC = [0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0]
GOLDEN_GGTAC = [0.75, 0.75, 0.5, 0.25, 1.0]


def single(residues: str) -> SequenceSet:
    return SequenceSet([Sequence("x", residues)])


class TestOneHot:
    def test_golden_atgc(self):
        encoded = one_hot_encode(single("ATGC"), target_len=4)
        assert encoded.features[0].tolist() == GOLDEN_ATGC
        assert encoded.dim == 16

    def test_zero_padding(self):
        encoded = one_hot_encode(single("A"), target_len=3)
        assert encoded.features[0].tolist() == [0, 0, 0, 1] + [0] * 8

    def test_row_sums_equal_lengths(self, small_clustered):
        sset, _ = small_clustered
        encoded = one_hot_encode(sset)
        sums = encoded.features.sum(axis=1)
        assert sums.tolist() == [float(len(s)) for s in sset]

    def test_decodable_below_padding(self, small_clustered):
        sset, _ = small_clustered
        alphabet = Alphabet("ATGC")
        encoded = one_hot_encode(sset, alphabet)
        size = len(alphabet)
        slot_to_symbol = {size - 1 - i: c for i, c in enumerate(alphabet.symbols)}
        for row, seq in zip(encoded.features, sset):
            blocks = row.reshape(-1, size)
            decoded = "".join(
                slot_to_symbol[int(block.argmax())]
                for block in blocks
                if block.sum() > 0
            )
            assert decoded == seq.residues

    def test_target_len_too_short_names_offender(self):
        sset = SequenceSet([Sequence("longest", "ATGCATGC"), Sequence("b", "AT")])
        with pytest.raises(EncodingError, match="longest"):
            one_hot_encode(sset, target_len=4)

    def test_default_target_len_is_max_len(self, small_clustered):
        sset, _ = small_clustered
        encoded = one_hot_encode(sset)
        assert encoded.dim == sset.max_len * 4


class TestOrdinal:
    def test_golden_ggtac(self):
        encoded = ordinal_encode(single("GGTAC"), target_len=5)
        assert encoded.features[0].tolist() == GOLDEN_GGTAC

    def test_padding(self):
        encoded = ordinal_encode(single("GGTAC"), target_len=7)
        assert encoded.features[0].tolist() == GOLDEN_GGTAC + [0.0, 0.0]

    def test_missing_value_entry_rejected(self):
        values = {"A": 0.25, "G": 0.75, "C": 1.0}  # no 'T'
        with pytest.raises(EncodingError, match="T"):
            ordinal_encode(single("GGTAC"), values=values, target_len=5)


class TestSampleReferences:
    def test_full_panel_is_permutation(self, small_clustered):
        sset, _ = small_clustered
        panel = sample_references(sset, len(sset), rng_seed=0)
        assert sorted(panel.ref_ids) == sorted(sset.ids)

    def test_deterministic(self, small_clustered):
        sset, _ = small_clustered
        a = sample_references(sset, 10, rng_seed=4)
        b = sample_references(sset, 10, rng_seed=4)
        assert a.ref_ids == b.ref_ids

    def test_different_seeds_differ(self, small_clustered):
        sset, _ = small_clustered
        a = sample_references(sset, 20, rng_seed=1)
        b = sample_references(sset, 20, rng_seed=2)
        assert a.ref_ids != b.ref_ids

    def test_k_out_of_range(self, small_clustered):
        sset, _ = small_clustered
        with pytest.raises(ValueError):
            sample_references(sset, len(sset) + 1, rng_seed=0)
        with pytest.raises(ValueError):
            sample_references(sset, 0, rng_seed=0)


class TestReferenceEncode:
    def test_member_of_panel_has_zero_entry(self, small_clustered):
        sset, _ = small_clustered
        panel = sample_references(sset, 5, rng_seed=7)
        encoded = reference_encode(sset, panel)
        for col, ref_id in enumerate(panel.ref_ids):
            row = sset.ids.index(ref_id)
            assert encoded.features[row, col] == 0.0

    def test_panel_of_one(self, small_clustered):
        sset, _ = small_clustered
        panel = sample_references(sset, 1, rng_seed=0)
        assert reference_encode(sset, panel).dim == 1

    def test_probe_entries_match_sw_distance(self, small_clustered, rng):
        sset, _ = small_clustered
        panel = sample_references(sset, 8, rng_seed=3)
        encoded = reference_encode(sset, panel)
        refs = [sset.get(ref_id) for ref_id in panel.ref_ids]
        for _ in range(20):
            i = int(rng.integers(len(sset)))
            j = int(rng.integers(len(refs)))
            expected = np.float32(sw_distance(sset[i], refs[j], panel.scheme))
            assert encoded.features[i, j] == expected

    def test_unknown_panel_id(self, small_clustered):
        sset, _ = small_clustered
        panel = ReferencePanel(["missing"], rng_seed=0)
        with pytest.raises(LookupError, match="missing"):
            reference_encode(sset, panel)

    def test_same_cluster_rows_closer(self, small_clustered):
        sset, labels = small_clustered
        panel = sample_references(sset, 12, rng_seed=5)
        x = reference_encode(sset, panel).features.astype(np.float64)
        lab = np.array([labels[s.id] for s in sset])
        dists = np.sqrt(((x[:, None] - x[None]) ** 2).sum(-1))
        same = lab[:, None] == lab[None, :]
        off = ~np.eye(len(sset), dtype=bool)
        assert dists[same & off].mean() < dists[~same].mean()

    def test_repeated_runs_identical(self, small_clustered):
        sset, _ = small_clustered
        panel = sample_references(sset, 6, rng_seed=1)
        a = reference_encode(sset, panel)
        b = reference_encode(sset, panel)
        assert np.array_equal(a.features, b.features)


class TestEncodedDatasetFile:
    def test_round_trip(self, small_clustered, tmp_path):
        sset, _ = small_clustered
        encoded = one_hot_encode(sset)
        path = tmp_path / "data.enc"
        encoded.save(path)
        loaded = EncodedDataset.load(path)
        assert loaded.ids == encoded.ids
        assert np.array_equal(loaded.features, encoded.features)
        assert loaded.meta.kind == "onehot"

    def test_header_is_readable_text(self, tmp_path):
        encoded = one_hot_encode(single("ATGC"), target_len=4)
        path = tmp_path / "data.enc"
        encoded.save(path)
        first = path.read_bytes().split(b"\n", 1)[0].decode()
        assert first.startswith("#ENC kind=onehot d=16 n=1")

    def test_truncation_rejected(self, small_clustered, tmp_path):
        sset, _ = small_clustered
        path = tmp_path / "data.enc"
        one_hot_encode(sset).save(path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FormatError, match="truncated"):
            EncodedDataset.load(path)

    def test_values_validated(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            EncodedDataset(["a"], np.array([[1.5]]), meta=one_hot_encode(single("A")).meta)


class TestPanelFile:
    def test_round_trip(self, small_clustered, tmp_path):
        sset, _ = small_clustered
        panel = sample_references(sset, 4, rng_seed=9)
        path = tmp_path / "panel.tsv"
        panel.save(path)
        loaded = ReferencePanel.load(path)
        assert loaded == panel

    def test_missing_seed_rejected(self, tmp_path):
        path = tmp_path / "panel.tsv"
        path.write_text("id1\nid2\n")
        with pytest.raises(FormatError, match="seed"):
            ReferencePanel.load(path)


class TestEstimators:
    def test_one_hot_estimator_matches_function(self, small_clustered):
        sset, _ = small_clustered
        est = OneHotSequenceEncoder().fit(sset)
        assert np.array_equal(est.transform(sset), one_hot_encode(sset).features)

    def test_accepts_plain_strings(self):
        est = OneHotSequenceEncoder().fit(["ATGC", "AT"])
        out = est.transform(["ATGC", "AT"])
        assert out.shape == (2, 16)

    def test_ordinal_estimator(self):
        est = OrdinalSequenceEncoder(target_len=5).fit(["GGTAC"])
        assert est.transform(["GGTAC"])[0].tolist() == GOLDEN_GGTAC

    def test_reference_estimator_freezes_panel(self, small_clustered):
        sset, _ = small_clustered
        est = ReferencePanelEncoder(k=6, random_state=2).fit(sset)
        train_out = est.transform(sset)
        # unseen data maps against the same frozen panel
        novel = SequenceSet([Sequence("new", sset[0].residues)])
        novel_out = est.transform(novel)
        assert np.array_equal(novel_out[0], train_out[0])

    def test_get_params_round_trip(self):
        est = ReferencePanelEncoder(k=9, random_state=4)
        clone = ReferencePanelEncoder(**est.get_params())
        assert clone.get_params() == est.get_params()

    def test_not_fitted_errors(self, small_clustered):
        from sklearn.exceptions import NotFittedError

        sset, _ = small_clustered
        for est in (OneHotSequenceEncoder(), OrdinalSequenceEncoder(), ReferencePanelEncoder()):
            with pytest.raises(NotFittedError):
                est.transform(sset)
