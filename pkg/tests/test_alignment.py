import numpy as np
import pytest

from seqembed import (
    CapacityError,
    DistanceMatrix,
    FormatError,
    ScoringScheme,
    pairwise_matrix,
    rect_matrix,
    sw_distance,
    sw_score,
    synth_dataset,
)
from oracles import naive_sw_score

SCHEME = ScoringScheme(2, -1, -2)


def random_seq(rng, max_len=50):
    return "".join(rng.choice(list("ATGC"), rng.integers(1, max_len + 1)))


class TestSwScore:
    def test_perfect_self_match(self):
        assert sw_score("ATGC", "ATGC", SCHEME) == 8

    def test_no_positive_alignment(self):
        assert sw_score("AAAA", "GGGG", SCHEME) == 0

    def test_known_pair_matches_oracle(self):
        expected = naive_sw_score("GGTAC", "ATGC", 2, -1, -2)
        assert expected == 3
        assert sw_score("GGTAC", "ATGC", SCHEME) == expected

    def test_matches_oracle_on_random_pairs(self, rng):
        for _ in range(80):
            a, b = random_seq(rng, 30), random_seq(rng, 30)
            assert sw_score(a, b, SCHEME) == naive_sw_score(a, b, 2, -1, -2)

    def test_symmetric(self, rng):
        for _ in range(30):
            a, b = random_seq(rng), random_seq(rng)
            assert sw_score(a, b, SCHEME) == sw_score(b, a, SCHEME)

    def test_bounded_by_self_scores(self, rng):
        for _ in range(30):
            a, b = random_seq(rng), random_seq(rng)
            assert sw_score(a, b, SCHEME) <= min(
                sw_score(a, a, SCHEME), sw_score(b, b, SCHEME)
            )

    def test_alternate_scheme(self, rng):
        scheme = ScoringScheme(3, -2, -1)
        for _ in range(30):
            a, b = random_seq(rng, 25), random_seq(rng, 25)
            assert sw_score(a, b, scheme) == naive_sw_score(a, b, 3, -2, -1)

    def test_scheme_validation(self):
        with pytest.raises(ValueError):
            ScoringScheme(0, -1, -2)
        with pytest.raises(ValueError):
            ScoringScheme(2, 1, -2)
        with pytest.raises(ValueError):
            ScoringScheme(2, -1, 1)


class TestSwDistance:
    def test_self_distance_zero(self, rng):
        for _ in range(10):
            s = random_seq(rng)
            assert sw_distance(s, s, SCHEME) == 0.0

    def test_disjoint_pair_distance_one(self):
        assert sw_distance("AAAA", "GGGG", SCHEME) == 1.0

    def test_formula_against_oracle(self):
        score = naive_sw_score("ATGC", "ATGG", 2, -1, -2)
        expected = 1.0 - 2.0 * score / (8 + 8)
        assert sw_distance("ATGC", "ATGG", SCHEME) == expected
        assert expected == 0.25

    def test_in_unit_interval(self, rng):
        for _ in range(50):
            d = sw_distance(random_seq(rng), random_seq(rng), SCHEME)
            assert 0.0 <= d <= 1.0


class TestPairwiseMatrix:
    def test_single_sequence(self, small_clustered):
        sset, _ = small_clustered
        single = type(sset)([sset[0]])
        matrix = pairwise_matrix(single)
        assert matrix.shape == (1, 1)
        assert matrix.values[0, 0] == 0.0
        assert matrix.alignments == 0

    def test_matches_independent_calls(self, small_clustered):
        sset, _ = small_clustered
        trio = type(sset)(sset.sequences[:3])
        matrix = pairwise_matrix(trio)
        for i in range(3):
            for j in range(3):
                assert matrix.values[i, j] == np.float32(
                    sw_distance(trio[i], trio[j], SCHEME)
                )

    def test_thread_count_does_not_change_bytes(self):
        sset, _ = synth_dataset(4, 10, 60, 0.1, rng_seed=2)
        one = pairwise_matrix(sset, threads=1)
        eight = pairwise_matrix(sset, threads=8)
        assert one.values.tobytes() == eight.values.tobytes()

    def test_alignment_and_cell_counts(self, small_clustered):
        sset, _ = small_clustered
        matrix = pairwise_matrix(sset)
        n = len(sset)
        assert matrix.alignments == n * (n - 1) // 2
        lens = [len(s) for s in sset]
        expected_cells = sum(
            lens[i] * lens[j] for i in range(n) for j in range(i)
        )
        assert matrix.cells == expected_cells

    def test_capacity_error_states_bytes(self, small_clustered):
        sset, _ = small_clustered
        n = len(sset)
        with pytest.raises(CapacityError) as exc:
            pairwise_matrix(sset, max_bytes=100)
        assert exc.value.required_bytes == n * n * 4
        assert str(n * n * 4) in str(exc.value)

    def test_empty_set_rejected(self, small_clustered):
        sset, _ = small_clustered
        with pytest.raises(ValueError):
            pairwise_matrix(type(sset)([]))


class TestRectMatrix:
    def test_refs_equal_set_reproduces_pairwise(self, small_clustered):
        sset, _ = small_clustered
        square = pairwise_matrix(sset)
        rect = rect_matrix(sset, sset)
        assert np.array_equal(square.values, rect.values)
        assert np.all(np.diagonal(rect.values) == 0.0)

    def test_identical_single_ref_gives_zero_column(self, small_clustered):
        sset, _ = small_clustered
        member = type(sset)([sset[0]])
        copies = type(sset)(
            type(sset[0])(f"c{i}", sset[0].residues) for i in range(5)
        )
        rect = rect_matrix(copies, member)
        assert rect.shape == (5, 1)
        assert np.all(rect.values == 0.0)

    def test_counts(self, small_clustered):
        sset, _ = small_clustered
        refs = type(sset)(sset.sequences[:7])
        rect = rect_matrix(sset, refs)
        assert rect.alignments == len(sset) * 7

    def test_thread_invariance(self, small_clustered):
        sset, _ = small_clustered
        refs = type(sset)(sset.sequences[:5])
        assert np.array_equal(
            rect_matrix(sset, refs, threads=1).values,
            rect_matrix(sset, refs, threads=5).values,
        )


class TestDistanceMatrixFormat:
    def test_save_load_round_trip(self, small_clustered, tmp_path):
        sset, _ = small_clustered
        matrix = pairwise_matrix(sset)
        path = tmp_path / "d.swdm"
        matrix.save(path)
        loaded = DistanceMatrix.load(path)
        assert np.array_equal(loaded.values, matrix.values)
        assert loaded.symmetric

    def test_header_layout(self, tmp_path):
        matrix = DistanceMatrix(np.zeros((2, 3), dtype=np.float32), symmetric=False)
        path = tmp_path / "d.swdm"
        matrix.save(path)
        raw = path.read_bytes()
        assert raw[:4] == b"SWDM"
        assert len(raw) == 16 + 2 * 3 * 4

    def test_truncated_file_rejected(self, tmp_path):
        matrix = DistanceMatrix(np.zeros((4, 4), dtype=np.float32), symmetric=True)
        path = tmp_path / "d.swdm"
        matrix.save(path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(FormatError, match="truncated"):
            DistanceMatrix.load(path)

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.swdm"
        path.write_bytes(b"NOPE" + b"\0" * 20)
        with pytest.raises(FormatError):
            DistanceMatrix.load(path)

    def test_csv_export(self, tmp_path):
        values = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=np.float32)
        path = tmp_path / "d.csv"
        DistanceMatrix(values, symmetric=True).to_csv(path)
        grid = np.loadtxt(path, delimiter=",")
        assert np.allclose(grid, values)

    def test_csv_export_size_limit(self, tmp_path):
        wide = DistanceMatrix(np.zeros((2, 2001), dtype=np.float32), symmetric=False)
        with pytest.raises(ValueError, match="2000"):
            wide.to_csv(tmp_path / "d.csv")

    def test_validation_rejects_bad_values(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            DistanceMatrix(np.array([[0.0, 2.0], [2.0, 0.0]]), symmetric=True)
        with pytest.raises(ValueError, match="transpose"):
            DistanceMatrix(np.array([[0.0, 0.3], [0.4, 0.0]]), symmetric=True)
        with pytest.raises(ValueError, match="diagonal"):
            DistanceMatrix(np.array([[0.1, 0.3], [0.3, 0.0]]), symmetric=True)
