import numpy as np
import pytest

from polya_aeppli.samples import ContingencyTable, CountSample, as_table


class TestCountSample:
    def test_shape_and_immutability(self):
        s = CountSample(np.array([[1, 2], [3, 4], [1, 2]]))
        assert (s.m, s.k) == (3, 2)
        with pytest.raises(ValueError):
            s.observations[0, 0] = 9

    @pytest.mark.parametrize("bad", [np.array([1, 2]), np.array([[1, -1]]), np.array([[0.5, 1.0]])])
    def test_rejects_bad_observations(self, bad):
        with pytest.raises(ValueError):
            CountSample(bad)

    def test_to_table_collapses_duplicates(self):
        t = CountSample(np.array([[1, 2], [3, 4], [1, 2]])).to_table()
        assert t.total == 3 and t.get((1, 2)) == 2

    def test_permuted(self):
        s = CountSample(np.array([[1, 2, 3]]))
        assert s.permuted([2, 0, 1]).observations.tolist() == [[3, 1, 2]]


class TestContingencyTable:
    def test_dense_round_trip(self):
        arr = np.array([[5.0, 0.0, 1.0], [2.0, 3.0, 0.0]])
        t = ContingencyTable.from_dense(arr)
        assert t.dims == (1, 2)
        np.testing.assert_array_equal(t.to_dense(), arr)

    def test_to_dense_crops(self):
        t = ContingencyTable.from_dense(np.ones((3, 3)))
        assert t.to_dense((1, 1)).sum() == 4

    def test_nonzero_and_get(self):
        t = ContingencyTable.from_dense([[0.0, 2.0]])
        assert t.nonzero().cells.tolist() == [[0, 1]]
        assert t.get((0, 0)) == 0.0 and t.get((5, 5)) == 0.0

    def test_records_expansion(self):
        t = ContingencyTable.from_dense([[2.0, 1.0]])
        assert sorted(map(tuple, t.to_records().observations.tolist())) == [(0, 0), (0, 0), (0, 1)]
        with pytest.raises(ValueError):
            ContingencyTable.from_dense([[0.5]]).to_records()

    def test_validation(self):
        with pytest.raises(ValueError):
            ContingencyTable(np.array([[0, 0]]), np.array([-1.0]))
        with pytest.raises(ValueError):
            ContingencyTable(np.array([[0, 0]]), np.array([1.0, 2.0]))

    def test_as_table(self):
        t = ContingencyTable.from_dense([[1.0]])
        assert as_table(t) is t
        assert as_table([[0, 1], [0, 1]]).get((0, 1)) == 2
