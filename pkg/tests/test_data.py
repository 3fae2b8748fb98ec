import csv

import numpy as np
import pytest

from metasense.errors import SizeMismatch
from metasense.inference import (Dataset, ForestParams, SplitSpec, load_model, predict, random_split,
                                 read_dataset_csv, save_model, train_forest, train_ridge, write_dataset_csv)
from metasense.inference.persistence import FORMAT_VERSION, model_from_dict, model_to_dict


def make_dataset(n=50, p=40, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(tuple(f"r{k}" for k in range(n)), rng.normal(size=(n, p)),
                   rng.uniform(23.5, 65, n), rng.uniform(3, 1970, n))


class TestSplit:
    ds = make_dataset(2290, 2)

    def test_smallest_reference_split(self):
        train, test = random_split(self.ds, SplitSpec.for_dataset(self.ds, 11, seed=1))
        assert len(train) == 11 and len(test) == 2279

    def test_partition(self):
        train, test = random_split(self.ds, SplitSpec.for_dataset(self.ds, 458, seed=2))
        a, b = set(train.trace_ids), set(test.trace_ids)
        assert not a & b and a | b == set(self.ds.trace_ids)

    def test_deterministic(self):
        spec = SplitSpec.for_dataset(self.ds, 100, seed=5)
        assert random_split(self.ds, spec)[0].trace_ids == random_split(self.ds, spec)[0].trace_ids

    def test_seed_matters(self):
        a = random_split(self.ds, SplitSpec.for_dataset(self.ds, 100, seed=5))[0].trace_ids
        b = random_split(self.ds, SplitSpec.for_dataset(self.ds, 100, seed=6))[0].trace_ids
        assert a != b

    def test_empty_test_set_rejected(self):
        with pytest.raises(SizeMismatch):
            random_split(self.ds, SplitSpec.for_dataset(self.ds, 2290))

    def test_inconsistent_spec(self):
        with pytest.raises(SizeMismatch):
            random_split(self.ds, SplitSpec(10, 10))


class TestDataset:
    def test_duplicate_ids(self):
        with pytest.raises(SizeMismatch):
            Dataset(("a", "a"), np.zeros((2, 3)), np.zeros(2), np.zeros(2))

    def test_label_lengths(self):
        with pytest.raises(SizeMismatch):
            Dataset(("a", "b"), np.zeros((2, 3)), np.zeros(1), np.zeros(2))

    def test_targets(self):
        ds = make_dataset(5)
        assert ds.target("temperature") is ds.temperature and ds.target("light") is ds.light
        with pytest.raises(KeyError):
            ds.target("humidity")


def test_csv_round_trip(tmp_path):
    ds = make_dataset(20)
    path = tmp_path / "d.csv"
    write_dataset_csv(ds, path)
    header = next(csv.reader(open(path)))
    assert header == ["trace_id", *[f"f{k:02d}" for k in range(40)], "temperature_c", "light_lux"]
    back = read_dataset_csv(path)
    assert back.trace_ids == ds.trace_ids
    assert np.array_equal(back.features, ds.features)
    assert np.array_equal(back.temperature, ds.temperature) and np.array_equal(back.light, ds.light)


def test_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,x,temperature_c,light_lux\na,1,2,3\n")
    with pytest.raises(SizeMismatch):
        read_dataset_csv(path)


class TestPersistence:
    ds = make_dataset(60)

    @pytest.mark.parametrize("kind", ["forest", "ridge"])
    def test_round_trip_is_bit_identical(self, tmp_path, kind):
        if kind == "forest":
            model = train_forest(self.ds.features, self.ds.light, ForestParams(n_trees=5), seed=4, target="light")
        else:
            model = train_ridge(self.ds.features, self.ds.light, 0.7, target="light")
        path = tmp_path / "m.json"
        save_model(model, path)
        back = load_model(path)
        assert back.target == "light"
        probe = make_dataset(30, seed=9).features
        assert np.array_equal(model.predict(probe), back.predict(probe))
        assert predict(back, probe[0]) == predict(model, probe[0])

    def test_version_checked(self):
        doc = model_to_dict(train_ridge(self.ds.features, self.ds.light))
        assert doc["format_version"] == FORMAT_VERSION
        doc["format_version"] = FORMAT_VERSION + 1
        with pytest.raises(ValueError):
            model_from_dict(doc)

    def test_foreign_document(self):
        with pytest.raises(ValueError):
            model_from_dict({"format": "something-else"})
