import numpy as np
import pytest

from sawb.storage import (DatasetFormatError, dataset_from_bytes, dataset_to_bytes, load_dataset, record_dtype,
                          save_dataset, write_dataset_csv)


def test_round_trip(tiny_dataset, tmp_path):
    path = save_dataset(tiny_dataset, tmp_path / "d.bin")
    back = load_dataset(path)
    for name in ("h_s", "t_1", "mu_h", "speed", "seeds", "ordinates", "freqs", "m0"):
        assert np.array_equal(getattr(back, name), getattr(tiny_dataset, name))
    assert back.manifest == tiny_dataset.manifest
    assert dataset_to_bytes(back) == path.read_bytes()


def test_records_are_fixed_size_and_addressable(tiny_dataset):
    data = dataset_to_bytes(tiny_dataset)
    dt = record_dtype(tiny_dataset.k_max)
    start = len(data) - len(tiny_dataset) * dt.itemsize
    assert start % 8 == 0
    rec = np.frombuffer(data, dtype=dt, count=1, offset=start + 5 * dt.itemsize)[0]
    assert rec["h_s"] == tiny_dataset.h_s[5]
    assert np.array_equal(rec["freqs"], tiny_dataset.freqs[5])


@pytest.mark.parametrize("mutate", [lambda b: b"JUNK" + b[4:], lambda b: b[:-1], lambda b: b[:8],
                                    lambda b: b[:4] + b"\x07\x00" + b[6:]])
def test_corrupt_files_rejected(tiny_dataset, mutate):
    with pytest.raises(DatasetFormatError):
        dataset_from_bytes(mutate(dataset_to_bytes(tiny_dataset)))


def test_csv_export(tiny_dataset, tmp_path):
    path = write_dataset_csv(tiny_dataset, tmp_path / "d.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 25
    header = lines[0].split(",")
    assert header[:6] == ["index", "seed", "h_s", "t_1", "mu_h", "speed"]
    assert len(header) == 9 + 3 * 160
    row = lines[4].split(",")
    assert float(row[2]) == tiny_dataset.h_s[3]
