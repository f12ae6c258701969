import numpy as np
import pytest

from logitgates import data
from logitgates.data import (
    Dataset,
    IdxFormatError,
    gen_nested_xnor8,
    gen_parity4,
    gen_xor2,
    load_mnist_idx,
    nested_xnor_ail_logit,
    nested_xnor_il_logit,
    nested_xnor_il_logit_naive,
    parity4_lattice,
    read_idx_images,
    write_idx_images,
    write_idx_labels,
    xor2_grid,
)


class TestParity4:
    def test_label_convention(self):
        x = np.array([[1.0, 1.0, 1.0, 1.0],
                      [1.0, -1.0, -1.0, -1.0],
                      [1.0, 1.0, -1.0, -1.0]])
        labels = data._parity_labels(x).ravel()
        assert labels.tolist() == [1.0, 0.0, 1.0]  # 4, 1, 2 positives

    def test_generator_properties(self):
        ds = gen_parity4(512, 0)
        assert ds.inputs.shape == (512, 4)
        assert np.all(np.abs(ds.inputs) < 1.0) and np.all(ds.inputs != 0.0)
        assert set(np.unique(ds.targets)) <= {0.0, 1.0}

    def test_seed_determinism(self):
        a, b = gen_parity4(100, 5), gen_parity4(100, 5)
        assert np.array_equal(a.inputs, b.inputs)
        assert not np.array_equal(a.inputs, gen_parity4(100, 6).inputs)

    def test_lattice_balance(self):
        lat = parity4_lattice()
        assert lat.n == 16
        assert lat.targets.sum() == 8  # exactly 8 per class


class TestNestedXnor8:
    def test_target_equals_sign_times_min(self):
        ds = gen_nested_xnor8(2000, 1)
        direct = (np.sign(np.prod(ds.inputs, axis=1))
                  * np.abs(ds.inputs).min(axis=1)).reshape(-1, 1)
        assert np.abs(ds.targets - direct).max() < 1e-12

    def test_zero_input_gives_zero_logit(self):
        assert nested_xnor_ail_logit(np.zeros((1, 8)))[0] == 0.0
        assert nested_xnor_il_logit(np.zeros((1, 8)))[0] == 0.0

    def test_inner_pair_commutes(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(-2, 2, (500, 8))
        sw = x.copy()
        sw[:, [2, 5]] = sw[:, [5, 2]]
        assert np.array_equal(nested_xnor_ail_logit(x), nested_xnor_ail_logit(sw))
        assert np.allclose(nested_xnor_il_logit(x), nested_xnor_il_logit(sw))

    def test_single_negation_flips_target(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(-2, 2, (500, 8))
        flipped = x.copy()
        flipped[:, 3] *= -1
        assert np.abs(nested_xnor_ail_logit(flipped) + nested_xnor_ail_logit(x)).max() < 1e-12
        assert np.abs(nested_xnor_il_logit(flipped) + nested_xnor_il_logit(x)).max() < 1e-9

    def test_exact_gate_nesting_dual_path_oracle(self):
        # log-space and naive probability-space evaluation must agree closely
        rng = np.random.default_rng(4)
        x = rng.uniform(-2, 2, (5000, 8))
        assert np.abs(nested_xnor_il_logit(x) - nested_xnor_il_logit_naive(x)).max() < 1e-12

    def test_inputs_range(self):
        ds = gen_nested_xnor8(1000, 7)
        assert np.all(np.abs(ds.inputs) <= 2.0)
        assert ds.task == "regression"


class TestXor2:
    def test_labels(self):
        ds = gen_xor2()
        lookup = {tuple(row): t for row, t in zip(ds.inputs, ds.targets.ravel())}
        assert lookup[(1.0, 1.0)] == 0.0
        assert lookup[(1.0, -1.0)] == 1.0
        assert lookup[(-1.0, 1.0)] == 1.0
        assert lookup[(-1.0, -1.0)] == 0.0

    def test_grid(self):
        grid = xor2_grid(0.5)
        assert grid.shape == (81, 2)
        assert grid.min() == -2.0 and grid.max() == 2.0


class TestIdx:
    def _write_pair(self, tmp_path, n=10):
        rng = np.random.default_rng(0)
        images = rng.integers(0, 256, size=(n, 28, 28), dtype=np.uint8)
        labels = rng.integers(0, 10, size=n, dtype=np.uint8)
        ip, lp = tmp_path / "imgs", tmp_path / "lbls"
        write_idx_images(ip, images)
        write_idx_labels(lp, labels)
        return ip, lp, images, labels

    def test_round_trip(self, tmp_path):
        ip, lp, images, labels = self._write_pair(tmp_path)
        ds = load_mnist_idx(ip, lp)
        assert ds.inputs.shape == (10, 784)
        assert ds.inputs.min() >= 0.0 and ds.inputs.max() <= 1.0
        assert np.array_equal(ds.targets, labels)
        assert np.allclose(ds.inputs[0], images[0].ravel() / 255.0)

    def test_wrong_magic_rejected(self, tmp_path):
        ip, lp, _, _ = self._write_pair(tmp_path)
        # labels file parsed as images: magic 0x801 != 0x803
        with pytest.raises(IdxFormatError, match="magic"):
            read_idx_images(lp)
        with pytest.raises(IdxFormatError, match="magic"):
            load_mnist_idx(lp, ip)

    def test_truncated_payload_names_offset(self, tmp_path):
        ip, lp, _, _ = self._write_pair(tmp_path)
        raw = ip.read_bytes()
        ip.write_bytes(raw[:-100])
        with pytest.raises(IdxFormatError, match="offset"):
            read_idx_images(ip)

    def test_count_mismatch(self, tmp_path):
        ip, lp, _, _ = self._write_pair(tmp_path)
        write_idx_labels(lp, np.zeros(7, dtype=np.uint8))
        with pytest.raises(IdxFormatError, match="mismatch"):
            load_mnist_idx(ip, lp)


class TestDatasetType:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            Dataset(np.array([[np.nan]]), np.array([[0.0]]), "regression")

    def test_rejects_bad_labels(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((2, 2)), np.array([0, 10]), "classification", n_classes=10)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((0, 2)), np.zeros((0, 1)), "regression")
