import numpy as np
import pytest

from himix import LabelMap, extract_instances, relabel_disjoint, rng_for
from himix.instances import SOURCE, TARGET, paint_classes

from oracles import flood_fill_label, same_partition


class TestExtractInstances:
    def test_uniform_map_single_instance(self):
        y = LabelMap(np.full((4, 4), 2, dtype=np.uint8), num_classes=3)
        inst = extract_instances(y)
        assert len(inst.table) == 1
        assert inst.table[1].pixel_count == 16
        assert inst.table[1].class_index == 2

    def test_forest_split_by_road(self):
        # Vertical one-wide road through uniform forest: 3 instances.
        data = np.full((5, 5), 5, dtype=np.uint8)
        data[:, 2] = 2
        y = LabelMap(data, num_classes=7)
        inst = extract_instances(y, connectivity=4)
        counts = sorted(info.pixel_count for info in inst.table.values())
        assert counts == [5, 10, 10]
        classes = sorted((info.class_index, info.pixel_count) for info in inst.table.values())
        assert classes == [(2, 5), (5, 10), (5, 10)]

    @pytest.mark.parametrize("connectivity", [4, 8])
    def test_matches_flood_fill_oracle(self, connectivity, random_label_maps):
        for y in random_label_maps(50, seed=17):
            inst = extract_instances(y, connectivity=connectivity)
            oracle = flood_fill_label(np.asarray(y.data), 255, connectivity)
            assert same_partition(inst.ids, oracle)

    def test_ignore_pixels_get_zero(self):
        data = np.zeros((3, 3), dtype=np.uint8)
        data[1, 1] = 255
        inst = extract_instances(LabelMap(data, num_classes=1))
        assert inst.ids[1, 1] == 0
        assert 0 not in inst.table

    def test_table_counts_match_frequencies(self, random_label_maps):
        for y in random_label_maps(10, ignore_prob=0.1, seed=31):
            inst = extract_instances(y)
            freq = np.bincount(inst.ids.ravel())
            for i, info in inst.table.items():
                assert info.pixel_count == int(freq[i])

    def test_ids_dense(self, random_label_maps):
        for y in random_label_maps(10, seed=41):
            inst = extract_instances(y)
            present = sorted(set(inst.ids.ravel().tolist()) - {0})
            assert present == list(range(1, len(inst.table) + 1))

    def test_paint_reconstructs_label(self, random_label_maps):
        for y in random_label_maps(10, ignore_prob=0.1, seed=59):
            inst = extract_instances(y)
            back = paint_classes(inst, y.num_classes)
            assert np.array_equal(back.data, y.data)

    def test_instance_count_bounds(self, random_label_maps):
        for y in random_label_maps(10, seed=61):
            inst = extract_instances(y)
            n_classes = len(set(y.data.ravel().tolist()) - {255})
            assert n_classes <= len(inst.table) <= y.data.size

    def test_eight_connectivity_merges_diagonals(self):
        data = np.array([[1, 0], [0, 1]], dtype=np.uint8)
        y = LabelMap(data, num_classes=2)
        assert len(extract_instances(y, connectivity=4).table) == 4
        assert len(extract_instances(y, connectivity=8).table) == 2


class TestRelabelDisjoint:
    def _inst(self, data, num_classes, domain):
        return extract_instances(LabelMap(np.asarray(data, dtype=np.uint8),
                                          num_classes=num_classes), domain=domain)

    def test_offset_by_max_id(self):
        a = self._inst([[0, 1]], 2, SOURCE)          # ids {1, 2}
        b = self._inst([[3, 3]], 4, TARGET)          # ids {1}
        a2, b2 = relabel_disjoint(a, b)
        assert sorted(a2.table) == [1, 2]
        assert sorted(b2.table) == [3]
        assert np.array_equal(b2.ids, np.full((1, 2), 3, dtype=np.int32))

    def test_empty_b_unchanged(self):
        a = self._inst([[0, 1]], 2, SOURCE)
        b = self._inst([[255, 255]], 2, TARGET)
        _, b2 = relabel_disjoint(a, b)
        assert b2.table == {}
        assert np.array_equal(b2.ids, np.zeros((1, 2), dtype=np.int32))

    def test_merged_table_cardinality(self, random_label_maps):
        maps = random_label_maps(20, seed=77)
        for y_a, y_b in zip(maps[::2], maps[1::2]):
            a = extract_instances(y_a, domain=SOURCE)
            b = extract_instances(y_b, domain=TARGET)
            a2, b2 = relabel_disjoint(a, b)
            merged = set(a2.table) | set(b2.table)
            assert len(merged) == len(a.table) + len(b.table)

    def test_pixel_partition_preserved(self):
        y = LabelMap(np.array([[0, 1, 0]], dtype=np.uint8), num_classes=2)
        a = extract_instances(y, domain=SOURCE)
        b = extract_instances(y, domain=TARGET)
        _, b2 = relabel_disjoint(a, b)
        assert same_partition(b.ids, b2.ids)
