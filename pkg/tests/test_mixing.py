import numpy as np
import pytest

from himix import (DataError, Image, LabelMap, blend, build_layer_stack,
                   classmix_mask, extract_instances, himix, reduce_to_mask,
                   relabel_disjoint, rng_for, select_source_instances)
from himix.instances import SOURCE, TARGET
from himix.mixing import Layer, LayerStack, MixMask

from oracles import brute_force_mask


def _inst(data, num_classes, domain, connectivity=4):
    y = LabelMap(np.asarray(data, dtype=np.uint8), num_classes=num_classes)
    return extract_instances(y, connectivity=connectivity, domain=domain)


def _random_image(h, w, seed):
    rng = rng_for(seed)
    data = np.asarray([[[rng.randbelow(256) for _ in range(3)] for _ in range(w)]
                       for _ in range(h)], dtype=np.uint8)
    return Image(data)


class TestSelectSourceInstances:
    def test_single_instance_always_selected(self):
        inst = _inst(np.zeros((3, 3)), 1, SOURCE)
        assert select_source_instances(inst, rng_for(0)) == {1}

    def test_cardinality_and_repeatability(self):
        inst = _inst([[0, 1], [2, 3]], 4, SOURCE)  # 4 instances
        first = select_source_instances(inst, rng_for(5))
        second = select_source_instances(inst, rng_for(5))
        assert len(first) == 2
        assert first == second

    def test_empty_errors(self):
        inst = _inst(np.full((2, 2), 255), 1, SOURCE)
        with pytest.raises(DataError, match="no source instances"):
            select_source_instances(inst, rng_for(0))

    def test_uniform_selection_frequency(self):
        inst = _inst([[0, 1], [2, 3]], 4, SOURCE)
        tallies = {1: 0, 2: 0, 3: 0, 4: 0}
        trials = 10_000
        rng = rng_for(42)
        for _ in range(trials):
            for i in select_source_instances(inst, rng):
                tallies[i] += 1
        for i in tallies:
            assert abs(tallies[i] / trials - 0.5) < 0.02

    def test_rejects_target_domain(self):
        inst = _inst([[0]], 1, TARGET)
        with pytest.raises(DataError):
            select_source_instances(inst, rng_for(0))


class TestBuildLayerStack:
    def test_sorted_by_count(self):
        # Source B (4 px) over targets T1 (10 px) and T2 (6 px).
        src = _inst([[255] * 4] * 3 + [[0] * 4], 1, SOURCE)       # one 4-px instance
        tgt = _inst([[1, 1, 1, 1], [1, 1, 1, 1], [1, 1, 2, 2], [2, 2, 2, 2]],
                    3, TARGET)
        counts = sorted(info.pixel_count for info in tgt.table.values())
        assert counts == [6, 10]
        src, tgt = relabel_disjoint(src, tgt)
        stack = build_layer_stack(src, set(src.table), tgt)
        order = [(l.domain, l.pixel_count) for l in stack.layers]
        assert order == [(TARGET, 10), (TARGET, 6), (SOURCE, 4)]

    def test_equal_counts_tie_source_first(self):
        src = _inst(np.zeros((2, 2)), 1, SOURCE)
        tgt = _inst(np.ones((2, 2)), 2, TARGET)
        src, tgt = relabel_disjoint(src, tgt)
        stack = build_layer_stack(src, set(src.table), tgt)
        assert [l.domain for l in stack.layers] == [SOURCE, TARGET]

    def test_no_source_selected(self):
        src = _inst(np.zeros((2, 2)), 1, SOURCE)
        tgt = _inst(np.ones((2, 2)), 2, TARGET)
        src, tgt = relabel_disjoint(src, tgt)
        stack = build_layer_stack(src, set(), tgt)
        assert [l.domain for l in stack.layers] == [TARGET]

    def test_shape_mismatch(self):
        src = _inst(np.zeros((2, 2)), 1, SOURCE)
        tgt = _inst(np.ones((3, 3)), 2, TARGET)
        with pytest.raises(DataError):
            build_layer_stack(src, set(src.table), tgt)

    def test_layer_bit_counts(self):
        src = _inst([[0, 1], [0, 1]], 2, SOURCE)
        tgt = _inst([[0, 0], [1, 1]], 2, TARGET)
        src, tgt = relabel_disjoint(src, tgt)
        stack = build_layer_stack(src, set(src.table), tgt)
        for layer in stack.layers:
            assert layer.pixels.size == layer.pixel_count


def _random_stack(seed, h=8, w=8):
    """Random overlapping layers with guaranteed full coverage."""
    rng = rng_for(seed)
    layers = []
    lid = 1
    # Bottom target layer covering everything.
    layers.append(Layer(lid, TARGET, h * w, np.arange(h * w, dtype=np.int64)))
    lid += 1
    for _ in range(rng.randbelow(6) + 2):
        top = rng.randbelow(h)
        left = rng.randbelow(w)
        bh = 1 + rng.randbelow(h - top)
        bw = 1 + rng.randbelow(w - left)
        sel = np.zeros((h, w), dtype=bool)
        sel[top:top + bh, left:left + bw] = True
        domain = SOURCE if rng.uniform() < 0.5 else TARGET
        pix = np.flatnonzero(sel.ravel()).astype(np.int64)
        layers.append(Layer(lid, domain, pix.size, pix))
        lid += 1
    layers.sort(key=lambda l: (-l.pixel_count,
                               0 if l.domain == SOURCE else 1, l.instance_id))
    return LayerStack(height=h, width=w, layers=tuple(layers))


class TestReduceToMask:
    def test_all_target_layer(self):
        stack = _random_stack(0)
        only_target = LayerStack(stack.height, stack.width, (stack.layers[0],)) \
            if stack.layers[0].domain == TARGET else None
        full = Layer(1, TARGET, 64, np.arange(64, dtype=np.int64))
        stack = LayerStack(8, 8, (full,))
        mask = reduce_to_mask(stack)
        assert not mask.data.any()

    def test_small_source_wins(self):
        full = Layer(1, TARGET, 64, np.arange(64, dtype=np.int64))
        pix = np.asarray([0, 1, 8, 9], dtype=np.int64)
        b = Layer(2, SOURCE, 4, pix)
        mask = reduce_to_mask(LayerStack(8, 8, (full, b)))
        expected = np.zeros(64, dtype=bool)
        expected[pix] = True
        assert np.array_equal(mask.data.ravel(), expected)

    def test_nested_car_road_land(self):
        # A 2-px car instance surrounded by a 6-px road instance, both atop a
        # 20-px target land layer; the mask is their 8-px union and car
        # pixels are won by the smaller car layer.
        land = Layer(1, TARGET, 20, np.arange(20, dtype=np.int64))
        road = Layer(2, SOURCE, 6, np.asarray([4, 7, 8, 9, 10, 11], dtype=np.int64))
        car = Layer(3, SOURCE, 2, np.asarray([5, 6], dtype=np.int64))
        mask = reduce_to_mask(LayerStack(4, 5, (land, road, car)))
        expected = np.zeros(20, dtype=bool)
        expected[4:12] = True
        assert np.array_equal(mask.data.ravel(), expected)
        assert mask.data.sum() == 8

    def test_incomplete_coverage_errors(self):
        part = Layer(1, TARGET, 3, np.asarray([0, 1, 2], dtype=np.int64))
        with pytest.raises(DataError, match="incomplete coverage"):
            reduce_to_mask(LayerStack(2, 2, (part,)))

    def test_matches_brute_force_on_random_stacks(self):
        for seed in range(100):
            stack = _random_stack(seed)
            mask = reduce_to_mask(stack)
            assert np.array_equal(mask.data, brute_force_mask(stack))


class TestBlend:
    def _pairs(self):
        x_s = _random_image(4, 4, 1)
        x_t = _random_image(4, 4, 2)
        y_s = LabelMap(np.zeros((4, 4), dtype=np.uint8), num_classes=2)
        y_t = LabelMap(np.ones((4, 4), dtype=np.uint8), num_classes=2)
        return x_s, x_t, y_s, y_t

    def test_all_ones_identity_source(self):
        x_s, x_t, y_s, y_t = self._pairs()
        m = MixMask(np.ones((4, 4), dtype=bool))
        x_m, y_m = blend(x_s, x_t, y_s, y_t, m)
        assert np.array_equal(x_m.data, x_s.data)
        assert np.array_equal(y_m.data, y_s.data)

    def test_all_zeros_identity_target(self):
        x_s, x_t, y_s, y_t = self._pairs()
        m = MixMask(np.zeros((4, 4), dtype=bool))
        x_m, y_m = blend(x_s, x_t, y_s, y_t, m)
        assert np.array_equal(x_m.data, x_t.data)
        assert np.array_equal(y_m.data, y_t.data)

    def test_checkerboard(self):
        x_s = Image(np.full((4, 4, 3), 10, dtype=np.uint8))
        x_t = Image(np.full((4, 4, 3), 200, dtype=np.uint8))
        y_s = LabelMap(np.zeros((4, 4), dtype=np.uint8), num_classes=2)
        y_t = LabelMap(np.ones((4, 4), dtype=np.uint8), num_classes=2)
        checker = (np.indices((4, 4)).sum(axis=0) % 2) == 0
        x_m, y_m = blend(x_s, x_t, y_s, y_t, MixMask(checker))
        for i in range(4):
            for j in range(4):
                expect = 10 if checker[i, j] else 200
                assert np.all(x_m.data[i, j] == expect)
                assert y_m.data[i, j] == (0 if checker[i, j] else 1)

    def test_shape_mismatch(self):
        x_s, x_t, y_s, y_t = self._pairs()
        with pytest.raises(DataError):
            blend(x_s, x_t, y_s, y_t, MixMask(np.ones((3, 3), dtype=bool)))


class TestClassmixMask:
    def test_single_class_all_ones(self):
        y = LabelMap(np.zeros((4, 4), dtype=np.uint8), num_classes=1)
        assert classmix_mask(y, rng_for(0)).data.all()

    def test_two_classes_selects_one(self):
        data = np.zeros((4, 4), dtype=np.uint8)
        data[2:] = 1
        mask = classmix_mask(LabelMap(data, num_classes=2), rng_for(9))
        assert mask.data.sum() == 8

    def test_selection_frequency(self):
        data = np.zeros((4, 4), dtype=np.uint8)
        data[0] = 0
        data[1] = 1
        data[2] = 2
        data[3] = 3
        y = LabelMap(data, num_classes=4)
        rng = rng_for(21)
        trials = 10_000
        tallies = np.zeros(4)
        for _ in range(trials):
            mask = classmix_mask(y, rng)
            for c in range(4):
                if mask.data[c].all():
                    tallies[c] += 1
        assert np.all(np.abs(tallies / trials - 0.5) < 0.02)

    def test_set_bits_equal_chosen_class_pixels(self):
        rng = rng_for(33)
        data = np.asarray([[rng.randbelow(4) for _ in range(8)] for _ in range(8)],
                          dtype=np.uint8)
        y = LabelMap(data, num_classes=4)
        mask = classmix_mask(y, rng_for(2))
        chosen = {int(c) for c in np.unique(data[mask.data])}
        for c in chosen:
            assert mask.data[data == c].all()
        assert not mask.data[~np.isin(data, list(chosen))].any()


class TestHimix:
    def _scene_pair(self, seed=3):
        rng = rng_for(seed)
        y_s = LabelMap(np.asarray([[rng.randbelow(3) for _ in range(8)]
                                   for _ in range(8)], dtype=np.uint8), num_classes=3)
        y_t = LabelMap(np.asarray([[rng.randbelow(3) for _ in range(8)]
                                   for _ in range(8)], dtype=np.uint8), num_classes=3)
        return _random_image(8, 8, seed), y_s, _random_image(8, 8, seed + 1), y_t

    def test_identical_domains_label_fixed(self):
        x_s, y_s, _, _ = self._scene_pair()
        x_m, y_m, _ = himix(x_s, y_s, x_s, y_s, 4, rng_for(1))
        assert np.array_equal(y_m.data, y_s.data)
        assert np.array_equal(x_m.data, x_s.data)

    def test_single_all_covering_source(self):
        x_s = _random_image(4, 4, 5)
        x_t = _random_image(4, 4, 6)
        y_s = LabelMap(np.zeros((4, 4), dtype=np.uint8), num_classes=2)
        y_t = LabelMap(np.ones((4, 4), dtype=np.uint8), num_classes=2)
        _, _, mask = himix(x_s, y_s, x_t, y_t, 4, rng_for(0))
        assert mask.data.all()

    def test_equals_stage_composition(self):
        x_s, y_s, x_t, y_t = self._scene_pair(seed=7)
        x_m, y_m, mask = himix(x_s, y_s, x_t, y_t, 4, rng_for(7))

        inst_s = extract_instances(y_s, connectivity=4, domain=SOURCE)
        inst_t = extract_instances(y_t, connectivity=4, domain=TARGET)
        inst_s, inst_t = relabel_disjoint(inst_s, inst_t)
        selected = select_source_instances(inst_s, rng_for(7))
        stack = build_layer_stack(inst_s, selected, inst_t)
        mask2 = reduce_to_mask(stack)
        x_m2, y_m2 = blend(x_s, y_s=y_s, x_t=x_t, y_hat_t=y_t, mask=mask2)

        assert np.array_equal(mask.data, mask2.data)
        assert np.array_equal(x_m.data, x_m2.data)
        assert np.array_equal(y_m.data, y_m2.data)

    def test_mixed_label_follows_mask(self):
        x_s, y_s, x_t, y_t = self._scene_pair(seed=11)
        _, y_m, mask = himix(x_s, y_s, x_t, y_t, 4, rng_for(11))
        assert np.array_equal(y_m.data[mask.data], y_s.data[mask.data])
        assert np.array_equal(y_m.data[~mask.data], y_t.data[~mask.data])

    def test_byte_identical_across_runs(self):
        x_s, y_s, x_t, y_t = self._scene_pair(seed=13)
        a = himix(x_s, y_s, x_t, y_t, 4, rng_for(99))
        b = himix(x_s, y_s, x_t, y_t, 4, rng_for(99))
        assert a[0].data.tobytes() == b[0].data.tobytes()
        assert a[1].data.tobytes() == b[1].data.tobytes()
        assert a[2].data.tobytes() == b[2].data.tobytes()
