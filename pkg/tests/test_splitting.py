import json
import random

import pytest

from obsr.hexgrid import CellId, cell_of
from obsr.regionize import aggregate_intensity, aggregate_mean
from obsr.splitting import (
    SegmentedTrajectory,
    SplitConfig,
    SplitError,
    SplitManifest,
    TooFewCells,
    TooShort,
    bucketize,
    segment_xy,
    split_points,
    split_trajectories,
)
from obsr.synth import SynthSpec, generate
from obsr.trajectory import hexify, interpolate_gaps


def price_dataset(n=600, seed=0, res=9):
    points = generate(SynthSpec(kind="linear_price_field", n=n, seed=seed))
    return points, aggregate_mean(points, res)


def walks(n=40, seed=0, length=24, res=9):
    trajs = generate(SynthSpec(kind="random_walks", n=n, seed=seed,
                               params={"walk_length": length,
                                       "resolution": res}))
    return [interpolate_gaps(hexify(t, res)) for t in trajs]


class TestBucketize:
    def test_median_split(self):
        buckets = bucketize(list(range(1, 11)), 2)
        assert buckets == [0] * 5 + [1] * 5

    def test_single_bucket(self):
        assert bucketize([3.0, 1.0, 2.0], 1) == [0, 0, 0]

    def test_all_equal_values_one_bucket(self):
        assert bucketize([5.0] * 4, 4) == [0, 0, 0, 0]

    def test_boundary_goes_to_lower_bucket(self):
        # quantile boundary of [1..4] at 1/2 is 2.5; the value 2.5 must
        # land in the lower bucket
        buckets = bucketize([1.0, 2.0, 2.5, 3.0, 4.0], 2)
        assert buckets == [0, 0, 0, 1, 1]

    def test_empty(self):
        from obsr.splitting import EmptyInput
        with pytest.raises(EmptyInput):
            bucketize([], 2)


class TestSplitPoints:
    def test_uniform_unstratified_proportion(self):
        points, ds = price_dataset(seed=1)
        n_cells = len(ds)
        cfg = SplitConfig(resolution=9, n_bins=1, test_fraction=0.2, seed=7)
        manifest = split_points(ds, cfg)
        assert len(manifest.test) == round(0.2 * n_cells)
        assert set(manifest.train).isdisjoint(manifest.test)
        assert len(manifest.train) + len(manifest.test) == n_cells

    def test_seed_sensitivity_same_sizes(self):
        _, ds = price_dataset(seed=2)
        cfg_a = SplitConfig(resolution=9, n_bins=4, test_fraction=0.25, seed=1)
        cfg_b = SplitConfig(resolution=9, n_bins=4, test_fraction=0.25, seed=2)
        m_a = split_points(ds, cfg_a)
        m_b = split_points(ds, cfg_b)
        assert len(m_a.test) == len(m_b.test)
        assert set(m_a.test) != set(m_b.test)

    def test_points_follow_cells(self):
        points, ds = price_dataset(seed=3)
        cfg = SplitConfig(resolution=9, n_bins=5, test_fraction=0.3, seed=9)
        manifest = split_points(points, cfg)
        train = set(manifest.train)
        test = set(manifest.test)
        for p in points:
            cid = cell_of(p.point, 9).to_string()
            assert (cid in train) != (cid in test)

    def test_region_and_point_input_agree(self):
        points, ds = price_dataset(seed=4)
        cfg = SplitConfig(resolution=9, n_bins=4, test_fraction=0.3, seed=11)
        m_points = split_points(points, cfg)
        m_region = split_points(ds, cfg)
        assert m_points.train == m_region.train
        assert m_points.test == m_region.test

    def test_bucket_balance(self):
        points, ds = price_dataset(n=3000, seed=5)
        cfg = SplitConfig(resolution=9, n_bins=7, test_fraction=0.3, seed=3)
        manifest = split_points(ds, cfg)
        for bucket in manifest.bucket_report:
            if bucket["size"] >= 20:
                assert abs(bucket["achieved_test_fraction"] - 0.3) <= 0.05

    def test_determinism_byte_identical(self):
        _, ds = price_dataset(seed=6)
        cfg = SplitConfig(resolution=9, n_bins=7, test_fraction=0.2, seed=42)
        payloads = {split_points(ds, cfg).to_json() for _ in range(3)}
        assert len(payloads) == 1

    def test_too_few_cells(self):
        points, _ = price_dataset(seed=7)
        one_cell = [p for p in points
                    if cell_of(p.point, 9) == cell_of(points[0].point, 9)]
        with pytest.raises(TooFewCells):
            split_points(one_cell, SplitConfig(resolution=9, seed=0))

    def test_intensity_point_count_strata(self):
        points = generate(SynthSpec(kind="clustered_intensity", n=1500,
                                    seed=8, extent_deg=0.02))
        ds = aggregate_intensity(points, 9)
        cfg = SplitConfig(resolution=9, n_bins=7, test_fraction=0.2, seed=5,
                          strat_source="point_count")
        manifest = split_points(ds, cfg)
        assert set(manifest.train).isdisjoint(manifest.test)

    def test_degenerate_bucket_goes_to_train(self):
        points, ds = price_dataset(n=40, seed=9)
        # n_bins close to the cell count forces tiny buckets
        cfg = SplitConfig(resolution=9, n_bins=len(ds), test_fraction=0.4,
                          seed=1)
        manifest = split_points(ds, cfg)
        for bucket in manifest.bucket_report:
            if bucket["degenerate"]:
                assert bucket["test"] == 0


class TestSplitTrajectories:
    def test_identical_lengths(self):
        trajs = walks(n=10, seed=1, length=12)
        cfg = SplitConfig(resolution=9, n_bins=1, test_fraction=0.3, seed=2,
                          strat_source="length")
        # force identical lengths by trimming
        from obsr.trajectory import HexTrajectory
        trimmed = [HexTrajectory(id=t.id, cells=t.cells[:10],
                                 times=t.times[:10], duration_s=t.duration_s)
                   for t in trajs]
        manifest = split_trajectories(trimmed, cfg)
        assert len(manifest.test) == 3

    def test_quartile_balance(self):
        from obsr.trajectory import HexTrajectory
        base = walks(n=1, seed=2, length=8)[0]
        trajs = []
        for i in range(100):
            # lengths 1..100 cells via repetition of a contiguous walk
            cells = base.cells * ((i // len(base.cells)) + 2)
            trajs.append(HexTrajectory(id=f"t{i:03d}",
                                       cells=cells[:i + 2],
                                       duration_s=float(30 * (i + 2))))
        cfg = SplitConfig(resolution=9, n_bins=4, test_fraction=0.2, seed=3,
                          strat_source="length")
        manifest = split_trajectories(trajs, cfg)
        for bucket in manifest.bucket_report:
            assert abs(bucket["test"] - 0.2 * bucket["size"]) <= 1.0

    def test_duration_stratification(self):
        trajs = walks(n=30, seed=3)
        cfg = SplitConfig(resolution=9, n_bins=3, test_fraction=0.25, seed=4,
                          strat_source="duration")
        manifest = split_trajectories(trajs, cfg)
        ids = {t.id for t in trajs}
        assert set(manifest.train) | set(manifest.test) == ids

    def test_whole_trajectory_assignment(self):
        trajs = walks(n=20, seed=4)
        cfg = SplitConfig(resolution=9, n_bins=2, test_fraction=0.3, seed=5,
                          strat_source="length")
        manifest = split_trajectories(trajs, cfg)
        assert set(manifest.train).isdisjoint(manifest.test)


class TestManifestSerialization:
    def test_json_roundtrip(self):
        _, ds = price_dataset(seed=10)
        cfg = SplitConfig(resolution=9, n_bins=3, test_fraction=0.2, seed=6)
        manifest = split_points(ds, cfg)
        loaded = SplitManifest.from_json(manifest.to_json())
        assert loaded.train == manifest.train
        assert loaded.test == manifest.test
        assert loaded.config == cfg

    def test_field_order_fixed(self):
        _, ds = price_dataset(seed=11)
        cfg = SplitConfig(resolution=9, n_bins=2, test_fraction=0.2, seed=7)
        payload = json.loads(split_points(ds, cfg).to_json())
        assert list(payload) == ["train", "test", "config", "bucket_report"]

    def test_lists_sorted(self):
        _, ds = price_dataset(seed=12)
        cfg = SplitConfig(resolution=9, n_bins=2, test_fraction=0.2, seed=8)
        manifest = split_points(ds, cfg)
        assert list(manifest.train) == sorted(manifest.train)
        assert list(manifest.test) == sorted(manifest.test)

    def test_overlap_rejected(self):
        cfg = SplitConfig(resolution=9, seed=0)
        cell = cell_of(generate(SynthSpec(kind="linear_price_field", n=1,
                                          seed=13))[0].point, 9).to_string()
        with pytest.raises(SplitError):
            SplitManifest(train=(cell,), test=(cell,), config=cfg)

    def test_wrong_resolution_cell_rejected(self):
        points, _ = price_dataset(seed=14)
        c8 = cell_of(points[0].point, 8).to_string()
        c9a = cell_of(points[1].point, 9).to_string()
        cfg = SplitConfig(resolution=9, seed=0)
        with pytest.raises(SplitError):
            SplitManifest(train=(c8,), test=(c9a,), config=cfg)


class TestSegmentXY:
    def test_fraction_floor(self):
        t = walks(n=1, seed=5, length=20)[0]
        from obsr.trajectory import HexTrajectory
        t20 = HexTrajectory(id=t.id, cells=t.cells[:20], times=t.times[:20],
                            duration_s=t.duration_s)
        seg = segment_xy(t20, 0.15)
        assert len(seg.X.cells) == 17
        assert len(seg.Y) == 3

    def test_min_one_target(self):
        t = walks(n=1, seed=6, length=4)[0]
        from obsr.trajectory import HexTrajectory
        t2 = HexTrajectory(id=t.id, cells=t.cells[:2], times=t.times[:2],
                           duration_s=30.0)
        seg = segment_xy(t2, 0.15)
        assert len(seg.X.cells) == 1
        assert len(seg.Y) == 1

    def test_length_100(self):
        from obsr.trajectory import HexTrajectory
        base = walks(n=1, seed=7, length=30)[0]
        cells = (base.cells * 5)[:100]
        t = HexTrajectory(id="t", cells=cells, duration_s=3000.0)
        seg = segment_xy(t, 0.15)
        assert len(seg.Y) == 15
        assert seg.X.cells + seg.Y == t.cells

    def test_too_short(self):
        from obsr.trajectory import HexTrajectory
        t = HexTrajectory(id="t", cells=walks(n=1, seed=8)[0].cells[:1],
                          duration_s=0.0)
        with pytest.raises(TooShort):
            segment_xy(t)

    def test_reconstruction(self):
        for t in walks(n=5, seed=9, length=17):
            seg = segment_xy(t)
            assert seg.X.cells + seg.Y == t.cells
            assert isinstance(seg, SegmentedTrajectory)
