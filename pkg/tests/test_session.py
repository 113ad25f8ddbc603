"""sim-session: trajectory I/O, deterministic replay, trace CSV."""

from __future__ import annotations

import numpy as np
import pytest

from voxelhaptics import (
    HapticConfig,
    SessionConfig,
    TrajectoryFrame,
    Volume,
    load_trajectory,
    run_session,
    save_trajectory,
    write_trace,
)
from voxelhaptics.phantoms import halfspace
from voxelhaptics.session import TrajectoryError, read_trace

from conftest import swept_ball_mask


def descent_frames(x, y, z_from, z_to, ticks, sculpt=False):
    zs = np.linspace(z_from, z_to, ticks)
    return [TrajectoryFrame(t, (x, y, float(z)), sculpt) for t, z in enumerate(zs)]


class TestLoadTrajectory:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text("")
        assert load_trajectory(path) == []

    def test_two_frames(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text(
            '{"tick":0,"pos":[1.0,2.0,3.0],"sculpt":false}\n'
            '{"tick":1,"pos":[1.5,2.0,3.0],"sculpt":true}\n'
        )
        frames = load_trajectory(path)
        assert len(frames) == 2
        assert frames[0] == TrajectoryFrame(0, (1.0, 2.0, 3.0), False)
        assert frames[1].sculpt_pressed

    def test_non_increasing_tick_rejected(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text(
            '{"tick":0,"pos":[0,0,0],"sculpt":false}\n'
            '{"tick":0,"pos":[0,0,0],"sculpt":false}\n'
        )
        with pytest.raises(TrajectoryError, match="non-increasing tick at line 2"):
            load_trajectory(path)

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "t.jsonl"
        path.write_text('{"tick":0,"pos":[0,0,0],"sculpt":false}\n{nope\n')
        with pytest.raises(TrajectoryError, match="line 2"):
            load_trajectory(path)

    @pytest.mark.parametrize(
        "line",
        [
            '{"tick":"0","pos":[0,0,0],"sculpt":false}',
            '{"tick":0,"pos":[0,0],"sculpt":false}',
            '{"tick":0,"pos":[0,0,"x"],"sculpt":false}',
            '{"tick":0,"pos":[0,0,0],"sculpt":1}',
            '{"tick":-1,"pos":[0,0,0],"sculpt":false}',
            "[1,2,3]",
        ],
    )
    def test_bad_fields_rejected(self, tmp_path, line):
        path = tmp_path / "t.jsonl"
        path.write_text(line + "\n")
        with pytest.raises(TrajectoryError, match="line 1"):
            load_trajectory(path)

    def test_save_load_round_trip(self, tmp_path):
        frames = descent_frames(3.0, 4.0, 10.0, 5.0, 7, sculpt=True)
        path = tmp_path / "t.jsonl"
        assert save_trajectory(frames, path) == 7
        assert load_trajectory(path) == frames


class TestRunSession:
    def test_empty_trajectory(self):
        vol = halfspace((8, 8, 8))
        trace, out_vol, regions = run_session(vol, [], SessionConfig())
        assert len(trace) == 0
        assert regions == []
        assert np.array_equal(out_vol.data, vol.data)

    def test_input_volume_untouched(self):
        vol = halfspace((12, 12, 8))
        baseline = vol.data.copy()
        frames = [TrajectoryFrame(0, (5.5, 5.5, 5.0), True)]
        run_session(vol, frames, SessionConfig())
        assert np.array_equal(vol.data, baseline)
        assert vol.revision == 0

    def test_descent_matches_depth_oracle(self):
        vol = halfspace((32, 32, 16))  # felt surface: z = 15
        cfg = SessionConfig(
            haptic=HapticConfig(stiffness_k=0.5, smoothing_enabled=False),
            sculpt_enabled=False,
            probe_radius=1.5,
        )
        frames = descent_frames(15.5, 15.5, 17.0, 13.0, 100)
        trace, _, regions = run_session(vol, frames, cfg)
        assert regions == []
        assert len(trace) == 100
        for sample, frame in zip(trace, frames):
            depth = 15.0 - frame.device_pos[2]
            norm = float(np.linalg.norm(sample.output_f))
            if depth > 0.02:
                assert norm == pytest.approx(0.5 * depth, abs=0.5 * 0.02)
                assert sample.output_f[2] > 0
                assert sample.l_avg == 1.0
            elif depth < -0.02:
                assert norm == 0.0

    def test_tick_gaps_hold_previous_state(self):
        vol = halfspace((16, 16, 8))
        cfg = SessionConfig(haptic=HapticConfig(smoothing_enabled=False), sculpt_enabled=False)
        sparse = [
            TrajectoryFrame(0, (7.5, 7.5, 6.5), False),
            TrajectoryFrame(3, (7.5, 7.5, 6.0), False),
            TrajectoryFrame(5, (7.5, 7.5, 5.5), False),
        ]
        dense = [
            TrajectoryFrame(0, (7.5, 7.5, 6.5), False),
            TrajectoryFrame(1, (7.5, 7.5, 6.5), False),
            TrajectoryFrame(2, (7.5, 7.5, 6.5), False),
            TrajectoryFrame(3, (7.5, 7.5, 6.0), False),
            TrajectoryFrame(4, (7.5, 7.5, 6.0), False),
            TrajectoryFrame(5, (7.5, 7.5, 5.5), False),
        ]
        trace_a, _, _ = run_session(vol, sparse, cfg)
        trace_b, _, _ = run_session(vol, dense, cfg)
        assert len(trace_a) == 6
        assert [s.tick for s in trace_a.samples] == list(range(6))
        for sa, sb in zip(trace_a, trace_b):
            np.testing.assert_array_equal(sa.output_f, sb.output_f)

    def test_force_precedes_carve_within_tick(self):
        # Causality: the tick-0 force must see the pre-carve volume even though
        # the tick-0 carve empties the space around the device.
        vol = halfspace((16, 16, 8))
        cfg = SessionConfig(
            haptic=HapticConfig(stiffness_k=1.0, smoothing_enabled=False),
            sculpt_enabled=True,
            probe_radius=2.0,
        )
        frames = [
            TrajectoryFrame(0, (7.5, 7.5, 6.5), True),
            TrajectoryFrame(1, (7.5, 7.5, 6.5), True),
        ]
        trace, out_vol, regions = run_session(vol, frames, cfg)
        assert np.linalg.norm(trace.samples[0].raw_f) > 0.3
        assert np.linalg.norm(trace.samples[1].raw_f) == 0.0
        assert regions and regions[0].revision_after == 1

    def test_force_drops_once_carving_reaches_surface(self):
        vol = halfspace((24, 24, 12))
        cfg = SessionConfig(
            haptic=HapticConfig(stiffness_k=0.5, smoothing_enabled=False),
            sculpt_enabled=True,
            probe_radius=1.5,
        )
        frames = descent_frames(11.5, 11.5, 13.0, 10.0, 60, sculpt=False)
        frames += [
            TrajectoryFrame(60 + t, (11.5, 11.5, 10.0), True) for t in range(20)
        ]
        trace, _, regions = run_session(vol, frames, cfg)
        assert regions, "sculpting phase must have removed material"
        norms = [float(np.linalg.norm(s.raw_f)) for s in trace]
        assert max(norms[:60]) > 0.2  # was in contact before sculpting
        for a, b in zip(norms[60:], norms[61:]):
            assert b <= a + 1e-12

    def test_swept_sphere_union_oracle(self):
        vol = Volume.filled((24, 24, 24), value=(200, 180, 160, 255))
        cfg = SessionConfig(haptic=HapticConfig(), sculpt_enabled=True, probe_radius=2.0)
        rng = np.random.default_rng(7)
        pos = np.cumsum(rng.uniform(-1.5, 1.5, (60, 3)), axis=0) + 12.0
        frames = [TrajectoryFrame(t, tuple(p), True) for t, p in enumerate(pos)]
        trace, out_vol, _ = run_session(vol, frames, cfg)
        union = swept_ball_mask(vol, pos, 2.0)
        zeroed = ~out_vol.data.any(axis=3)
        assert np.array_equal(zeroed, union)

    def test_bit_deterministic(self):
        vol = halfspace((16, 16, 8))
        cfg = SessionConfig(probe_radius=1.5)
        frames = descent_frames(7.5, 7.5, 9.0, 5.0, 50, sculpt=True)
        t1, v1, r1 = run_session(vol, frames, cfg)
        t2, v2, r2 = run_session(vol, frames, cfg)
        assert np.array_equal(v1.data, v2.data)
        assert r1 == r2
        for a, b in zip(t1, t2):
            np.testing.assert_array_equal(a.output_f, b.output_f)
            np.testing.assert_array_equal(a.raw_f, b.raw_f)
            assert a.l_avg == b.l_avg


class TestWriteTrace:
    def _run(self, ticks=3):
        vol = halfspace((16, 16, 8))
        frames = descent_frames(7.5, 7.5, 7.5, 6.0, ticks)
        trace, _, _ = run_session(vol, frames, SessionConfig())
        return trace

    def test_empty_trace(self, tmp_path):
        from voxelhaptics.session import ForceTrace

        path = tmp_path / "trace.csv"
        assert write_trace(ForceTrace(), path) == 0
        lines = path.read_text().strip().splitlines()
        assert lines == ["tick,fx,fy,fz,l_avg,n_sampled,out_fx,out_fy,out_fz"]

    def test_row_per_tick(self, tmp_path):
        trace = self._run(3)
        path = tmp_path / "trace.csv"
        assert write_trace(trace, path) == 3
        assert len(path.read_text().strip().splitlines()) == 4

    def test_round_trip_precision(self, tmp_path):
        trace = self._run(40)
        path = tmp_path / "trace.csv"
        write_trace(trace, path)
        rows = read_trace(path)
        for row, sample in zip(rows, trace):
            assert row["tick"] == sample.tick
            assert row["n_sampled"] == sample.n_sampled
            for key, val in [
                ("fx", sample.raw_f[0]),
                ("fy", sample.raw_f[1]),
                ("fz", sample.raw_f[2]),
                ("l_avg", sample.l_avg),
                ("out_fx", sample.output_f[0]),
                ("out_fy", sample.output_f[1]),
                ("out_fz", sample.output_f[2]),
            ]:
                tol = 1e-9 * max(1.0, abs(float(val)))
                assert abs(row[key] - float(val)) <= tol

    def test_byte_identical_across_runs(self, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_trace(self._run(25), p1)
        write_trace(self._run(25), p2)
        assert p1.read_bytes() == p2.read_bytes()
