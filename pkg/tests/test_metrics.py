"""Windowed drift metrics: oracle comparisons, invariances, report formats."""

import json
import math

import numpy as np
import pytest

from topometric.geometry import Pose2
from topometric.metrics import (
    DEFAULT_SUB_LENGTHS,
    ErrorReport,
    evaluate,
    report_to_csv,
    report_to_json,
    write_report,
)
from topometric.odometry import Trajectory, integrate
from topometric.simulator import MILD_DRIFT, corrupt_odometry, generate_path


def straight(n: int, scale: float = 1.0) -> Trajectory:
    return Trajectory(tuple((t, Pose2(scale * t, 0.0, 0.0)) for t in range(n + 1)))


def rigid_transform(traj: Trajectory, alpha: float, tx: float, ty: float) -> Trajectory:
    c, s = math.cos(alpha), math.sin(alpha)
    return Trajectory(
        tuple(
            (t, Pose2(c * p.x - s * p.y + tx, s * p.x + c * p.y + ty, p.theta + alpha))
            for t, p in traj.poses
        )
    )


def reference_evaluate(est: Trajectory, tru: Trajectory, lengths) -> list[tuple]:
    """Plain-python re-derivation of the per-length error rows."""
    ex, ey = zip(*((p.x, p.y) for _, p in est.poses))
    tx, ty = zip(*((p.x, p.y) for _, p in tru.poses))
    eth = [p.theta for _, p in est.poses]
    tth = [p.theta for _, p in tru.poses]
    n = len(tru)
    cum = [0.0]
    for i in range(1, n):
        cum.append(cum[-1] + math.hypot(tx[i] - tx[i - 1], ty[i] - ty[i - 1]))

    def start_frame_disp(xs, ys, ths, i, j):
        dx, dy = xs[j] - xs[i], ys[j] - ys[i]
        c, s = math.cos(ths[i]), math.sin(ths[i])
        return c * dx + s * dy, -s * dx + c * dy

    rows = []
    for length in lengths:
        if length > cum[-1]:
            continue
        t_errs, r_errs = [], []
        for i in range(n):
            j = next((k for k in range(n) if cum[k] >= cum[i] + length), None)
            if j is None:
                continue
            ddx, ddy = (
                a - b
                for a, b in zip(
                    start_frame_disp(ex, ey, eth, i, j),
                    start_frame_disp(tx, ty, tth, i, j),
                )
            )
            t_errs.append(math.hypot(ddx, ddy))
            gap = (eth[j] - eth[i]) - (tth[j] - tth[i])
            r_errs.append(abs(math.atan2(math.sin(gap), math.cos(gap))))
        trans = sum(t_errs) / len(t_errs) / length * 100.0
        rot = sum(r_errs) / len(r_errs) / length * 180.0 / math.pi
        rows.append((length, trans, rot))
    return rows


def drifting_pair() -> tuple[Trajectory, Trajectory]:
    truth = generate_path("random-walk", 120.0, 1.0, seed=11)
    estimate = integrate(truth.origin, corrupt_odometry(truth, MILD_DRIFT))
    return estimate, truth


class TestEvaluate:
    def test_identical_trajectories_score_zero(self):
        truth = generate_path("loop", 120.0, 1.0, seed=0)
        report = evaluate(truth, truth, (10.0, 25.0, 50.0))
        assert report.avg_translation_pct == 0.0
        assert report.avg_rotation_deg_per_m == 0.0
        assert report.endpoint_error == 0.0
        assert all(row[1] == 0.0 and row[2] == 0.0 for row in report.per_length)

    def test_pure_scale_error_reports_the_scale(self):
        # x stretched by 2 % => every window over-travels by exactly 2 %.
        report = evaluate(straight(100, scale=1.02), straight(100), (10.0, 25.0, 50.0))
        for _, trans, rot in report.per_length:
            assert trans == pytest.approx(2.0, rel=1e-9)
            assert rot == 0.0
        assert report.avg_translation_pct == pytest.approx(2.0, rel=1e-9)
        assert report.endpoint_error == pytest.approx(2.0, rel=1e-9)

    def test_matches_plain_python_reference(self):
        estimate, truth = drifting_pair()
        lengths = (10.0, 25.0, 50.0)
        report = evaluate(estimate, truth, lengths)
        expected = reference_evaluate(estimate, truth, lengths)
        assert len(report.per_length) == len(expected)
        for got, want in zip(report.per_length, expected):
            assert got[0] == want[0]
            assert got[1] == pytest.approx(want[1], rel=1e-9, abs=1e-12)
            assert got[2] == pytest.approx(want[2], rel=1e-9, abs=1e-12)

    def test_invariant_to_rigid_transform_of_estimate(self):
        # Relative errors must not care where the estimate is anchored.
        estimate, truth = drifting_pair()
        lengths = (10.0, 25.0)
        base = evaluate(estimate, truth, lengths)
        moved = evaluate(rigid_transform(estimate, 0.7, 12.0, -5.0), truth, lengths)
        assert moved.avg_translation_pct == pytest.approx(
            base.avg_translation_pct, rel=1e-9
        )
        assert moved.avg_rotation_deg_per_m == pytest.approx(
            base.avg_rotation_deg_per_m, rel=1e-9, abs=1e-12
        )

    def test_heading_ramp_scores_as_rotation_rate(self):
        # Same positions, heading drifting 0.01 rad per step: every window
        # accumulates exactly 0.01 rad/m of rotation error; the translation
        # error is nonzero too because window displacements are expressed in
        # each trajectory's own start-pose frame.
        truth = straight(40)
        ramped = Trajectory(
            tuple((t, Pose2(p.x, p.y, p.theta + 0.01 * t)) for t, p in truth.poses)
        )
        report = evaluate(ramped, truth, (10.0,))
        assert report.avg_rotation_deg_per_m == pytest.approx(
            0.01 * 180.0 / math.pi, rel=1e-9
        )
        assert report.avg_translation_pct > 0.0
        assert report.endpoint_error == 0.0

    def test_too_long_window_warns_and_is_skipped(self):
        truth = straight(100)
        with pytest.warns(UserWarning, match="skipped"):
            report = evaluate(truth, truth, (10.0, 1000.0))
        assert [row[0] for row in report.per_length] == [10.0]

    def test_no_fitting_window_is_an_error(self):
        truth = straight(5)
        with pytest.warns(UserWarning):
            with pytest.raises(ValueError, match="no sub-length fits"):
                evaluate(truth, truth, (1000.0,))

    def test_rejects_mismatched_timesteps(self):
        with pytest.raises(ValueError, match="identical timesteps"):
            evaluate(straight(5), straight(6), (2.0,))

    def test_rejects_non_positive_sub_length(self):
        with pytest.raises(ValueError, match="positive"):
            evaluate(straight(5), straight(5), (0.0,))

    def test_default_sub_lengths_are_increasing(self):
        assert DEFAULT_SUB_LENGTHS == (10.0, 25.0, 50.0, 100.0, 150.0, 200.0)


class TestReportFormats:
    def sample_report(self) -> ErrorReport:
        estimate, truth = drifting_pair()
        return evaluate(estimate, truth, (10.0, 25.0))

    def test_csv_round_trips_values_exactly(self):
        report = self.sample_report()
        lines = report_to_csv(report).splitlines()
        assert lines[0] == "sub_length,trans_pct,rot_deg_per_m"
        assert len(lines) == 2 + len(report.per_length)
        for line, row in zip(lines[1:], report.per_length):
            cells = line.split(",")
            assert (float(cells[0]), float(cells[1]), float(cells[2])) == row
        avg = lines[-1].split(",")
        assert avg[0] == "avg"
        assert float(avg[1]) == report.avg_translation_pct
        assert float(avg[2]) == report.avg_rotation_deg_per_m

    def test_json_payload(self):
        report = self.sample_report()
        text = report_to_json(report)
        assert text.endswith("\n")
        payload = json.loads(text)
        assert payload["avg_translation_pct"] == report.avg_translation_pct
        assert payload["avg_rotation_deg_per_m"] == report.avg_rotation_deg_per_m
        assert payload["endpoint_error_m"] == report.endpoint_error
        assert len(payload["per_length"]) == len(report.per_length)
        for entry, row in zip(payload["per_length"], report.per_length):
            assert (entry["sub_length"], entry["trans_pct"], entry["rot_deg_per_m"]) == row

    def test_write_report_creates_both_files(self, tmp_path):
        report = self.sample_report()
        csv_path = tmp_path / "report.csv"
        json_path = tmp_path / "report.json"
        write_report(report, csv_path, json_path)
        assert csv_path.read_text() == report_to_csv(report)
        assert json_path.read_text() == report_to_json(report)
