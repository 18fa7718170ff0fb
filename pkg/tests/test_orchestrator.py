import random
import time
from math import factorial

import pytest

from app.engine.normalization import validate_config
from app.engine.oracle import oracle_run_cycle
from app.engine.orchestrator import check_guard, run_cycle, run_stream
from app.models import AlarmReport, CycleFailure, EngineConfig, ReadingFrame, SensorSpec, TraceMode
from app.utils.errors import GuardViolationError, OracleCapacityError, RangeViolationError


def make_model(layout, threshold=0.3, **engine):
    """Sensors with range [0, 100]; layout maps cluster id to size"""
    specs = []
    sensor_id = 1
    for cluster_id, size in layout.items():
        for _ in range(size):
            specs.append(SensorSpec(id=sensor_id, x_min=0.0, x_max=100.0, cluster_id=cluster_id))
            sensor_id += 1
    return validate_config(specs, EngineConfig(threshold=threshold, **engine))


def uniform_frame(model, raw, timestamp=0):
    return ReadingFrame(timestamp=timestamp, values={spec.id: raw for spec in model.specs})


def random_frame(model, rng, timestamp=0):
    return ReadingFrame(timestamp=timestamp, values={spec.id: rng.uniform(0.0, 100.0) for spec in model.specs})


def assert_matches_oracle(report, expected):
    assert report.alarm == expected.alarm
    for cluster, reference in zip(report.clusters, expected.clusters):
        assert cluster.cluster_id == reference.cluster_id
        assert cluster.evaluated == reference.evaluated
        assert cluster.survivors == reference.survivors
        assert cluster.pruned == reference.pruned
        values = cluster.survivor_values()
        reference_values = reference.survivor_values()
        assert values.keys() == reference_values.keys()
        for sequence, value in values.items():
            assert value == pytest.approx(reference_values[sequence], abs=1e-12)


class TestRunCycle:
    """Test single-cycle evaluation"""

    def test_silent_network_never_alarms(self):
        """Test a frame at every sensor's minimum raises no alarm"""
        model = make_model({"A": 4}, threshold=0.05)
        report = run_cycle(uniform_frame(model, 0.0), model)
        assert report.alarm is False
        cluster = report.cluster("A")
        assert cluster.evaluated == 24
        assert cluster.survivors == 0
        assert cluster.pruned == 24

    def test_two_sensors_at_maximum(self):
        """Test n=2 at full scale gives two survivors at 0.5"""
        model = make_model({"A": 2}, threshold=0.4)
        report = run_cycle(uniform_frame(model, 100.0), model)
        assert report.alarm is True
        assert report.cluster("A").survivor_values() == {(1, 2): 0.5, (2, 1): 0.5}

    @pytest.mark.parametrize("n", range(2, 7))
    def test_evaluates_every_ordering(self, n):
        """Test each cluster of n sensors evaluates n! orderings"""
        model = make_model({"A": n})
        report = run_cycle(random_frame(model, random.Random(n)), model)
        assert report.cluster("A").evaluated == factorial(n)

    def test_single_sensor_cluster(self):
        """Test a one-sensor cluster evaluates nothing and never alarms"""
        model = make_model({"A": 1, "B": 2}, threshold=0.4)
        report = run_cycle(uniform_frame(model, 100.0), model)
        assert report.cluster("A").evaluated == 0
        assert report.cluster("A").alarm is False
        assert report.cluster("B").alarm is True

    def test_clusters_are_independent(self):
        """Test one cluster's readings never change another cluster's outcome"""
        model = make_model({"A": 3, "B": 3}, threshold=0.3)
        hot = {1: 100.0, 2: 100.0, 3: 100.0}
        first = run_cycle(ReadingFrame(timestamp=0, values={**hot, 4: 0.0, 5: 0.0, 6: 0.0}), model)
        second = run_cycle(ReadingFrame(timestamp=0, values={**hot, 4: 55.0, 5: 12.0, 6: 80.0}), model)
        assert first.cluster("A") == second.cluster("A")
        assert first.cluster("A").alarm is True
        assert first.cluster("B").alarm is False

    def test_cluster_uses_canonical_ids(self):
        """Test survivors are reported in canonical ids with config ids alongside"""
        specs = [
            SensorSpec(id=30, x_min=0, x_max=10, cluster_id="A"),
            SensorSpec(id=10, x_min=0, x_max=10, cluster_id="A"),
        ]
        model = validate_config(specs, EngineConfig(threshold=0.4))
        report = run_cycle(ReadingFrame(timestamp=0, values={10: 10.0, 30: 10.0}), model)
        assert report.cluster("A").sensor_ids == (30, 10)
        assert set(report.cluster("A").survivor_values()) == {(1, 2), (2, 1)}

    def test_threshold_monotonicity(self):
        """Test raising the threshold never adds survivors on 100 random networks and threshold pairs"""
        rng = random.Random(3)
        for _ in range(100):
            model = make_model({"A": rng.randint(2, 6)})
            frame = random_frame(model, rng)
            lower, upper = sorted(rng.uniform(0.001, 0.999) for _ in range(2))
            low = run_cycle(frame, model, model.config.model_copy(update={"threshold": lower})).cluster("A")
            high = run_cycle(frame, model, model.config.model_copy(update={"threshold": upper})).cluster("A")
            assert set(high.survivor_values()) <= set(low.survivor_values())
            assert high.survivors <= low.survivors

    def test_cluster_order_does_not_change_reports(self):
        """Test declaring clusters in another order leaves every cluster's report unchanged"""
        base = make_model({"A": 4, "B": 3, "C": 2}, threshold=0.15)
        forward = validate_config(base.specs, base.config, clusters=["A", "B", "C"])
        backward = validate_config(base.specs, base.config, clusters=["C", "A", "B"])
        rng = random.Random(21)
        for timestamp in range(10):
            frame = random_frame(base, rng, timestamp)
            first = run_cycle(frame, forward)
            second = run_cycle(frame, backward)
            assert [cluster.cluster_id for cluster in second.clusters] == ["C", "A", "B"]
            assert first.alarm == second.alarm
            for cluster_id in ("A", "B", "C"):
                assert first.cluster(cluster_id) == second.cluster(cluster_id)

    @pytest.mark.slow
    def test_eight_sensors_within_ten_seconds(self):
        """Test a cluster of 8 sensors evaluates all 40320 orderings in under 10 s"""
        model = make_model({"A": 8}, threshold=0.2)
        frame = random_frame(model, random.Random(8))
        started = time.perf_counter()
        report = run_cycle(frame, model)
        elapsed = time.perf_counter() - started
        assert report.cluster("A").evaluated == 40320
        assert report.cluster("A").survivors + report.cluster("A").pruned == 40320
        assert elapsed < 10.0

    def test_stateless(self):
        """Test a cycle's report does not depend on earlier cycles"""
        model = make_model({"A": 4, "B": 3}, threshold=0.2)
        rng = random.Random(5)
        frame = random_frame(model, rng)
        first = run_cycle(frame, model)
        run_cycle(uniform_frame(model, 100.0), model)
        assert run_cycle(frame, model) == first

    def test_unpruned_matches_pruned(self):
        """Test disabling pruning leaves the report unchanged"""
        model = make_model({"A": 5}, threshold=0.2, trace_mode="full")
        frame = random_frame(model, random.Random(8))
        assert run_cycle(frame, model) == run_cycle(frame, model.with_config(prune=False))

    def test_out_of_range_reading(self):
        """Test an out-of-range reading fails the cycle"""
        model = make_model({"A": 3})
        with pytest.raises(RangeViolationError):
            run_cycle(ReadingFrame(timestamp=0, values={1: 50.0, 2: 150.0, 3: 10.0}), model)


class TestTraceModes:
    """Test per-sequence report detail"""

    @pytest.fixture
    def frame_values(self):
        return {1: 100.0, 2: 95.0, 3: 90.0, 4: 85.0}

    def test_survivors_mode(self, frame_values):
        """Test the default mode lists survivors only"""
        model = make_model({"A": 4}, threshold=0.3)
        cluster = run_cycle(ReadingFrame(timestamp=0, values=frame_values), model).cluster("A")
        assert len(cluster.surviving_sequences) == cluster.survivors
        assert cluster.pruned_sequences == []

    def test_none_mode(self, frame_values):
        """Test counts are kept when no sequences are listed"""
        model = make_model({"A": 4}, threshold=0.3, trace_mode="none")
        cluster = run_cycle(ReadingFrame(timestamp=0, values=frame_values), model).cluster("A")
        assert cluster.survivors > 0
        assert cluster.surviving_sequences == []

    def test_full_mode(self, frame_values):
        """Test full mode lists pruned sequences with their pruning level"""
        model = make_model({"A": 4}, threshold=0.3, trace_mode=TraceMode.FULL)
        cluster = run_cycle(ReadingFrame(timestamp=0, values=frame_values), model).cluster("A")
        assert len(cluster.pruned_sequences) == cluster.pruned
        assert all(record.final_value <= 0.3 for record in cluster.pruned_sequences)
        assert all(all(value > 0.3 for value in record.levels) for record in cluster.surviving_sequences)


class TestOracleEquivalence:
    """Compare the engine with the brute-force reference"""

    def test_matches_oracle_quick(self):
        """Test engine and reference agree on small random networks"""
        rng = random.Random(2024)
        for n in range(2, 6):
            model = make_model({"A": n, "B": 2}, threshold=rng.uniform(0.05, 0.4))
            for timestamp in range(25):
                frame = random_frame(model, rng, timestamp)
                assert_matches_oracle(run_cycle(frame, model), oracle_run_cycle(frame, model))

    @pytest.mark.slow
    def test_matches_oracle_exhaustive(self):
        """Test engine and reference agree for n up to 7 on 200 random frames each"""
        rng = random.Random(42)
        for n in range(2, 8):
            model = make_model({"A": n}, threshold=rng.uniform(0.05, 0.4), trace_mode="full")
            for timestamp in range(200):
                frame = random_frame(model, rng, timestamp)
                report = run_cycle(frame, model)
                expected = oracle_run_cycle(frame, model)
                assert_matches_oracle(report, expected)
                pruned = {record.sequence for record in report.clusters[0].pruned_sequences}
                assert pruned == {record.sequence for record in expected.clusters[0].pruned_sequences}

    def test_oracle_capacity(self):
        """Test the reference refuses clusters above 8 sensors"""
        model = make_model({"A": 9})
        with pytest.raises(OracleCapacityError):
            oracle_run_cycle(uniform_frame(model, 0.0), model)


class TestGuard:
    """Test the combinatorial guard"""

    def test_guard_refuses_large_cluster(self):
        """Test a cluster above the guard is refused before any evaluation"""
        model = make_model({"A": 4, "B": 2}, max_sensors_guard=3)
        with pytest.raises(GuardViolationError, match="exceed the guard"):
            run_cycle(uniform_frame(model, 50.0), model)
        with pytest.raises(GuardViolationError):
            run_stream([uniform_frame(model, 50.0)], model)

    def test_guard_override(self):
        """Test disabling the guard evaluates the large cluster"""
        model = make_model({"A": 4}, max_sensors_guard=3, enforce_guard=False)
        check_guard(model)
        assert run_cycle(uniform_frame(model, 50.0), model).cluster("A").evaluated == 24


class TestRunStream:
    """Test streams of frames"""

    def test_empty_stream(self):
        """Test no frames give no outcomes"""
        model = make_model({"A": 3})
        assert run_stream([], model) == []

    def test_identical_frames(self):
        """Test repeated identical frames give identical reports"""
        model = make_model({"A": 4}, threshold=0.2)
        frames = [uniform_frame(model, 70.0, timestamp) for timestamp in range(4)]
        outcomes = run_stream(frames, model)
        assert [outcome.timestamp for outcome in outcomes] == [0, 1, 2, 3]
        assert all(outcome.clusters == outcomes[0].clusters for outcome in outcomes)

    def test_failing_cycle_becomes_record(self):
        """Test a bad cycle is reported and the stream carries on"""
        model = make_model({"A": 3})
        frames = [
            uniform_frame(model, 10.0, 0),
            ReadingFrame(timestamp=1, values={1: 10.0, 2: 120.0, 3: 10.0}),
            ReadingFrame(timestamp=2, values={1: 10.0, 2: 10.0}),
            uniform_frame(model, 10.0, 3),
        ]
        outcomes = run_stream(frames, model)
        assert isinstance(outcomes[0], AlarmReport)
        assert isinstance(outcomes[1], CycleFailure)
        assert outcomes[1].error_type == "RangeViolationError"
        assert outcomes[1].details["sensor"] == 2
        assert outcomes[2].error_type == "IncompleteFrameError"
        assert isinstance(outcomes[3], AlarmReport)

    def test_fail_fast(self):
        """Test fail_fast stops the stream at the first failure"""
        model = make_model({"A": 3}, fail_fast=True)
        frames = [uniform_frame(model, 10.0, 0), ReadingFrame(timestamp=1, values={1: -5.0, 2: 1.0, 3: 1.0})]
        with pytest.raises(RangeViolationError):
            run_stream(frames, model)

    def test_non_increasing_timestamp(self):
        """Test a frame that does not advance the timestamp fails its cycle"""
        model = make_model({"A": 3})
        frames = [uniform_frame(model, 10.0, 5), uniform_frame(model, 10.0, 5), uniform_frame(model, 10.0, 6)]
        outcomes = run_stream(frames, model)
        assert outcomes[1].error_type == "FrameOrderError"
        assert isinstance(outcomes[2], AlarmReport)

    @pytest.mark.integration
    def test_workers_do_not_change_reports(self):
        """Test evaluating with a process pool gives the same reports"""
        model = make_model({"A": 5, "B": 3}, threshold=0.2, trace_mode="full")
        rng = random.Random(9)
        frames = [random_frame(model, rng, timestamp) for timestamp in range(3)]
        serial = run_stream(frames, model)
        parallel = run_stream(frames, model.with_config(workers=4))
        assert parallel == serial
        assert run_cycle(frames[0], model.with_config(workers=2)) == serial[0]
