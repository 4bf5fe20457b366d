import numpy as np
import pytest

from pauliblock import (
    Axis,
    ConfigError,
    PotentialSchedule,
    PropagationSettings,
    SweepSpec,
    min_buffer_search,
    run_sweep,
    temperature_compensation_report,
)
from pauliblock.config import build_spec, parse_config_text
from pauliblock.pipeline import Engine


def split_spec(**overrides):
    base = dict(
        schedule=PotentialSchedule.splitting(1.0, h_f=20.0),
        axis=Axis.BUFFER_COUNT,
        axis_values=(0, 1, 2, 3),
        n_protected=2,
        settings=PropagationSettings(dt=2e-3),
        check_dt=False,
    )
    base.update(overrides)
    return SweepSpec(**base)


@pytest.fixture(scope="module")
def shared_engine():
    return Engine()


class TestSpecValidation:
    def test_axis_values_must_ascend(self):
        with pytest.raises(ConfigError):
            split_spec(axis_values=(3, 1, 2))

    def test_threshold_range(self):
        with pytest.raises(ConfigError):
            split_spec(threshold=1.0)

    def test_buffer_range_helper(self):
        assert split_spec(n_buffer=(0, 4)).buffer_range() == (0, 4)
        assert split_spec(n_buffer=3).buffer_range() == (3, 3)
        with pytest.raises(ConfigError):
            split_spec(n_buffer=(4, 1)).buffer_range()


class TestBufferSweep:
    def test_rows_and_monotonicity(self, shared_engine):
        spec = split_spec()
        result = run_sweep(spec, shared_engine)
        assert len(result.rows) == len(spec.axis_values)
        values = result.fidelities()
        assert all(0.0 <= v <= 1.0 + 1e-10 for v in values)
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_deterministic_bytes(self):
        spec = split_spec(axis_values=(0, 2))
        first = run_sweep(spec).to_csv(None)
        second = run_sweep(spec).to_csv(None)
        assert first == second
        header = first.splitlines()[0]
        assert header.startswith("axis,axis_value,task,shape,T")

    def test_row_count_matches_grid(self, shared_engine):
        spec = split_spec(axis_values=(0, 1, 2))
        result = run_sweep(spec, shared_engine)
        text = result.to_csv(None)
        assert len(text.splitlines()) == 1 + 3


class TestProcessTimeSweep:
    def test_basic(self, shared_engine):
        spec = split_spec(
            axis=Axis.PROCESS_TIME, axis_values=(0.5, 1.0), n_buffer=3
        )
        result = run_sweep(spec, shared_engine)
        assert [row.T for row in result.rows] == [0.5, 1.0]
        assert all(0.0 <= row.fidelity <= 1.0 for row in result.rows)

    def test_worker_pool_matches_serial(self):
        spec = split_spec(
            axis=Axis.PROCESS_TIME, axis_values=(0.5, 1.0), n_buffer=2
        )
        serial = run_sweep(spec).to_csv(None)
        parallel = run_sweep(
            split_spec(
                axis=Axis.PROCESS_TIME,
                axis_values=(0.5, 1.0),
                n_buffer=2,
                workers=2,
            )
        ).to_csv(None)
        assert serial == parallel

    def test_needs_single_buffer_value(self):
        spec = split_spec(axis=Axis.PROCESS_TIME, axis_values=(0.5, 1.0),
                          n_buffer=(0, 3))
        with pytest.raises(ConfigError):
            run_sweep(spec)


class TestTemperatureSweep:
    def test_rows(self, shared_engine):
        spec = split_spec(
            axis=Axis.TEMPERATURE, axis_values=(0.0, 0.3, 0.6), n_buffer=2
        )
        result = run_sweep(spec, shared_engine)
        assert len(result.rows) == 3
        assert [row.tau for row in result.rows] == [0.0, 0.3, 0.6]


class TestAnharmonicitySweep:
    def test_splitting_rejected(self):
        spec = split_spec(axis=Axis.ANHARMONICITY, axis_values=(0.5, 1.0))
        with pytest.raises(ConfigError):
            run_sweep(spec)


class TestGapSweep:
    def test_schema(self):
        spec = SweepSpec(
            schedule=PotentialSchedule.expansion(1.0, omega_f=0.01, lam=1.0),
            axis=Axis.PARTICLE_NUMBER_GAP,
            axis_values=(1, 2, 3),
        )
        result = run_sweep(spec)
        text = result.to_csv(None)
        lines = text.splitlines()
        assert lines[0] == "N,lambda,delta_E"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert first[0] == "1" and float(first[1]) == 1.0


class TestMinBufferSearch:
    def test_monotone_and_consistent(self, shared_engine):
        spec = split_spec(
            axis=Axis.PROCESS_TIME,
            axis_values=(0.25, 0.5, 1.0),
            n_buffer=(0, 4),
        )
        result = min_buffer_search(spec, engine=shared_engine)
        found = [nb for _, nb in result.rows]
        assert all(b is None or a is None or a >= b for a, b in zip(found, found[1:]))
        # Cross-check the last point against a direct buffer sweep.
        direct = run_sweep(
            split_spec(
                schedule=PotentialSchedule.splitting(1.0, h_f=20.0),
                axis_values=(0, 1, 2, 3, 4),
            ),
            shared_engine,
        )
        threshold = spec.threshold
        expected = next(
            (nb for nb, f in zip((0, 1, 2, 3, 4), direct.fidelities())
             if f >= threshold),
            None,
        )
        assert found[-1] == expected

    def test_saturation_reported(self, shared_engine):
        spec = split_spec(
            axis=Axis.PROCESS_TIME,
            axis_values=(0.25,),
            n_buffer=(0, 1),
            threshold=0.9999,
        )
        result = min_buffer_search(spec, engine=shared_engine)
        assert result.rows[0][1] is None
        text = result.to_csv(None)
        assert text.splitlines()[-1].endswith(",,true")


class TestCompensationReport:
    def test_statuses_and_interpolation(self, shared_engine):
        spec = split_spec(
            axis=Axis.TEMPERATURE,
            axis_values=(0.0, 0.3, 0.6, 0.9, 1.2),
            n_buffer=(1, 6),
            threshold=0.95,
        )
        report = temperature_compensation_report(spec, engine=shared_engine)
        byb = {r.n_buffer: r for r in report.rows}
        assert set(byb) == {1, 2, 3, 4, 5, 6}
        # Small buffers start below threshold; a large one never drops.
        assert byb[1].status == "below"
        assert byb[2].status == "below"
        assert byb[6].status == "above"
        crossed = [r for r in report.rows if r.status == "crossed"]
        assert [r.n_buffer for r in crossed] == [3, 4, 5]
        for row in crossed:
            assert 0.0 <= row.tau_cross <= 1.2
        # Spacing column is the difference of successive crossings.
        for prev, cur in zip(crossed, crossed[1:]):
            assert cur.spacing == pytest.approx(cur.tau_cross - prev.tau_cross)

    def test_interpolated_crossing_brackets_threshold(self, shared_engine):
        spec = split_spec(
            axis=Axis.TEMPERATURE,
            axis_values=(0.0, 0.3, 0.6, 0.9, 1.2),
            n_buffer=(2, 3),
        )
        report = temperature_compensation_report(spec, engine=shared_engine)
        for row in report.rows:
            if row.status != "crossed":
                continue
            taus = list(spec.axis_values)
            values, _ = shared_engine.thermal_fidelity_curve(
                spec.schedule, spec.n_protected, row.n_buffer, taus,
                spec.settings,
            )
            above = [t for t, v in zip(taus, values) if v >= spec.threshold]
            below = [t for t, v in zip(taus, values) if v < spec.threshold]
            assert max(above) <= row.tau_cross <= min(below)


class TestConfigParsing:
    GOOD = """
# buffer sweep of the splitting task
task = splitting
shape = sinusoidal
T = 1.0
h_f = 20
axis = buffer_count
axis_values = 0, 1, 2, 3
N_p = 2
dt = 0.002
threshold = 0.9
"""

    def test_round_trip(self):
        spec = build_spec(parse_config_text(self.GOOD))
        assert spec.axis is Axis.BUFFER_COUNT
        assert spec.axis_values == (0.0, 1.0, 2.0, 3.0)
        assert spec.schedule.h_f == 20.0
        assert spec.threshold == 0.9
        assert spec.settings.dt == 0.002

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            parse_config_text("task = splitting\nbogus = 1\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError):
            parse_config_text("task = splitting\ntask = expansion\n")

    def test_missing_task(self):
        with pytest.raises(ConfigError):
            build_spec(parse_config_text("axis = buffer_count\naxis_values = 1\nh_f = 2\nT = 1\n"))

    def test_buffer_range_syntax(self):
        raw = parse_config_text(
            "task = splitting\nT = 1\nh_f = 20\naxis = temperature\n"
            "axis_values = 0, 0.5\nN_b = 0..6\n"
        )
        assert build_spec(raw).n_buffer == (0, 6)

    def test_bad_number(self):
        with pytest.raises(ConfigError):
            build_spec(parse_config_text(
                "task = splitting\nT = soon\nh_f = 20\n"
                "axis = buffer_count\naxis_values = 0\n"
            ))
