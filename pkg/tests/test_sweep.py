import hashlib
import math

import numpy as np
import pytest

from spincoding.physics.dense_coding import capacity
from spincoding.schemas.params import ModelParams
from spincoding.schemas.sweep import Quantity, Spacing, SweepAxis, SweepConfig
from spincoding.services.sweep_service import SweepService, evaluate_chunk
from spincoding.utilities.errors import PreconditionError


def _config(quantity, axes, **fixed):
    return SweepConfig(quantity=quantity, axes=[SweepAxis(**axis) for axis in axes], fixed=fixed)


def _fig1(count):
    return _config(
        Quantity.CHI,
        [
            {"name": "J", "start": -2.0, "stop": 2.0, "count": count},
            {"name": "dBzeff", "start": -2.0, "stop": 2.0, "count": count},
        ],
        T=0.05,
        beta0=0.01,
    )


class TestAxes:
    def test_linear_and_log_spacing(self):
        assert np.allclose(SweepAxis(name="T", start=0.1, stop=0.5, count=5).values(), [0.1, 0.2, 0.3, 0.4, 0.5])
        log = SweepAxis(name="T", start=0.01, stop=1.0, count=3, spacing=Spacing.LOG).values()
        assert np.allclose(log, [0.01, 0.1, 1.0])

    def test_single_point_axis(self):
        assert SweepAxis(name="J", start=0.5, stop=0.5, count=1).values().tolist() == [0.5]

    @pytest.mark.parametrize(
        "axis",
        [
            {"name": "X", "start": 0.0, "stop": 1.0, "count": 3},
            {"name": "J", "start": 1.0, "stop": 0.0, "count": 3},
            {"name": "J", "start": 0.0, "stop": 1.0, "count": 0},
            {"name": "J", "start": 0.0, "stop": 1.0, "count": 1},
            {"name": "T", "start": 0.0, "stop": 1.0, "count": 3, "spacing": "log"},
            {"name": "J", "start": 0.0, "stop": math.inf, "count": 3},
        ],
    )
    def test_invalid_axes(self, axis):
        with pytest.raises(ValueError):
            SweepAxis(**axis)

    def test_parameters_cannot_be_fixed_and_swept(self):
        with pytest.raises(ValueError):
            _config(Quantity.CHI, [{"name": "J", "start": 0.0, "stop": 1.0, "count": 2}], J=1.0)
        with pytest.raises(ValueError):
            _config(
                Quantity.CHI,
                [
                    {"name": "J", "start": 0.0, "stop": 1.0, "count": 2},
                    {"name": "J", "start": 2.0, "stop": 3.0, "count": 2},
                ],
            )


class TestGrid:
    def test_first_axis_is_outer_loop(self, settings):
        cfg = _config(
            Quantity.CHI,
            [
                {"name": "J", "start": -1.0, "stop": 1.0, "count": 2},
                {"name": "T", "start": 0.1, "stop": 0.3, "count": 3},
            ],
        )
        grid, cols = SweepService(settings).build_grid(cfg)
        assert np.allclose(grid, [[-1.0, 0.1], [-1.0, 0.2], [-1.0, 0.3], [1.0, 0.1], [1.0, 0.2], [1.0, 0.3]])
        assert np.all(cols["gamma_e"] == 1.0)
        assert np.all(cols["beta0"] == 0.0)

    def test_row_count_is_product_of_axis_counts(self, settings):
        result = SweepService(settings).run(_fig1(9))
        assert len(result) == 81
        assert result.header == ("J", "dBzeff", "chi", "status")


class TestRunSweep:
    def test_single_point_equals_direct_call(self, settings):
        cfg = _config(Quantity.CHI, [{"name": "T", "start": 0.05, "stop": 0.05, "count": 1}], J=-1.0, beta0=0.8, dBzeff=0.5)
        result, text = SweepService(settings).run_sweep(cfg)
        direct = capacity(ModelParams.from_effective(J=-1.0, beta0=0.8, dBzeff=0.5, T=0.05)).chi
        assert result.values[0] == pytest.approx(direct, abs=1e-12)
        lines = text.split("\n")
        assert len(lines) == 3 and lines[-1] == ""
        assert lines[0] == "T,chi,status"
        assert lines[1].endswith(",OK")

    def test_mirror_symmetry_in_every_coupling_row(self, settings):
        result = SweepService(settings).run(_fig1(21))
        surface = result.values.reshape(21, 21)
        assert np.allclose(surface, surface[:, ::-1], atol=1e-13, rtol=0)

    def test_bytes_do_not_depend_on_worker_count(self, small_chunks):
        service = SweepService(small_chunks)
        digests = {
            hashlib.sha256(service.run_sweep(_fig1(11), workers=workers)[1].encode()).hexdigest()
            for workers in (1, 1, 2)
        }
        assert len(digests) == 1

    def test_chunking_does_not_change_values(self, settings, small_chunks):
        serial = SweepService(settings).run(_fig1(11))
        chunked = SweepService(small_chunks).run(_fig1(11))
        assert np.allclose(serial.values, chunked.values, atol=1e-14, rtol=0)

    def test_invalid_points_are_isolated(self, settings):
        cfg = _config(Quantity.CHI, [{"name": "T", "start": -1.0, "stop": 1.0, "count": 3}])
        result, text = SweepService(settings).run_sweep(cfg, precision=6)
        assert result.status == (PreconditionError.code, PreconditionError.code, "OK")
        assert text.split("\n")[1:3] == ["-1,,PRECONDITION_FAILED", "0,,PRECONDITION_FAILED"]
        assert math.isnan(result.values[0])
        assert result.values[2] == pytest.approx(capacity(ModelParams(J=1.0, T=1.0)).chi, abs=1e-12)

    def test_validity_needs_zero_mean_field(self, settings):
        cfg = _config(Quantity.VALIDITY, [{"name": "T", "start": 0.05, "stop": 5.0, "count": 2}], Bz=0.5)
        result = SweepService(settings).run(cfg)
        assert set(result.status) == {PreconditionError.code}

    def test_validity_prints_booleans(self, settings):
        cfg = _config(Quantity.VALIDITY, [{"name": "T", "start": 0.05, "stop": 5.0, "count": 2}], J=-1.0, beta0=0.8)
        _, text = SweepService(settings).run_sweep(cfg)
        assert text.split("\n")[1:3] == ["0.05,true,OK", "5,false,OK"]

    def test_partition_function_overflow_prints_inf(self, settings):
        cfg = _config(Quantity.Z, [{"name": "T", "start": 1e-4, "stop": 1.0, "count": 2}], J=-1.0, beta0=0.8)
        _, text = SweepService(settings).run_sweep(cfg)
        assert text.split("\n")[1] == "0.0001,inf,OK"

    def test_witness_sweep_over_time(self, settings):
        cfg = _config(
            Quantity.WITNESS,
            [{"name": "t", "start": 0.0, "stop": math.pi, "count": 3}],
            beta0=math.sqrt(8.0),
            theta2=math.pi,
        )
        result = SweepService(settings).run(cfg)
        assert result.status == ("OK", "OK", "OK")
        assert result.values[0] < 1e-30
        assert result.values[1] > 1e-3
        assert result.values[2] < 1e-20

    def test_output_file_is_written(self, settings, tmp_path):
        cfg = _fig1(3).model_copy(update={"output_path": tmp_path / "out" / "fig1.csv"})
        _, text = SweepService(settings).run_sweep(cfg)
        assert (tmp_path / "out" / "fig1.csv").read_bytes() == text.encode("utf-8")
        assert "\r" not in text
        assert all(not line.endswith(",") for line in text.splitlines())

    def test_precision_from_config(self, settings):
        cfg = SweepConfig(quantity=Quantity.CHI, axes=[SweepAxis(name="T", start=0.3, stop=0.3, count=1)], precision=3)
        _, text = SweepService(settings).run_sweep(cfg)
        value = text.split("\n")[1].split(",")[1]
        assert len(value.replace(".", "").lstrip("0")) <= 3


def test_evaluate_chunk_flags_bad_points():
    cols = {
        name: np.array(values, dtype=np.float64)
        for name, values in {
            "J": [1.0, 1.0],
            "beta0": [0.0, 0.0],
            "dBzeff": [0.0, 0.0],
            "Bz": [0.0, 0.0],
            "T": [0.1, 0.0],
            "gamma_e": [1.0, -1.0],
            "t": [0.0, 0.0],
            "theta1": [0.0, 0.0],
            "phi1": [0.0, 0.0],
            "theta2": [0.0, 0.0],
            "phi2": [0.0, 0.0],
        }.items()
    }
    values, status = evaluate_chunk(Quantity.S_RHO, cols)
    assert status.tolist() == ["OK", PreconditionError.code]
    assert values[0] > 0.0 and math.isnan(values[1])
