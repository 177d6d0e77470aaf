from __future__ import annotations

import csv
import io
import itertools
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..config.settings import Settings
from ..physics.dense_coding import MISMATCH_FAIL, MISMATCH_WARN, capacity_grid, validity_arrays
from ..physics.swap import evolve_arrays
from ..physics.thermal import log_partition_arrays
from ..schemas.sweep import PARAMETER_NAMES, Quantity, SweepConfig, SweepResult
from ..utilities.errors import NumericalValidationError, PreconditionError, SpinCodingError
from ..utilities.formatting import format_bool, format_float

OK = "OK"

Columns = Dict[str, np.ndarray]


def _preconditions(quantity: Quantity, cols: Columns) -> np.ndarray:
    """Error code per point, "" where the point is valid."""
    status = np.full(cols["J"].shape, "", dtype=object)
    status[~(cols["gamma_e"] > 0.0)] = PreconditionError.code
    if quantity is not Quantity.WITNESS:
        status[~(cols["T"] > 0.0)] = PreconditionError.code
    if quantity is Quantity.VALIDITY:
        status[cols["Bz"] != 0.0] = PreconditionError.code
    return status


def _evaluate(quantity: Quantity, cols: Columns) -> Tuple[np.ndarray, np.ndarray]:
    """Quantity values and status codes for points that passed the preconditions."""
    zeeman = cols["gamma_e"] * cols["Bz"]
    status = np.full(cols["J"].shape, OK, dtype=object)

    if quantity in (Quantity.CHI, Quantity.S_RHO):
        grid = capacity_grid(cols["J"], cols["beta0"], zeeman, cols["dBzeff"], cols["T"])
        mismatch = np.abs(grid["chi"] - grid["chi_closed_form"])
        status[mismatch > MISMATCH_FAIL] = NumericalValidationError.code
        near = int(np.sum((mismatch > MISMATCH_WARN) & (mismatch <= MISMATCH_FAIL)))
        if near:
            logging.getLogger("spincoding").warning("%s points have a closed-form capacity mismatch above %.0e", near, MISMATCH_WARN)
        return grid["chi"] if quantity is Quantity.CHI else grid["S_rho"], status

    if quantity is Quantity.VALIDITY:
        flags = validity_arrays(cols["J"], cols["beta0"], cols["dBzeff"], cols["T"])
        return flags.astype(np.float64), status

    if quantity is Quantity.Z:
        log_z = log_partition_arrays(cols["J"], cols["beta0"], zeeman, cols["dBzeff"], cols["T"])
        with np.errstate(over="ignore"):
            return np.exp(log_z), status

    half1 = cols["theta1"] / 2.0
    half2 = cols["theta2"] / 2.0
    out = evolve_arrays(
        cols["J"],
        cols["beta0"],
        zeeman,
        cols["dBzeff"],
        np.cos(half1),
        np.sin(half1) * np.exp(1j * cols["phi1"]),
        np.cos(half2),
        np.sin(half2) * np.exp(1j * cols["phi2"]),
        cols["t"],
    )
    return np.abs(out["a"] * out["d"] - out["b"] * out["c"]) ** 2, status


def evaluate_chunk(quantity: Quantity, cols: Columns) -> Tuple[np.ndarray, np.ndarray]:
    """Evaluate one chunk of grid points; failures stay confined to their own rows."""
    logger = logging.getLogger("spincoding")
    count = cols["J"].shape[0]
    values = np.full(count, np.nan)
    status = _preconditions(quantity, cols)
    valid = status == ""
    if (~valid).any():
        logger.debug("%s sweep points fail a precondition", int((~valid).sum()))
    if not valid.any():
        return values, status

    subset = {name: col[valid] for name, col in cols.items()}
    try:
        sub_values, sub_status = _evaluate(quantity, subset)
    except SpinCodingError:
        sub_values = np.full(int(valid.sum()), np.nan)
        sub_status = np.empty(int(valid.sum()), dtype=object)
        for i in range(sub_values.shape[0]):
            point = {name: col[i : i + 1] for name, col in subset.items()}
            try:
                value, code = _evaluate(quantity, point)
                sub_values[i], sub_status[i] = value[0], code[0]
            except SpinCodingError as exc:
                sub_status[i] = exc.code

    sub_values = np.where(sub_status == OK, sub_values, np.nan)
    values[valid] = sub_values
    status[valid] = sub_status
    return values, status


class SweepService:
    def __init__(self, settings: Settings) -> None:
        self._settings = settings
        self._logger = logging.getLogger("spincoding")

    def build_grid(self, cfg: SweepConfig) -> Tuple[np.ndarray, Columns]:
        """Grid coordinates (rows x axes) and full parameter columns, axis 1 outer."""
        axis_values = [axis.values() for axis in cfg.axes]
        grid = np.array(list(itertools.product(*axis_values)), dtype=np.float64).reshape(-1, len(cfg.axes))
        size = grid.shape[0]
        cols: Columns = {name: np.full(size, cfg.parameter(name)) for name in PARAMETER_NAMES}
        for index, axis in enumerate(cfg.axes):
            cols[axis.name] = grid[:, index].copy()
        return grid, cols

    def run(self, cfg: SweepConfig, workers: Optional[int] = None) -> SweepResult:
        workers = self._settings.sweep_workers if workers is None else workers
        chunk = self._settings.sweep_chunk_size
        grid, cols = self.build_grid(cfg)
        size = grid.shape[0]
        bounds = [(start, min(start + chunk, size)) for start in range(0, size, chunk)]
        self._logger.info(
            "Sweeping %s over %s points in %s chunks (workers=%s)", cfg.quantity.value, size, len(bounds), workers
        )

        # chunk boundaries never depend on the worker count
        pieces = Parallel(n_jobs=workers)(
            delayed(evaluate_chunk)(cfg.quantity, {name: col[lo:hi] for name, col in cols.items()})
            for lo, hi in bounds
        )
        values = np.concatenate([piece[0] for piece in pieces]) if pieces else np.empty(0)
        status = tuple(str(code) for piece in pieces for code in piece[1])

        failed = sum(1 for code in status if code != OK)
        if failed:
            self._logger.warning("%s of %s sweep points carry an error code", failed, size)
        return SweepResult(
            quantity=cfg.quantity,
            axis_names=tuple(axis.name for axis in cfg.axes),
            grid=grid,
            values=values,
            status=status,
        )

    def rows(self, result: SweepResult, precision: int) -> List[List[str]]:
        rows = []
        for coords, value, code in zip(result.grid, result.values, result.status):
            cells = [format_float(x, precision) for x in coords]
            if code != OK:
                cells.append("")
            elif result.quantity is Quantity.VALIDITY:
                cells.append(format_bool(bool(value)))
            else:
                cells.append(format_float(value, precision))
            cells.append(code)
            rows.append(cells)
        return rows

    def to_csv(self, result: SweepResult, precision: int) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(result.header)
        writer.writerows(self.rows(result, precision))
        return buffer.getvalue()

    def run_sweep(
        self, cfg: SweepConfig, workers: Optional[int] = None, precision: Optional[int] = None
    ) -> Tuple[SweepResult, str]:
        """Run the sweep and return it with its CSV text, also written to ``cfg.output_path`` if set."""
        if precision is None:
            precision = cfg.precision if "precision" in cfg.model_fields_set else self._settings.sweep_precision
        result = self.run(cfg, workers)
        text = self.to_csv(result, precision)
        if cfg.output_path is not None:
            cfg.output_path.parent.mkdir(parents=True, exist_ok=True)
            with cfg.output_path.open("w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            self._logger.info("Wrote %s rows to %s", len(result), cfg.output_path)
        return result, text
