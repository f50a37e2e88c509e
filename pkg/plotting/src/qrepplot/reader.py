"""Reader for the sweep-CSV contract.

One header line, then one row per sweep value. Everything is validated
against the contract and nothing else; the producing package is never
imported.
"""

import csv
import io
from dataclasses import dataclass

HEADER = (
    "experiment,sweep_param,sweep_value,fidelity_mean,fidelity_stderr,"
    "yield_mean,yield_stderr,trials,seed,mode"
)

_FIELD_COUNT = 10
_MODES = ("exact", "sampled")


@dataclass(frozen=True)
class SweepRow:
    experiment: str
    sweep_param: str
    sweep_value: float
    fidelity_mean: float
    fidelity_stderr: float
    yield_mean: float
    yield_stderr: float
    trials: int
    seed: int
    mode: str


def _float_field(raw: str, name: str, line: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"line {line}: {name} is not a number: {raw!r}") from None


def _int_field(raw: str, name: str, line: int) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"line {line}: {name} is not an integer: {raw!r}") from None


def parse_rows(text: str) -> list[SweepRow]:
    lines = text.splitlines()
    if not lines or lines[0] != HEADER:
        raise ValueError("header does not match the sweep-CSV contract")
    body = [ln for ln in lines[1:] if ln]
    if not body:
        raise ValueError("CSV carries no data rows")
    rows = []
    for i, record in enumerate(csv.reader(io.StringIO("\n".join(body))), start=2):
        if len(record) != _FIELD_COUNT:
            raise ValueError(f"line {i}: expected {_FIELD_COUNT} fields, got {len(record)}")
        experiment, sweep_param, *rest, mode = record
        sweep_value = _float_field(rest[0], "sweep_value", i)
        f_mean = _float_field(rest[1], "fidelity_mean", i)
        f_err = _float_field(rest[2], "fidelity_stderr", i)
        y_mean = _float_field(rest[3], "yield_mean", i)
        y_err = _float_field(rest[4], "yield_stderr", i)
        trials = _int_field(rest[5], "trials", i)
        seed = _int_field(rest[6], "seed", i)
        if not experiment:
            raise ValueError(f"line {i}: empty experiment id")
        for name, v in (("fidelity_mean", f_mean), ("yield_mean", y_mean)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"line {i}: {name} outside [0, 1]: {v}")
        for name, v in (("fidelity_stderr", f_err), ("yield_stderr", y_err)):
            if v < 0.0:
                raise ValueError(f"line {i}: {name} is negative: {v}")
        if trials < 1:
            raise ValueError(f"line {i}: trials must be positive: {trials}")
        if mode not in _MODES:
            raise ValueError(f"line {i}: unknown mode {mode!r}")
        rows.append(
            SweepRow(experiment, sweep_param, sweep_value, f_mean, f_err,
                     y_mean, y_err, trials, seed, mode)
        )
    ids = {r.experiment for r in rows}
    if len(ids) > 1:
        raise ValueError(f"CSV mixes experiment ids: {sorted(ids)}")
    return rows


def read_rows(path: str) -> list[SweepRow]:
    with open(path, newline="") as fh:
        return parse_rows(fh.read())
