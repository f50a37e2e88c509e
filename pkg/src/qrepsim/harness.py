"""Experiment harness: config files in, result tables out.

Configs are flat INI text.  Unknown sections or keys are hard errors so a
misspelled sweep fails loudly instead of silently running defaults.  Exact
mode reports stderr 0.0 by definition; sampled mode reports sample stderr.
"""
from __future__ import annotations

import configparser
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .noise import ChannelModel, NoiseParams, dephased_bell, distribute_pair, werner
from .protocols import purify_multi, purify_multi_sampled
from .repeater import (
    RepeaterConfig,
    _link_fidelity,
    run_paper_circuit,
    run_repeater,
)
from .rng import spawn_rng
from .states import fidelity
from .gates import bell_state

CSV_HEADER = "experiment,sweep_param,sweep_value,fidelity_mean,fidelity_stderr,yield_mean,yield_stderr,trials,seed,mode"

EXPERIMENTS = ("channel", "purify", "swap", "repeater", "paper-circuit")

# legal sweep parameter names per experiment
_SWEEPABLE = {
    "channel": ("hops",),
    "purify": ("pairs",),
    "swap": ("segments",),
    "repeater": ("segments", "pairs_per_purification", "hops_per_segment"),
    "paper-circuit": ("hops",),
}

_DEFAULT_SWEEPS = {
    "channel": ("hops", (0, 1, 2, 3, 4, 5, 6)),
    "purify": ("pairs", (2, 3, 4, 5)),
    "swap": ("segments", (1, 2, 4, 8)),
    "repeater": ("segments", (2, 4)),
    "paper-circuit": ("hops", (1,)),
}


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    sweep_param: str
    sweep_values: tuple
    noise: NoiseParams = field(default_factory=NoiseParams)
    channel: ChannelModel = field(default_factory=ChannelModel)
    trials: int = 1000
    seed: int = 0
    mode: str = "exact"
    # purify / swap inputs
    initial_fidelity: float | None = None
    input_kind: str = "werner"
    variant: str = "deutsch"
    # repeater knobs
    segments: int = 2
    pairs_per_purification: int = 2
    hops_per_segment: int | None = None
    purify_after_swap: bool = False
    out_path: str | None = None
    out_format: str = "csv"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        legal = _SWEEPABLE[self.experiment]
        if self.sweep_param not in legal:
            raise ValueError(
                f"experiment {self.experiment!r} cannot sweep {self.sweep_param!r}; legal: {legal}"
            )
        if not self.sweep_values:
            raise ValueError("sweep_values must be nonempty")
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.input_kind not in ("werner", "dephased"):
            raise ValueError(f"input_kind must be 'werner' or 'dephased', got {self.input_kind!r}")
        if self.out_format not in ("csv", "json"):
            raise ValueError(f"format must be 'csv' or 'json', got {self.out_format!r}")
        if self.initial_fidelity is not None and not 0.0 <= self.initial_fidelity <= 1.0:
            raise ValueError("initial_fidelity outside [0, 1]")
        self._validate_sweep_values()

    def _validate_sweep_values(self):
        name = self.sweep_param
        for v in self.sweep_values:
            if name in ("hops", "hops_per_segment"):
                if int(v) != v or v < 0:
                    raise ValueError(f"sweep value {v!r} invalid for {name}: need integer >= 0")
            elif name == "pairs":
                if int(v) != v or v < 2:
                    raise ValueError(f"sweep value {v!r} invalid for pairs: need integer >= 2")
            elif name in ("segments", "pairs_per_purification"):
                if int(v) != v or v < 1:
                    raise ValueError(f"sweep value {v!r} invalid for {name}: need integer >= 1")


@dataclass(frozen=True)
class ResultRow:
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


def _fmt(x) -> str:
    """10 significant digits; integers come out without a decimal point."""
    return f"{x:.10g}"


def _binom_stderr(p_hat: float, n: int) -> float:
    return math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n)


def _sample_stats(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    n = arr.size
    mean = float(arr.mean()) if n else 0.0
    if n < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(n))


# --- experiment runners, one per subcommand ---


def _channel_rows(spec: ExperimentSpec) -> list[ResultRow]:
    rows = []
    for v in spec.sweep_values:
        ch = replace(spec.channel, hops=int(v))
        state = distribute_pair(ch, spec.noise)
        f = fidelity(state, bell_state())
        if spec.mode == "exact":
            rows.append(_row(spec, v, f, 0.0, ch.p_gen, 0.0))
        else:
            rng = spawn_rng(spec.seed, 1, int(v))
            hits = rng.random(spec.trials) < ch.p_gen
            y = float(hits.mean())
            # transit itself is deterministic, only generation is sampled
            rows.append(_row(spec, v, f, 0.0, y, _binom_stderr(y, spec.trials)))
    return rows


def _purify_input(spec: ExperimentSpec):
    f0 = 0.85 if spec.initial_fidelity is None else spec.initial_fidelity
    if spec.input_kind == "dephased":
        return dephased_bell(f0)
    return werner(f0)


def _purify_rows(spec: ExperimentSpec) -> list[ResultRow]:
    state = _purify_input(spec)
    rows = []
    for v in spec.sweep_values:
        n_pairs = int(v)
        if spec.mode == "exact":
            res = purify_multi([state] * n_pairs, spec.variant, spec.noise)
            rows.append(_row(spec, v, res.fidelity_after, 0.0, res.success_probability, 0.0))
            continue
        rng = spawn_rng(spec.seed, 1, n_pairs)
        catalog: dict = {}
        fids = []
        for _ in range(spec.trials):
            ok, kept = purify_multi_sampled([state] * n_pairs, spec.variant, spec.noise, rng, catalog)
            if ok:
                fids.append(_link_fidelity(kept))
        y = len(fids) / spec.trials
        f_mean, f_err = _sample_stats(fids)
        rows.append(_row(spec, v, f_mean, f_err, y, _binom_stderr(y, spec.trials)))
    return rows


def _repeater_config(spec: ExperimentSpec, **overrides) -> RepeaterConfig:
    base = dict(
        segments=spec.segments,
        hops_per_segment=spec.hops_per_segment,
        pairs_per_purification=spec.pairs_per_purification,
        purification_variant=spec.variant,
        noise=spec.noise,
        channel=spec.channel,
        trials=spec.trials,
        seed=spec.seed,
        mode=spec.mode,
        initial_link_fidelity=spec.initial_fidelity,
        purify_after_swap=spec.purify_after_swap,
    )
    base.update(overrides)
    return RepeaterConfig(**base)


def _swap_rows(spec: ExperimentSpec) -> list[ResultRow]:
    # a swap chain is the repeater with purification turned off
    rows = []
    for v in spec.sweep_values:
        cfg = _repeater_config(spec, segments=int(v), pairs_per_purification=1)
        rep = run_repeater(cfg)
        rows.append(_row(spec, v, rep.final_fidelity, rep.fidelity_stderr, rep.yield_fraction, rep.yield_stderr))
    return rows


def _repeater_rows(spec: ExperimentSpec) -> list[ResultRow]:
    rows = []
    for v in spec.sweep_values:
        cfg = _repeater_config(spec, **{spec.sweep_param: int(v)})
        rep = run_repeater(cfg)
        rows.append(_row(spec, v, rep.final_fidelity, rep.fidelity_stderr, rep.yield_fraction, rep.yield_stderr))
    return rows


def _paper_circuit_rows(spec: ExperimentSpec) -> list[ResultRow]:
    rows = []
    for v in spec.sweep_values:
        ch = replace(spec.channel, hops=int(v))
        res = run_paper_circuit(spec.noise, ch, spec.trials, spec.seed, spec.mode)
        rows.append(_row(spec, v, res.fidelity, res.fidelity_stderr, res.yield_fraction, res.yield_stderr))
    return rows


def _row(spec: ExperimentSpec, value, f, f_err, y, y_err) -> ResultRow:
    return ResultRow(
        experiment=spec.experiment,
        sweep_param=spec.sweep_param,
        sweep_value=value,
        fidelity_mean=f,
        fidelity_stderr=f_err,
        yield_mean=y,
        yield_stderr=y_err,
        trials=spec.trials,
        seed=spec.seed,
        mode=spec.mode,
    )


_RUNNERS = {
    "channel": _channel_rows,
    "purify": _purify_rows,
    "swap": _swap_rows,
    "repeater": _repeater_rows,
    "paper-circuit": _paper_circuit_rows,
}


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """One ResultRow per sweep value, ordered as the sweep lists them."""
    return _RUNNERS[spec.experiment](spec)


# --- emission ---


def render_rows_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.experiment,
                    r.sweep_param,
                    _fmt(r.sweep_value),
                    _fmt(r.fidelity_mean),
                    _fmt(r.fidelity_stderr),
                    _fmt(r.yield_mean),
                    _fmt(r.yield_stderr),
                    str(r.trials),
                    str(r.seed),
                    r.mode,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def render_rows_json(rows) -> str:
    def num(x):
        return float(_fmt(x))

    payload = [
        {
            "experiment": r.experiment,
            "sweep_param": r.sweep_param,
            "sweep_value": num(r.sweep_value),
            "fidelity_mean": num(r.fidelity_mean),
            "fidelity_stderr": num(r.fidelity_stderr),
            "yield_mean": num(r.yield_mean),
            "yield_stderr": num(r.yield_stderr),
            "trials": r.trials,
            "seed": r.seed,
            "mode": r.mode,
        }
        for r in rows
    ]
    return json.dumps(payload, indent=2) + "\n"


def emit(rows, out_format: str, path: str) -> None:
    """Write rows to `path`; refuses empty row lists before touching disk."""
    rows = list(rows)
    if not rows:
        raise ValueError("no result rows to emit")
    if out_format == "csv":
        text = render_rows_csv(rows)
    elif out_format == "json":
        text = render_rows_json(rows)
    else:
        raise ValueError(f"unknown format {out_format!r}")
    with open(path, "w", newline="") as fh:
        fh.write(text)


def parse_rows_csv(text: str) -> list[ResultRow]:
    """Inverse of render_rows_csv; validates the header byte for byte."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("malformed results CSV: bad header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 10:
            raise ValueError(f"malformed results CSV row: {ln!r}")
        rows.append(
            ResultRow(
                experiment=parts[0],
                sweep_param=parts[1],
                sweep_value=float(parts[2]),
                fidelity_mean=float(parts[3]),
                fidelity_stderr=float(parts[4]),
                yield_mean=float(parts[5]),
                yield_stderr=float(parts[6]),
                trials=int(parts[7]),
                seed=int(parts[8]),
                mode=parts[9],
            )
        )
    return rows


# --- config files ---

_SECTION_KEYS = {
    "experiment": {"name", "sweep", "values", "trials", "seed", "mode"},
    "noise": {"p_gate1", "p_gate2", "p_hop_dephase", "p_meas"},
    "channel": {"length_km", "attenuation_length_km", "hops"},
    "purify": {"initial_fidelity", "input_kind", "variant"},
    "swap": {"initial_fidelity"},
    "repeater": {
        "segments",
        "pairs_per_purification",
        "hops_per_segment",
        "purify_after_swap",
        "initial_link_fidelity",
        "variant",
    },
}


def _parse_values(raw: str) -> tuple:
    vals = []
    for tok in raw.replace(",", " ").split():
        num = float(tok)
        vals.append(int(num) if num == int(num) else num)
    if not vals:
        raise ValueError("values list is empty")
    return tuple(vals)


def load_spec(path: str, overrides: dict | None = None) -> ExperimentSpec:
    """Parse an INI config into an ExperimentSpec.

    `overrides` wins over file contents (CLI flags).  Unknown sections or
    keys raise ValueError naming the offender.
    """
    if not os.path.exists(path):
        raise ValueError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ValueError(f"config parse error in {path}: {exc}") from exc

    for section in cp.sections():
        if section not in _SECTION_KEYS:
            raise ValueError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _SECTION_KEYS[section]:
                raise ValueError(f"unknown key {key!r} in section [{section}]")

    def get(section, key, default=None):
        if cp.has_option(section, key):
            return cp.get(section, key)
        return default

    name = get("experiment", "name")
    if name is None:
        raise ValueError("config is missing experiment.name")
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}")

    default_sweep, default_values = _DEFAULT_SWEEPS[name]
    sweep = get("experiment", "sweep", default_sweep)
    raw_values = get("experiment", "values")
    values = _parse_values(raw_values) if raw_values is not None else default_values

    noise = NoiseParams(
        p_gate1=float(get("noise", "p_gate1", 0.0)),
        p_gate2=float(get("noise", "p_gate2", 0.0)),
        p_hop_dephase=float(get("noise", "p_hop_dephase", 0.0)),
        p_meas=float(get("noise", "p_meas", 0.0)),
    )
    channel = ChannelModel(
        length_km=float(get("channel", "length_km", 0.0)),
        attenuation_length_km=float(get("channel", "attenuation_length_km", 20.0)),
        hops=int(get("channel", "hops", 1)),
    )

    init_f = get("purify", "initial_fidelity")
    if init_f is None:
        init_f = get("swap", "initial_fidelity")
    if init_f is None:
        init_f = get("repeater", "initial_link_fidelity")
    hps = get("repeater", "hops_per_segment")

    kwargs = dict(
        experiment=name,
        sweep_param=sweep,
        sweep_values=values,
        noise=noise,
        channel=channel,
        trials=int(get("experiment", "trials", 1000)),
        seed=int(get("experiment", "seed", 0)),
        mode=get("experiment", "mode", "exact"),
        initial_fidelity=None if init_f is None else float(init_f),
        input_kind=get("purify", "input_kind", "werner"),
        variant=get("purify", "variant", get("repeater", "variant", "deutsch")),
        segments=int(get("repeater", "segments", 2)),
        pairs_per_purification=int(get("repeater", "pairs_per_purification", 2)),
        hops_per_segment=None if hps is None else int(hps),
        purify_after_swap=str(get("repeater", "purify_after_swap", "false")).lower()
        in ("1", "true", "yes", "on"),
    )
    if overrides:
        kwargs.update(overrides)
    return ExperimentSpec(**kwargs)


def default_spec(experiment: str, overrides: dict | None = None) -> ExperimentSpec:
    """Spec used when no config file is given."""
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}")
    sweep, values = _DEFAULT_SWEEPS[experiment]
    kwargs = dict(experiment=experiment, sweep_param=sweep, sweep_values=values)
    if overrides:
        kwargs.update(overrides)
    return ExperimentSpec(**kwargs)
