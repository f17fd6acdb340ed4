"""
Monte Carlo experiment driver.

Every trial draws one channel realization that is shared by all algorithms
and grid points, so algorithm comparisons are paired. Random streams are
derived from the master seed and the trial index only, which makes results
independent of the number of worker threads.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from .channel import dft_codebook, dominant_beam_sets, draw_channel_matrix, to_beamspace
from .exceptions import UnknownPresetError
from .models import (
    CSV_COLUMNS,
    DEFAULT_ALGORITHMS,
    SchedulerId,
    SweepResult,
    SweepRow,
    SweepSpec,
    SystemConfig,
)
from .quantize import aqnm_params
from .schedulers import run_scheduler
from .utils import array_digest, derive_rng

# Stream purposes under each trial key
CHANNEL_STREAM = 0
SCHEDULER_STREAM = 1

FULL_SCALE_CONFIG = SystemConfig(
    num_antennas=128,
    num_users=200,
    num_scheduled=10,
    num_paths=4,
    num_stored_beams=8,
    ortho_threshold=0.5,
    beam_overlap_limit=3,
)

DESK_CONFIG = SystemConfig(
    num_antennas=64,
    num_users=100,
    num_scheduled=8,
    num_paths=4,
    num_stored_beams=8,
    ortho_threshold=0.5,
    beam_overlap_limit=3,
)

POWER_SWEEP_DB = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
BITS_SWEEP = tuple(range(1, 10))

# N_OL grows with resolution: the unique-beam condition matters less
BITS_SWEEP_N_OL = {1: 2, 2: 2, 3: 2, 4: 3, 5: 3, 6: 4, 7: 4, 8: 5, 9: 5}

# Candidate-set experiment: N_OL stays at 3 and CSS runs a tighter cosine
# threshold than SUS
SET_SIZE_ALGORITHM_PARAMS = {"css": {"ortho_threshold": 0.25}}

PRESETS = {
    "fig2": dict(
        rho_db_grid=POWER_SWEEP_DB, bits_grid=(2,), trials=500, base_config=FULL_SCALE_CONFIG
    ),
    "fig3": dict(
        rho_db_grid=(5.0,),
        bits_grid=BITS_SWEEP,
        trials=500,
        base_config=FULL_SCALE_CONFIG,
        n_ol_overrides=BITS_SWEEP_N_OL,
    ),
    "fig4": dict(
        rho_db_grid=(6.0,),
        bits_grid=(2,),
        trials=100,
        base_config=FULL_SCALE_CONFIG,
        algorithm_params=SET_SIZE_ALGORITHM_PARAMS,
    ),
    "fig2-desk": dict(
        rho_db_grid=POWER_SWEEP_DB, bits_grid=(2,), trials=200, base_config=DESK_CONFIG
    ),
    "fig3-desk": dict(
        rho_db_grid=(5.0,),
        bits_grid=BITS_SWEEP,
        trials=200,
        base_config=DESK_CONFIG,
        n_ol_overrides=BITS_SWEEP_N_OL,
    ),
    "fig4-desk": dict(
        rho_db_grid=(6.0,),
        bits_grid=(2,),
        trials=200,
        base_config=DESK_CONFIG,
        algorithm_params=SET_SIZE_ALGORITHM_PARAMS,
    ),
}


def figure_preset(name: str, master_seed: int = 0) -> SweepSpec:
    """
    Sweep specification of one of the reference experiments.

    Args:
        name: One of PRESETS (fig2, fig3, fig4 and their -desk variants)
        master_seed: Master seed of the sweep

    Returns:
        SweepSpec
    """
    key = str(name).strip().lower()
    if key not in PRESETS:
        raise UnknownPresetError(
            f"Unknown preset '{name}'. Valid presets: {', '.join(sorted(PRESETS))}"
        )
    logger.info(f"Using preset '{key}'")
    return SweepSpec(
        algorithms=DEFAULT_ALGORITHMS,
        master_seed=master_seed,
        track_candidates=True,
        name=key,
        **PRESETS[key],
    )


def _run_trial(
    spec: SweepSpec,
    schedulers: Sequence[SchedulerId],
    codebook,
    trial: int,
) -> List[SweepRow]:
    cfg = spec.base_config
    channel_rng = derive_rng(spec.master_seed, trial, CHANNEL_STREAM)
    H_b = to_beamspace(draw_channel_matrix(channel_rng, cfg), codebook)
    digest = array_digest(H_b)
    beam_sets = dominant_beam_sets(H_b, cfg.num_stored_beams)

    rows = []
    for point, (rho_db, bits) in enumerate(spec.grid_points()):
        point_cfg = replace(cfg.with_power_db(rho_db), beam_overlap_limit=spec.n_ol_for(bits))
        params = aqnm_params(bits)
        for scheduler in schedulers:
            rng = derive_rng(
                spec.master_seed, trial, SCHEDULER_STREAM, point, list(SchedulerId).index(scheduler)
            )
            trace = run_scheduler(
                scheduler, H_b, spec.config_for(scheduler, point_cfg), params, rng, beam_sets
            )
            rows.append(
                SweepRow(
                    algorithm=scheduler.value,
                    rho_db=float(rho_db),
                    bits=int(bits),
                    trial=int(trial),
                    sum_rate=float(trace.sum_rate),
                    num_selected=trace.num_selected,
                    candidate_sizes=trace.candidate_sizes if spec.track_candidates else (),
                    evaluations=int(trace.evaluations),
                    channel_digest=digest,
                )
            )
    logger.debug(f"Trial {trial} done ({len(rows)} rows, channel {digest})")
    return rows


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """
    Run every algorithm on every grid point and trial.

    Args:
        spec: Sweep specification
        workers: Number of threads evaluating trials concurrently

    Returns:
        SweepResult sorted by (algorithm, rho_db, bits, trial)
    """
    schedulers = [SchedulerId.parse(a) for a in spec.algorithms]
    codebook = dft_codebook(spec.base_config.num_antennas)
    logger.info(
        f"Sweep '{spec.name}': {spec.trials} trials x {len(spec.grid_points())} grid points x "
        f"{len(schedulers)} algorithms (seed {spec.master_seed}, {workers} workers)"
    )

    def trial_rows(trial: int) -> List[SweepRow]:
        return _run_trial(spec, schedulers, codebook, trial)

    rows: List[SweepRow] = []
    if workers <= 1:
        for trial in range(spec.trials):
            rows.extend(trial_rows(trial))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for trial_result in pool.map(trial_rows, range(spec.trials)):
                rows.extend(trial_result)

    result = SweepResult(rows).sorted()
    logger.info(f"Sweep '{spec.name}' finished with {len(result)} rows")
    return result


def emit_csv(result: SweepResult, path: Union[str, Path]) -> Path:
    """
    Write a sweep result as CSV (UTF-8, LF line endings).

    String fields are quoted; candidate_sizes is a semicolon-joined list.

    Raises:
        OSError: the path cannot be written
    """
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in result.sorted().rows:
            writer.writerow(
                [
                    row.algorithm,
                    float(row.rho_db),
                    int(row.bits),
                    int(row.trial),
                    float(row.sum_rate),
                    int(row.num_selected),
                    ";".join(str(size) for size in row.candidate_sizes),
                    int(row.evaluations),
                    row.channel_digest,
                ]
            )
    logger.info(f"Wrote {len(result)} rows to {path}")
    return path


def read_csv(path: Union[str, Path]) -> SweepResult:
    """Parse a file written by emit_csv back into a SweepResult."""
    frame = pd.read_csv(
        path,
        dtype={"algorithm": str, "candidate_sizes": str, "channel_digest": str},
        keep_default_na=False,
        float_precision="round_trip",
    )
    rows = [
        SweepRow(
            algorithm=record["algorithm"],
            rho_db=float(record["rho_db"]),
            bits=int(record["bits"]),
            trial=int(record["trial"]),
            sum_rate=float(record["sum_rate"]),
            num_selected=int(record["num_selected"]),
            candidate_sizes=tuple(int(s) for s in record["candidate_sizes"].split(";") if s),
            evaluations=int(record["evaluations"]),
            channel_digest=record["channel_digest"],
        )
        for record in frame.to_dict("records")
    ]
    return SweepResult(rows)


def summarize(result: SweepResult) -> pd.DataFrame:
    """
    Mean sum rate with standard error per (algorithm, rho_db, bits).

    Also reports the mean number of selected users, mean metric evaluations
    and the relative gain over random scheduling when it was run.
    """
    frame = result.to_frame()
    keys = ["algorithm", "rho_db", "bits"]
    if frame.empty:
        return pd.DataFrame(
            columns=keys + ["mean_sum_rate", "std_error", "trials", "mean_selected",
                            "mean_evaluations", "gain_over_random"]
        )
    summary = (
        frame.groupby(keys)
        .agg(
            mean_sum_rate=("sum_rate", "mean"),
            std_error=("sum_rate", "sem"),
            trials=("sum_rate", "count"),
            mean_selected=("num_selected", "mean"),
            mean_evaluations=("evaluations", "mean"),
        )
        .reset_index()
    )
    random_mean = summary[summary["algorithm"] == SchedulerId.RANDOM.value][
        ["rho_db", "bits", "mean_sum_rate"]
    ].rename(columns={"mean_sum_rate": "random_mean"})
    summary = summary.merge(random_mean, on=["rho_db", "bits"], how="left")
    summary["gain_over_random"] = summary["mean_sum_rate"] / summary["random_mean"] - 1.0
    return summary.drop(columns="random_mean")


def candidate_size_profile(result: SweepResult) -> pd.DataFrame:
    """Mean candidate-set size per (algorithm, rho_db, bits, stage); stages count from 1."""
    records = [
        {
            "algorithm": row.algorithm,
            "rho_db": row.rho_db,
            "bits": row.bits,
            "stage": stage,
            "size": size,
        }
        for row in result.rows
        for stage, size in enumerate(row.candidate_sizes, start=1)
    ]
    columns = ["algorithm", "rho_db", "bits", "stage"]
    if not records:
        return pd.DataFrame(columns=columns + ["mean_size", "trials"])
    return (
        pd.DataFrame.from_records(records)
        .groupby(columns)
        .agg(mean_size=("size", "mean"), trials=("size", "count"))
        .reset_index()
    )


# Which orthogonality parameters each algorithm depends on
TUNABLE = {
    SchedulerId.CSS: ("epsilon", "n_ol"),
    SchedulerId.SUS: ("epsilon",),
    SchedulerId.BEAM_SELECT: ("n_ol",),
}


def tune_parameters(
    spec: SweepSpec,
    epsilons: Iterable[float],
    n_ol_values: Iterable[int],
    workers: int = 1,
) -> pd.DataFrame:
    """
    Grid search of epsilon and N_OL for the algorithms that use them.

    Per-bits N_OL overrides and per-algorithm parameters are ignored so
    that every candidate value is applied on the whole grid. Channels are shared across settings.

    Returns:
        DataFrame with algorithm, epsilon, n_ol, mean_sum_rate (averaged
        over the grid) and a boolean ``best`` marking each algorithm's best row
    """
    epsilons = [float(e) for e in epsilons]
    n_ol_values = [int(n) for n in n_ol_values]
    algorithms = [SchedulerId.parse(a) for a in spec.algorithms]
    tunable = [a for a in algorithms if a in TUNABLE] or list(TUNABLE)

    records = []
    for epsilon in epsilons:
        for n_ol in n_ol_values:
            run_now = [
                a for a in tunable
                if ("epsilon" in TUNABLE[a] or epsilon == epsilons[0])
                and ("n_ol" in TUNABLE[a] or n_ol == n_ol_values[0])
            ]
            if not run_now:
                continue
            trial_spec = replace(
                spec,
                base_config=replace(
                    spec.base_config, ortho_threshold=epsilon, beam_overlap_limit=n_ol
                ),
                n_ol_overrides={},
                algorithm_params={},
                algorithms=tuple(a.value for a in run_now),
                name=f"{spec.name}-tune",
            )
            frame = run_sweep(trial_spec, workers=workers).to_frame()
            for algorithm, value in frame.groupby("algorithm")["sum_rate"].mean().items():
                scheduler = SchedulerId.parse(algorithm)
                records.append(
                    {
                        "algorithm": algorithm,
                        "epsilon": epsilon if "epsilon" in TUNABLE[scheduler] else np.nan,
                        "n_ol": n_ol if "n_ol" in TUNABLE[scheduler] else np.nan,
                        "mean_sum_rate": float(value),
                    }
                )

    table = pd.DataFrame.from_records(
        records, columns=["algorithm", "epsilon", "n_ol", "mean_sum_rate"]
    )
    table["best"] = False
    if not table.empty:
        best_rows = table.groupby("algorithm")["mean_sum_rate"].idxmax()
        table.loc[best_rows.values, "best"] = True
    return table


def best_parameters(table: pd.DataFrame) -> Dict[str, Dict[str, Optional[float]]]:
    """Best epsilon / N_OL per algorithm from a tune_parameters table."""
    best = {}
    for record in table[table["best"]].to_dict("records"):
        best[record["algorithm"]] = {
            "epsilon": None if pd.isna(record["epsilon"]) else float(record["epsilon"]),
            "n_ol": None if pd.isna(record["n_ol"]) else int(record["n_ol"]),
        }
    return best
