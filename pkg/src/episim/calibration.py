"""Transmission-rate calibration: expected infectious duration, the effective
reproduction number estimated from run records, and the daily contact rate
needed to hit a target basic reproduction number."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, ScenarioConfig
from .engine import DailyRecord

# Defaults for the window where the reproduction-number estimate is trusted:
# the unvaccinated-susceptible share must still be near 1 and the infectious
# count large enough to keep the ratio estimator stable.
EARLY_WINDOW_SU_FRACTION = 0.9
EARLY_WINDOW_MIN_INFECTIOUS = 20


def expected_infectious_duration(config: ScenarioConfig) -> float:
    """Mean days an infection stays infectious, from the trajectory means.

    Sum of the mean onset delay, rise time and decline time, plus the
    symptomatic fraction's share of the symptom delay. Requires parameter
    distributions with closed-form means.
    """
    try:
        tau = (
            config.t0.mean()
            + config.tP.mean()
            + config.tF.mean()
            + config.fractionSymptomatic * config.tS.mean()
        )
    except ConfigError as exc:
        raise ConfigError(f"viral-load parameter distribution unsupported: {exc}") from exc
    return tau


def estimate_beta(target_r0: float, config: ScenarioConfig) -> float:
    """Daily contact rate that yields ``target_r0`` in a fully susceptible
    population: beta = R0 / expected infectious duration."""
    if target_r0 <= 0:
        raise ConfigError("target R0 must be positive")
    tau = expected_infectious_duration(config)
    if tau <= 0:
        raise ConfigError("expected infectious duration is not positive")
    return target_r0 / tau


@dataclass
class ReproductionSeries:
    """Per-day effective reproduction number estimated from one run.

    values[t] is NaN where undefined (day 0, or no infectious agents the day
    before). early_window flags days where the estimate approximates R0.
    """

    tau_i: float
    days: np.ndarray
    values: np.ndarray
    early_window: np.ndarray

    def early_mean(self) -> float:
        if not self.early_window.any():
            return float("nan")
        return float(np.nanmean(self.values[self.early_window]))


def effective_r_series(
    records: list[DailyRecord],
    tau_i: float,
    su_fraction_min: float = EARLY_WINDOW_SU_FRACTION,
    min_infectious: int = EARLY_WINDOW_MIN_INFECTIOUS,
) -> ReproductionSeries:
    """Estimate R_t = (new internal exposures / previous-day infectious) * tau_i."""
    n = len(records)
    days = np.arange(n)
    values = np.full(n, np.nan)
    window = np.zeros(n, dtype=bool)
    for t in range(1, n):
        prev = records[t - 1]
        infectious_prev = prev.i_s + prev.i_a
        if infectious_prev <= 0:
            continue
        values[t] = records[t].new_exposures_internal / infectious_prev * tau_i
        p_prev = prev.s_u + prev.s_v + prev.e + prev.i_s + prev.i_a + prev.r
        if p_prev <= 0:
            continue
        window[t] = (
            prev.s_u / p_prev > su_fraction_min
            and infectious_prev >= min_infectious
        )
    return ReproductionSeries(
        tau_i=tau_i, days=days, values=values, early_window=window
    )
