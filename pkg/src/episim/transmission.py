"""Daily exposure processes: importation from outside the population and
mass-action spread within it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Agent,
    Compartment,
    Population,
    ScenarioConfig,
    SimulationError,
    sample,
)
from .viral_load import sample_profile


@dataclass(frozen=True)
class PopulationCounts:
    """Compartment sizes for the in-population agents only."""

    s_u: int
    s_v: int
    e: int
    i_s: int
    i_a: int
    r: int

    @property
    def s(self) -> int:
        return self.s_u + self.s_v

    @property
    def i(self) -> int:
        return self.i_s + self.i_a

    @property
    def p(self) -> int:
        return self.s + self.e + self.i + self.r


def snapshot_counts(population: Population) -> PopulationCounts:
    return PopulationCounts(
        s_u=population.count(Compartment.SUSCEPTIBLE_UNVACCINATED),
        s_v=population.count(Compartment.SUSCEPTIBLE_VACCINATED),
        e=population.count(Compartment.EXPOSED),
        i_s=population.count(Compartment.INFECTIOUS_SYMPTOMATIC),
        i_a=population.count(Compartment.INFECTIOUS_ASYMPTOMATIC),
        r=population.count(Compartment.RECOVERED),
    )


def exposure_probability(
    counts: PopulationCounts,
    beta: float,
    gamma: float,
    alpha: float,
    vaccinated: bool,
    include_external: bool = True,
    include_internal: bool = True,
) -> float:
    """Daily exposure probability for one susceptible agent.

    gamma covers contacts outside the population, beta*I/P the mass-action
    term inside it; vaccinated agents get the whole sum discounted by alpha.
    The result is clamped into [0, 1].
    """
    p = 0.0
    if include_external:
        p += gamma
    if include_internal:
        if counts.p <= 0:
            raise SimulationError("internal exposure with empty population")
        p += beta * counts.i / counts.p
    if vaccinated:
        p *= alpha
    return min(max(p, 0.0), 1.0)


def expose_agent(
    population: Population,
    agent: Agent,
    day: int,
    config: ScenarioConfig,
    rng: np.random.Generator,
) -> None:
    """Move a susceptible agent to exposed and start a fresh infection episode.

    Per-episode draws happen here, in fixed order: symptomatic assignment,
    trajectory parameters, then the self-isolation propensity.
    """
    symptomatic = bool(rng.random() < config.fractionSymptomatic)
    profile = sample_profile(config, symptomatic, rng)
    will_isolate = bool(rng.random() < config.selfIsolationOnSymptomsProb)
    agent.symptomatic_assignment = symptomatic
    agent.viral_profile = profile
    agent.will_self_isolate_on_symptoms = will_isolate
    agent.exposure_day = day
    agent.recovery_day = None
    agent.self_isolation_triggered = False
    population.move(agent, Compartment.EXPOSED)
    if symptomatic and will_isolate:
        population.selfiso_candidates.add(agent.id)


def _bernoulli_expose(
    population: Population,
    candidate_ids: list[int],
    probability: float,
    day: int,
    config: ScenarioConfig,
    rng: np.random.Generator,
) -> list[int]:
    # One vectorized draw per candidate keeps stream consumption fixed.
    if not candidate_ids or probability <= 0.0:
        return []
    draws = rng.random(len(candidate_ids))
    exposed: list[int] = []
    for idx in np.flatnonzero(draws < probability):
        agent = population.agent(candidate_ids[idx])
        expose_agent(population, agent, day, config, rng)
        exposed.append(agent.id)
    return exposed


def external_exposure_step(
    population: Population,
    config: ScenarioConfig,
    day: int,
    rng: np.random.Generator,
) -> list[int]:
    """Expose in-population susceptibles from outside contacts.

    Unvaccinated candidates are drawn before vaccinated ones, each block in
    ascending id order.
    """
    counts = snapshot_counts(population)
    newly_exposed: list[int] = []
    for comp, vaccinated in (
        (Compartment.SUSCEPTIBLE_UNVACCINATED, False),
        (Compartment.SUSCEPTIBLE_VACCINATED, True),
    ):
        p = exposure_probability(
            counts,
            beta=config.betaDaily,
            gamma=config.externalExposureProbDaily,
            alpha=config.vaccineInfectionProb,
            vaccinated=vaccinated,
            include_external=True,
            include_internal=False,
        )
        newly_exposed.extend(
            _bernoulli_expose(population, population.sorted_ids(comp), p, day, config, rng)
        )
    return newly_exposed


def internal_propagation_step(
    population: Population,
    config: ScenarioConfig,
    day: int,
    rng: np.random.Generator,
    counts: PopulationCounts | None = None,
) -> list[int]:
    """Expose in-population susceptibles via mass action.

    The infectious pressure I/P comes from ``counts`` (the engine passes the
    previous day's end-of-day counts, matching the discrete update
    new_exposures(t) = beta * I(t-1)/P(t-1) * S(t-1)); by default the current
    population is snapshotted. Either way the counts are fixed before any
    exposure happens, so new cases cannot cascade within the same day.
    """
    if counts is None:
        counts = snapshot_counts(population)
    if counts.i == 0:
        return []
    newly_exposed: list[int] = []
    for comp, vaccinated in (
        (Compartment.SUSCEPTIBLE_UNVACCINATED, False),
        (Compartment.SUSCEPTIBLE_VACCINATED, True),
    ):
        p = exposure_probability(
            counts,
            beta=config.betaDaily,
            gamma=config.externalExposureProbDaily,
            alpha=config.vaccineInfectionProb,
            vaccinated=vaccinated,
            include_external=False,
            include_internal=True,
        )
        newly_exposed.extend(
            _bernoulli_expose(population, population.sorted_ids(comp), p, day, config, rng)
        )
    return newly_exposed
