"""Isolation (test-driven and symptom-driven) and daily vaccine rollout."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import (
    Agent,
    Compartment,
    Population,
    ScenarioConfig,
    SimulationError,
)
from .viral_load import symptomatic_now


class IsolationKind(Enum):
    HEALTHY = "healthy"
    SICK = "sick"


@dataclass(frozen=True)
class IsolationRecord:
    agent_id: int
    entry_day: int
    scheduled_exit_day: int
    kind: IsolationKind


@dataclass
class VaccineSupply:
    """Doses available on one simulation day."""

    vaccines_available: int
    administered_today: int = 0


def _isolate(
    population: Population,
    agent: Agent,
    day: int,
    config: ScenarioConfig,
    kind: IsolationKind,
) -> None:
    record = IsolationRecord(
        agent_id=agent.id,
        entry_day=day,
        scheduled_exit_day=day + config.isolationLength,
        kind=kind,
    )
    population.isolation[agent.id] = record
    agent.isolation_entry_day = day
    if kind is IsolationKind.HEALTHY:
        population.move(agent, Compartment.ISOLATED_HEALTHY)
    else:
        population.move(agent, Compartment.ISOLATED_SICK)


def apply_positive_result(
    population: Population,
    agent: Agent,
    day: int,
    config: ScenarioConfig,
) -> Optional[Compartment]:
    """Isolate an agent on a positive result, classified by today's state.

    Susceptible agents were false positives and isolate as healthy; exposed
    and infectious agents isolate as sick; recovered agents stay put. Returns
    the destination compartment, or None when nothing moves.
    """
    if agent.is_isolated:
        raise SimulationError(f"agent {agent.id} is already isolated")
    if agent.is_susceptible:
        _isolate(population, agent, day, config, IsolationKind.HEALTHY)
        return Compartment.ISOLATED_HEALTHY
    if agent.compartment is Compartment.RECOVERED:
        return None
    _isolate(population, agent, day, config, IsolationKind.SICK)
    return Compartment.ISOLATED_SICK


def self_isolation_step(
    population: Population,
    day: int,
    config: ScenarioConfig,
) -> list[int]:
    """Move willing, currently symptomatic agents into sick isolation.

    Each infection episode gets at most one self-isolation decision; the
    candidate set holds agents whose propensity draw came up willing and who
    have not triggered yet.
    """
    moved: list[int] = []
    for agent_id in sorted(population.selfiso_candidates):
        agent = population.agent(agent_id)
        if agent.viral_profile is None:
            population.selfiso_candidates.discard(agent_id)
            continue
        tau = day - agent.exposure_day
        if tau > agent.viral_profile.end_time:
            # symptom window missed (e.g. spent in test-driven isolation)
            population.selfiso_candidates.discard(agent_id)
            continue
        if agent.is_isolated or not symptomatic_now(agent.viral_profile, tau):
            continue
        agent.self_isolation_triggered = True
        population.selfiso_candidates.discard(agent_id)
        _isolate(population, agent, day, config, IsolationKind.SICK)
        moved.append(agent_id)
    return moved


def isolation_exit_step(
    population: Population,
    day: int,
    config: ScenarioConfig,
) -> list[tuple[int, Compartment]]:
    """Release agents whose isolation period is over.

    Sick isolation always exits to recovered; healthy isolation returns to the
    susceptible compartment matching the vaccination flag. Agents who entered
    isolation today are not examined, so a zero-length isolation still lasts
    until the next day.
    """
    released: list[tuple[int, Compartment]] = []
    due = [
        rec for rec in population.isolation.values()
        if day >= rec.scheduled_exit_day and rec.entry_day < day
    ]
    for rec in sorted(due, key=lambda r: r.agent_id):
        agent = population.agent(rec.agent_id)
        del population.isolation[rec.agent_id]
        agent.isolation_exit_day = day
        agent.isolation_entry_day = None
        if rec.kind is IsolationKind.SICK:
            mark_recovered(population, agent, day, config)
            released.append((agent.id, Compartment.RECOVERED))
        else:
            dest = (
                Compartment.SUSCEPTIBLE_VACCINATED
                if agent.vaccinated
                else Compartment.SUSCEPTIBLE_UNVACCINATED
            )
            population.move(agent, dest)
            released.append((agent.id, dest))
    return released


def _schedule_return(
    population: Population, agent: Agent, recovery_day: int, config: ScenarioConfig
) -> None:
    due_day = recovery_day + config.daysTilSusceptible
    population.return_schedule.setdefault(due_day, []).append((agent.id, recovery_day))


def mark_recovered(
    population: Population, agent: Agent, day: int, config: ScenarioConfig
) -> None:
    """Move an agent to recovered and schedule its return to susceptibility."""
    agent.recovery_day = day
    _schedule_return(population, agent, day, config)
    population.move(agent, Compartment.RECOVERED)


def recovered_to_susceptible_step(
    population: Population,
    day: int,
    config: ScenarioConfig,
) -> list[int]:
    """Return recovered agents to susceptibility once immunity has lapsed.

    Clears the infection bookkeeping so the agent can be re-infected with a
    fresh trajectory.
    """
    due = population.return_schedule.pop(day, None)
    if not due:
        return []
    returned: list[int] = []
    for agent_id, recovery_day in sorted(due):
        agent = population.agent(agent_id)
        # stale entry: the agent was re-isolated and rescheduled
        if agent.compartment is not Compartment.RECOVERED:
            continue
        if agent.recovery_day != recovery_day:
            continue
        agent.viral_profile = None
        agent.exposure_day = None
        agent.recovery_day = None
        agent.symptomatic_assignment = False
        agent.will_self_isolate_on_symptoms = False
        agent.self_isolation_triggered = False
        population.selfiso_candidates.discard(agent_id)
        dest = (
            Compartment.SUSCEPTIBLE_VACCINATED
            if agent.vaccinated
            else Compartment.SUSCEPTIBLE_UNVACCINATED
        )
        population.move(agent, dest)
        returned.append(agent_id)
    return returned


def vaccination_step(
    population: Population,
    supply: VaccineSupply,
    day: int,
    config: ScenarioConfig,
    rng: np.random.Generator,
) -> list[int]:
    """Distribute today's doses among willing, unvaccinated population members.

    Every eligible agent is willing today with their personal acceptance
    probability; doses go to a uniform draw (without replacement) from the
    willing set when demand exceeds supply.
    """
    if supply.vaccines_available <= 0:
        return []
    eligible = [
        i for i in population.in_population_ids()
        if not population.agent(i).vaccinated
    ]
    if not eligible:
        return []
    acceptance = np.array(
        [population.agent(i).willingness_to_vaccinate for i in eligible]
    )
    willing_idx = np.flatnonzero(rng.random(len(eligible)) < acceptance)
    if len(willing_idx) == 0:
        return []
    if len(willing_idx) > supply.vaccines_available:
        chosen_idx = rng.choice(
            willing_idx, size=supply.vaccines_available, replace=False
        )
    else:
        chosen_idx = willing_idx
    vaccinated: list[int] = []
    for idx in sorted(int(i) for i in chosen_idx):
        agent = population.agent(eligible[idx])
        agent.vaccinated = True
        population.vaccinated_count += 1
        if agent.compartment is Compartment.SUSCEPTIBLE_UNVACCINATED:
            population.move(agent, Compartment.SUSCEPTIBLE_VACCINATED)
        vaccinated.append(agent.id)
    supply.administered_today = len(vaccinated)
    return vaccinated
