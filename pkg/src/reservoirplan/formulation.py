"""Compiles a scenario into linear programs and reads plans back out.

Two builds share one core: the stochastic program treats per-period inflows as
bounded decision variables and charges the expected shortfall risk over the
discretized inflow distribution; the deterministic baseline pins each inflow
to its distribution mean and drops the risk term. Concave profit terms enter
through hypograph cuts, convex cost/risk terms through epigraph cuts, and the
capacity cap is a penalized overflow slack.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from . import lp
from .model import Plan, Scenario, ScenarioValidationError, validate_scenario

EXTRACT_TOL = 1e-6


@dataclasses.dataclass
class VariableMap:
    """Bijection between semantic (period, reservoir[, target/support]) indices
    and LP variable positions. Periods and reservoir ids are 1-based."""

    transfer: dict[tuple[int, int, int], int] = dataclasses.field(default_factory=dict)
    release: dict[tuple[int, int], int] = dataclasses.field(default_factory=dict)
    inflow: dict[tuple[int, int], int] = dataclasses.field(default_factory=dict)
    volume: dict[tuple[int, int], int] = dataclasses.field(default_factory=dict)
    overflow: dict[tuple[int, int], int] = dataclasses.field(default_factory=dict)
    profit_hypo: dict[tuple[int, int], int] = dataclasses.field(default_factory=dict)
    cost_epi: dict[tuple[int, int, int], int] = dataclasses.field(default_factory=dict)
    risk_epi: dict[tuple[int, int, int], int] = dataclasses.field(default_factory=dict)

    def groups(self):
        return (self.transfer, self.release, self.inflow, self.volume,
                self.overflow, self.profit_hypo, self.cost_epi, self.risk_epi)

    def check_bijective(self, num_variables: int) -> None:
        seen: list[int] = []
        for group in self.groups():
            seen.extend(group.values())
        if sorted(seen) != list(range(num_variables)):
            raise AssertionError("variable map is not a bijection onto the LP")


def _require_valid(scenario: Scenario) -> None:
    report = validate_scenario(scenario)
    if not report.ok:
        raise ScenarioValidationError(report)


def _build(scenario: Scenario, stochastic: bool) -> tuple[lp.LpProblem, VariableMap]:
    _require_valid(scenario)
    problem = lp.LpProblem(name=f"{scenario.name}:{'proposed' if stochastic else 'deterministic'}")
    vm = VariableMap()
    links = scenario.sorted_links()
    t_range = scenario.periods()

    for t in t_range:
        for link in links:
            idx = problem.add_variable(
                f"q[{t},{link.source}->{link.target}]", 0.0, link.capacity)
            vm.transfer[(t, link.source, link.target)] = idx
        for n in scenario.ids():
            vm.release[(t, n)] = problem.add_variable(f"g[{t},{n}]", 0.0)
        for n in scenario.ids():
            lo, hi = scenario.inflow[(n, t)].bounds()
            if not stochastic:
                mean = scenario.inflow[(n, t)].mean()
                lo = hi = mean
            vm.inflow[(t, n)] = problem.add_variable(f"x[{t},{n}]", lo, hi)
        for n in scenario.ids():
            vm.volume[(t, n)] = problem.add_variable(f"v[{t},{n}]", 0.0)
        for n in scenario.ids():
            vm.overflow[(t, n)] = problem.add_variable(f"w[{t},{n}]", 0.0)
        for n in scenario.ids():
            vm.profit_hypo[(t, n)] = problem.add_variable(
                f"u[{t},{n}]", -np.inf, np.inf)
        for link in links:
            vm.cost_epi[(t, link.source, link.target)] = problem.add_variable(
                f"y[{t},{link.source}->{link.target}]", -np.inf, np.inf)
        if stochastic:
            for n in scenario.ids():
                support = scenario.inflow[(n, t)].support
                for k in range(len(support)):
                    vm.risk_epi[(t, n, k)] = problem.add_variable(
                        f"rho[{t},{n},{k}]", -np.inf, np.inf)

    # Objective: profit hypographs minus cost epigraphs, overflow penalties and
    # probability-weighted risk epigraphs.
    for (t, n), idx in vm.profit_hypo.items():
        problem.set_objective_coefficient(idx, 1.0)
    for key, idx in vm.cost_epi.items():
        problem.set_objective_coefficient(idx, -1.0)
    for (t, n), idx in vm.overflow.items():
        problem.set_objective_coefficient(idx, -float(scenario.overflow_penalty[(n, t)]))
    if stochastic:
        for (t, n, k), idx in vm.risk_epi.items():
            prob = scenario.inflow[(n, t)].support[k][1]
            problem.set_objective_coefficient(idx, -float(prob))

    incoming: dict[int, list] = {n: [] for n in scenario.ids()}
    outgoing: dict[int, list] = {n: [] for n in scenario.ids()}
    for link in links:
        outgoing[link.source].append(link)
        incoming[link.target].append(link)

    for t in t_range:
        for n in scenario.ids():
            spec = scenario.reservoir(n)
            # Volume recursion: v[t] = v[t-1] - g + x + inflows_from_links - outflows.
            coefs = [(vm.volume[(t, n)], 1.0), (vm.release[(t, n)], 1.0),
                     (vm.inflow[(t, n)], -1.0)]
            for link in incoming[n]:
                coefs.append((vm.transfer[(t, link.source, n)], -1.0))
            for link in outgoing[n]:
                coefs.append((vm.transfer[(t, n, link.target)], 1.0))
            rhs = 0.0
            if t == 1:
                rhs = spec.initial_volume
            else:
                coefs.append((vm.volume[(t - 1, n)], -1.0))
            problem.add_constraint(coefs, lp.EQUAL, rhs)

            # Releases and transfers are drawn from the previous volume only
            # (conservative: period-t inflow is not available within period t).
            coefs = [(vm.release[(t, n)], 1.0)]
            for link in outgoing[n]:
                coefs.append((vm.transfer[(t, n, link.target)], 1.0))
            if t == 1:
                problem.add_constraint(coefs, lp.LESS_EQUAL, spec.initial_volume)
            else:
                coefs.append((vm.volume[(t - 1, n)], -1.0))
                problem.add_constraint(coefs, lp.LESS_EQUAL, 0.0)

            # Profit hypograph: u <= cut(g) for every concave cut.
            for slope, intercept in scenario.release_profit[(n, t)].cuts():
                problem.add_constraint(
                    [(vm.profit_hypo[(t, n)], 1.0), (vm.release[(t, n)], -slope)],
                    lp.LESS_EQUAL, intercept)

            # Overflow slack: w >= v - max_volume.
            problem.add_constraint(
                [(vm.overflow[(t, n)], 1.0), (vm.volume[(t, n)], -1.0)],
                lp.GREATER_EQUAL, -spec.max_volume)

            if stochastic:
                # Risk epigraph per support point: rho_k >= cut(x - support_k).
                cuts = scenario.shortfall_risk[(n, t)].cuts()
                for k, (value, _) in enumerate(scenario.inflow[(n, t)].support):
                    for slope, intercept in cuts:
                        problem.add_constraint(
                            [(vm.risk_epi[(t, n, k)], 1.0),
                             (vm.inflow[(t, n)], -slope)],
                            lp.GREATER_EQUAL, intercept - slope * value)

        for link in links:
            # Transfer cost epigraph: y >= cut(q) for every convex cut.
            cost = scenario.transfer_cost[(link.source, link.target, t)]
            for slope, intercept in cost.cuts():
                problem.add_constraint(
                    [(vm.cost_epi[(t, link.source, link.target)], 1.0),
                     (vm.transfer[(t, link.source, link.target)], -slope)],
                    lp.GREATER_EQUAL, intercept)

    for n in scenario.ids():
        problem.add_constraint(
            [(vm.volume[(scenario.horizon, n)], 1.0)],
            lp.GREATER_EQUAL, scenario.reservoir(n).final_min_volume)

    vm.check_bijective(problem.num_variables)
    return problem, vm


def build_proposed(scenario: Scenario) -> tuple[lp.LpProblem, VariableMap]:
    """Stochastic program: inflow predictions are optimized within the support
    range and expected shortfall risk is charged per support point."""
    return _build(scenario, stochastic=True)


def build_deterministic(scenario: Scenario) -> tuple[lp.LpProblem, VariableMap]:
    """Traditional baseline: inflows pinned to their means, no risk term."""
    return _build(scenario, stochastic=False)


def extract_plan(solution: lp.LpSolution, vm: VariableMap,
                 scenario: Scenario) -> Plan:
    """Read plan arrays out of an optimal solution through the variable map."""
    if not solution.is_optimal:
        raise ValueError(f"cannot extract a plan from a {solution.status} solution")
    t_count, n_count = scenario.horizon, scenario.num_reservoirs
    values = solution.values

    transfers = np.zeros((t_count, n_count, n_count))
    for (t, n, m), idx in vm.transfer.items():
        transfers[t - 1, n - 1, m - 1] = values[idx]
    releases = np.zeros((t_count, n_count))
    predicted = np.zeros((t_count, n_count))
    volumes = np.zeros((t_count, n_count))
    for (t, n), idx in vm.release.items():
        releases[t - 1, n - 1] = values[idx]
    for (t, n), idx in vm.inflow.items():
        predicted[t - 1, n - 1] = values[idx]
    for (t, n), idx in vm.volume.items():
        volumes[t - 1, n - 1] = values[idx]

    # Clamp solver roundoff at the bounds so plan invariants hold exactly.
    for arr in (transfers, releases, volumes):
        tiny = (arr < 0) & (arr > -EXTRACT_TOL)
        arr[tiny] = 0.0
    for n in scenario.ids():
        for t in scenario.periods():
            lo, hi = scenario.inflow[(n, t)].bounds()
            predicted[t - 1, n - 1] = min(max(predicted[t - 1, n - 1], lo), hi)

    plan = Plan(transfers=transfers, releases=releases,
                predicted_inflows=predicted, volumes=volumes,
                objective=float(solution.objective))
    plan.check_dimensions(scenario)
    return plan


def plan_violations(plan: Plan, scenario: Scenario,
                    tol: float = EXTRACT_TOL) -> list[tuple[str, float]]:
    """Replay the compiled constraints against a plan; returns (name, excess)
    pairs for every violation beyond `tol`."""
    out: list[tuple[str, float]] = []
    t_count = scenario.horizon
    v0 = scenario.initial_volumes()
    caps = {(l.source, l.target): l.capacity for l in scenario.links}

    for t in range(t_count):
        prev = v0 if t == 0 else plan.volumes[t - 1]
        for n in scenario.ids():
            i = n - 1
            inflow_links = sum(plan.transfers[t, m - 1, i] for m in scenario.ids())
            outflow_links = sum(plan.transfers[t, i, m - 1] for m in scenario.ids())
            state = (prev[i] - plan.releases[t, i] + plan.predicted_inflows[t, i]
                     + inflow_links - outflow_links)
            gap = abs(plan.volumes[t, i] - state)
            if gap > tol:
                out.append((f"state equation t={t + 1} n={n}", gap))
            budget = plan.releases[t, i] + outflow_links - prev[i]
            if budget > tol:
                out.append((f"release budget t={t + 1} n={n}", budget))
            lo, hi = scenario.inflow[(n, t + 1)].bounds()
            if plan.predicted_inflows[t, i] < lo - tol or \
                    plan.predicted_inflows[t, i] > hi + tol:
                out.append((f"inflow range t={t + 1} n={n}",
                            max(lo - plan.predicted_inflows[t, i],
                                plan.predicted_inflows[t, i] - hi)))
        for (src, dst), cap in caps.items():
            q = plan.transfers[t, src - 1, dst - 1]
            if q > cap + tol:
                out.append((f"transfer capacity t={t + 1} {src}->{dst}", q - cap))
        for n in scenario.ids():
            for m in scenario.ids():
                if n != m and (n, m) not in caps and \
                        plan.transfers[t, n - 1, m - 1] > tol:
                    out.append((f"transfer without link t={t + 1} {n}->{m}",
                                plan.transfers[t, n - 1, m - 1]))

    for n in scenario.ids():
        short = scenario.reservoir(n).final_min_volume - plan.volumes[-1, n - 1]
        if short > tol:
            out.append((f"terminal volume n={n}", short))
    return out
