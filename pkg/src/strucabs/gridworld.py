"""Offline gridworld abstraction demo with tabular Q-learning.

Each cell emits noisy observation vectors: a fixed random linear lift of the
cell's one-hot (x, y) coordinates plus isotropic Gaussian noise. The
abstraction pipeline clusters those observations, and a tabular agent then
learns over the resulting abstract states.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.metrics import adjusted_rand_score

from .abstraction import TrajectoryLog
from .errors import InvalidInputError
from .graph import EmbeddingSet
from .optimize import OptimizeConfig
from .pipeline import AbstractionReport, abstract_states, cluster_array

# up, down, left, right as (dx, dy)
ACTIONS = ((0, -1), (0, 1), (-1, 0), (1, 0))


@dataclass(frozen=True)
class GridworldSpec:
    width: int = 6
    height: int = 6
    goal: tuple[int, int] | None = None
    step_reward: float = -1.0
    goal_reward: float = 0.0
    episode_cap: int = 100
    sigma: float = 0.0
    obs_dim: int = 32

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidInputError("grid dimensions must be positive")
        if self.sigma < 0:
            raise InvalidInputError("sigma must be non-negative")
        if self.obs_dim < 1 or self.episode_cap < 1:
            raise InvalidInputError("obs_dim and episode_cap must be positive")
        if self.goal is None:
            object.__setattr__(self, "goal", (self.width - 1, self.height - 1))
        gx, gy = self.goal
        if not (0 <= gx < self.width and 0 <= gy < self.height):
            raise InvalidInputError(f"goal {self.goal} lies outside the grid")

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    @property
    def goal_cell(self) -> int:
        return self.cell(*self.goal)

    def cell(self, x: int, y: int) -> int:
        return y * self.width + x

    def coords(self, cell: int) -> tuple[int, int]:
        return cell % self.width, cell // self.width

    def step(self, cell: int, action: int) -> tuple[int, float, bool]:
        """Move with wall clamping; every move costs ``step_reward`` and the
        move that reaches the goal additionally earns ``goal_reward``."""
        x, y = self.coords(cell)
        dx, dy = ACTIONS[action]
        nx = min(max(x + dx, 0), self.width - 1)
        ny = min(max(y + dy, 0), self.height - 1)
        nxt = self.cell(nx, ny)
        done = nxt == self.goal_cell
        return nxt, self.step_reward + (self.goal_reward if done else 0.0), done

    def start_cells(self) -> list[int]:
        return [c for c in range(self.n_cells) if c != self.goal_cell] or [self.goal_cell]


@dataclass(frozen=True)
class Observations:
    embeddings: EmbeddingSet
    cells: np.ndarray

    def samples_of(self, cell: int) -> np.ndarray:
        return np.flatnonzero(self.cells == cell)


def generate_observations(spec: GridworldSpec, samples: int, seed: int) -> Observations:
    if samples < 1:
        raise InvalidInputError("need at least one sample per cell")
    rng = np.random.default_rng(seed)
    lift = rng.normal(size=(spec.obs_dim, spec.width + spec.height))
    lift /= np.linalg.norm(lift, axis=0, keepdims=True)
    cells = np.repeat(np.arange(spec.n_cells), samples)
    feats = np.zeros((len(cells), spec.width + spec.height))
    for i, c in enumerate(cells):
        x, y = spec.coords(int(c))
        feats[i, x] = 1.0
        feats[i, spec.width + y] = 1.0
    obs = feats @ lift.T
    # per-coordinate scale keeps the expected noise norm near sigma
    obs += rng.normal(scale=spec.sigma / np.sqrt(spec.obs_dim), size=obs.shape)
    labels = tuple(f"c{int(c)}_{i % samples}" for i, c in enumerate(cells))
    return Observations(EmbeddingSet(obs, labels), cells)


def explore(spec: GridworldSpec, obs: Observations, steps: int, seed: int) -> TrajectoryLog:
    """Uniform random exploration, recorded over observation labels."""
    rng = np.random.default_rng(seed)
    labels = obs.embeddings.labels
    by_cell = [obs.samples_of(c) for c in range(spec.n_cells)]
    starts = spec.start_cells()
    cell = starts[rng.integers(len(starts))]
    out = []
    for _ in range(steps):
        a = int(rng.integers(len(ACTIONS)))
        nxt, r, done = spec.step(cell, a)
        s = labels[by_cell[cell][rng.integers(len(by_cell[cell]))]]
        s2 = labels[by_cell[nxt][rng.integers(len(by_cell[nxt]))]]
        out.append((s, a, r, s2))
        cell = starts[rng.integers(len(starts))] if done else nxt
    return TrajectoryLog.from_steps(out, len(ACTIONS))


@dataclass
class PipelineResult:
    report: AbstractionReport | None
    clusters: np.ndarray
    ari: float

    def cell_abstraction(self, obs: Observations, n_cells: int) -> list[np.ndarray]:
        return [self.clusters[obs.samples_of(c)] for c in range(n_cells)]


def run_pipeline(
    obs: Observations,
    cfg: OptimizeConfig | None = None,
    log: TrajectoryLog | None = None,
) -> PipelineResult:
    """Cluster the observations and score the root-children partition
    against the generating cells."""
    if len(np.unique(obs.cells)) == 1:
        # one cell: nothing to separate
        return PipelineResult(None, np.zeros(len(obs.cells), dtype=int), 1.0)
    report = abstract_states(obs.embeddings, log, cfg)
    clusters = cluster_array(report)
    ari = float(adjusted_rand_score(obs.cells, clusters))
    report.extra["ari"] = round(ari, 6)
    return PipelineResult(report, clusters, ari)


# -- tabular Q-learning -----------------------------------------------------


@dataclass
class QResult:
    q_table: np.ndarray
    episode_rewards: list[float]
    eval_rewards: list[float]
    lr: float
    gamma: float
    eps_end: float
    success_rate: float = field(default=0.0)

    @property
    def eval_mean(self) -> float:
        return float(np.mean(self.eval_rewards))

    @property
    def failed(self) -> bool:
        return self.success_rate == 0.0


def identity_abstraction(spec: GridworldSpec) -> list[np.ndarray]:
    return [np.array([c]) for c in range(spec.n_cells)]


def constant_abstraction(spec: GridworldSpec) -> list[np.ndarray]:
    return [np.array([0]) for _ in range(spec.n_cells)]


def train_q(
    spec: GridworldSpec,
    abstraction: Sequence[np.ndarray],
    episodes: int = 2000,
    seed: int = 0,
    lr: float = 0.1,
    gamma: float = 0.99,
    eps_start: float = 1.0,
    eps_end: float = 0.05,
    eval_episodes: int = 100,
    decay_fraction: float = 1.0,
) -> QResult:
    """Epsilon-greedy Q-learning over abstract states.

    ``abstraction[cell]`` lists the abstract ids of that cell's observations;
    each visit draws one uniformly, as if a fresh noisy observation arrived.
    Epsilon decays linearly over the first ``decay_fraction`` of training.
    """
    if len(abstraction) != spec.n_cells:
        raise InvalidInputError("abstraction must cover every cell")
    rng = np.random.default_rng(seed)
    n_abs = int(max(int(np.max(a)) for a in abstraction)) + 1
    q = np.zeros((n_abs, len(ACTIONS)))
    starts = spec.start_cells()
    decay_span = max(int(episodes * decay_fraction), 1)

    def observe(cell):
        ids = abstraction[cell]
        return int(ids[rng.integers(len(ids))]) if len(ids) > 1 else int(ids[0])

    def episode(eps, learn):
        cell = starts[rng.integers(len(starts))]
        z = observe(cell)
        total = 0.0
        for _ in range(spec.episode_cap):
            if learn and rng.random() < eps:
                a = int(rng.integers(len(ACTIONS)))
            else:
                a = int(np.argmax(q[z]))
            nxt, r, done = spec.step(cell, a)
            total += r
            z2 = observe(nxt)
            if learn:
                target = r if done else r + gamma * q[z2].max()
                q[z, a] += lr * (target - q[z, a])
            cell, z = nxt, z2
            if done:
                return total, True
        return total, False

    curve = []
    for ep in range(episodes):
        eps = eps_start + (eps_end - eps_start) * min(ep / decay_span, 1.0)
        curve.append(episode(eps, True)[0])
    evals = [episode(0.0, False) for _ in range(eval_episodes)]
    return QResult(
        q,
        curve,
        [r for r, _ in evals],
        lr,
        gamma,
        eps_end,
        success_rate=sum(ok for _, ok in evals) / max(eval_episodes, 1),
    )


def value_iteration(spec: GridworldSpec, tol: float = 1e-12) -> np.ndarray:
    """Undiscounted optimal values of the true grid MDP (goal value 0)."""
    v = np.zeros(spec.n_cells)
    goal = spec.goal_cell
    for _ in range(10 * spec.n_cells + 10):
        new = v.copy()
        for c in range(spec.n_cells):
            if c == goal:
                continue
            best = -np.inf
            for a in range(len(ACTIONS)):
                nxt, r, done = spec.step(c, a)
                best = max(best, r + (0.0 if done else v[nxt]))
            new[c] = best
        if np.max(np.abs(new - v)) < tol:
            return new
        v = new
    return v


def optimal_mean_return(spec: GridworldSpec) -> float:
    v = value_iteration(spec)
    return float(np.mean([v[c] for c in spec.start_cells()]))
