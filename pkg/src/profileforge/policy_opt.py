"""Sequence-level rewards and policy-gradient estimators.

Composite validity rewards, the ReMax / GRPO / RLOO advantage transforms,
the k3 KL estimator, and a softmax-bandit harness that checks the Monte
Carlo estimators against the enumerated analytic policy gradient.  The
module consumes plain (reward, log-prob) records so any external trainer
can drive it; training hyperparameter presets ship in data/rl_presets.json.
"""

from __future__ import annotations

import json
import math
import os
from collections.abc import Sequence
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .validity import ValidityReport

STD_GUARD = 1e-8
ESTIMATORS = ("remax", "grpo", "rloo")
MAX_TOY_SEQUENCES = 16


class GroupTooSmall(ValueError):
    """Advantage normalization needs at least two samples per group."""


@dataclass(frozen=True)
class RewardConfig:
    w_no_self_intersection: float = 0.5
    w_no_short_edges: float = 0.5
    invalid_penalty: float = -1.0

    def __post_init__(self) -> None:
        if self.w_no_self_intersection < 0 or self.w_no_short_edges < 0:
            raise ValueError("reward weights must be >= 0")
        if self.invalid_penalty > 0:
            raise ValueError("invalid_penalty must be <= 0")


@dataclass(frozen=True)
class EstimatorConfig:
    kl_beta: float = 0.0
    clip_epsilon: float = 0.2
    group_size: int = 16

    def __post_init__(self) -> None:
        if self.kl_beta < 0:
            raise ValueError("kl_beta must be >= 0")
        if not 0.0 < self.clip_epsilon < 1.0:
            raise ValueError("clip_epsilon must be in (0, 1)")
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")


@dataclass(frozen=True)
class GroupSample:
    """One prompt's group of sampled sequences with their score data."""

    rewards: tuple[float, ...]
    logprobs: tuple[float, ...]
    ref_logprobs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.rewards) < 2:
            raise GroupTooSmall(f"group of {len(self.rewards)} samples, need >= 2")
        if not len(self.rewards) == len(self.logprobs) == len(self.ref_logprobs):
            raise ValueError("rewards, logprobs, ref_logprobs must share a length")

    @property
    def size(self) -> int:
        return len(self.rewards)

    def ratios(self) -> tuple[float, ...]:
        """Sequence-level probability ratios psi = pi / pi_ref."""
        return tuple(math.exp(lp - rlp) for lp, rlp in zip(self.logprobs, self.ref_logprobs))


def composite_reward(validity: ValidityReport, cfg: RewardConfig = RewardConfig()) -> float:
    """Weighted validity reward; syntactically invalid sequences only see the penalty."""
    if not validity.syntactic_valid:
        return cfg.invalid_penalty
    reward = 0.0
    if validity.self_intersection_free:
        reward += cfg.w_no_self_intersection
    if validity.no_short_edges:
        reward += cfg.w_no_short_edges
    return reward


def remax_baseline(greedy_reward: float, sampled_rewards: Sequence[float]) -> list[float]:
    """Advantages of stochastic samples against the greedy-decode reward."""
    return [r - greedy_reward for r in sampled_rewards]


def grpo_advantages(rewards: Sequence[float]) -> list[float]:
    """Group z-scores; a (near-)constant group collapses to zeros via the std guard."""
    g = len(rewards)
    if g < 2:
        raise GroupTooSmall(f"group of {g} rewards, need >= 2")
    mean = math.fsum(rewards) / g
    std = math.sqrt(math.fsum((r - mean) ** 2 for r in rewards) / g)
    # Guard only the degenerate branch so non-degenerate outputs keep std exactly 1.
    denom = std if std > STD_GUARD else std + STD_GUARD
    return [(r - mean) / denom for r in rewards]


def rloo_advantages(rewards: Sequence[float]) -> list[float]:
    """Leave-one-out advantages: each sample against the mean of the others."""
    g = len(rewards)
    if g < 2:
        raise GroupTooSmall(f"group of {g} rewards, need >= 2")
    total = math.fsum(rewards)
    return [(g * r - total) / (g - 1) for r in rewards]


def kl_k3(psi: float) -> float:
    """Per-sequence KL estimate 1/psi + log(psi) - 1 from the probability ratio."""
    if psi <= 0:
        raise ValueError("probability ratio must be > 0")
    return 1.0 / psi + math.log(psi) - 1.0


def grpo_objective_term(psi: float, advantage: float, cfg: EstimatorConfig) -> float:
    """Clipped surrogate minus the KL penalty for one sample."""
    clipped = min(max(psi, 1.0 - cfg.clip_epsilon), 1.0 + cfg.clip_epsilon)
    return min(psi * advantage, clipped * advantage) - cfg.kl_beta * kl_k3(psi)


def group_advantages(rewards: Sequence[float], estimator: str,
                     greedy_reward: float | None = None) -> list[float]:
    """Dispatch one reward group through the named advantage transform."""
    if estimator == "remax":
        if greedy_reward is None:
            raise ValueError("remax needs the greedy-decode reward as baseline")
        return remax_baseline(greedy_reward, rewards)
    if estimator == "grpo":
        return grpo_advantages(rewards)
    if estimator == "rloo":
        return rloo_advantages(rewards)
    raise ValueError(f"unknown estimator {estimator!r}, expected one of {ESTIMATORS}")


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = np.exp(logits - logits.max())
    return z / z.sum()


def analytic_policy_gradient(logits: Sequence[float], rewards: Sequence[float]) -> list[float]:
    """Exact gradient of E[r] w.r.t. the logits of an enumerable softmax policy."""
    p = _softmax(np.asarray(logits, dtype=float))
    r = np.asarray(rewards, dtype=float)
    return list(p * (r - float(p @ r)))


def toy_policy_gradient_check(
    logits: Sequence[float],
    rewards: Sequence[float],
    estimator: str,
    n_samples: int,
    seed: int,
    group_size: int = 4,
) -> tuple[list[float], list[float], float]:
    """Monte Carlo policy gradient on a K-armed softmax bandit vs the enumerated gradient.

    Returns (estimated gradient, analytic gradient, relative L2 error).  The
    baselines shift but never bias the REINFORCE estimate, so ReMax and RLOO
    estimates converge to the analytic gradient; GRPO's z-scoring rescales it.
    """
    k = len(logits)
    if k > MAX_TOY_SEQUENCES:
        raise ValueError(f"enumerable policy limited to {MAX_TOY_SEQUENCES} sequences")
    if len(rewards) != k:
        raise ValueError("need one reward per sequence")
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}, expected one of {ESTIMATORS}")
    p = _softmax(np.asarray(logits, dtype=float))
    r = np.asarray(rewards, dtype=float)
    rng = np.random.default_rng(seed)

    if estimator == "remax":
        draws = rng.choice(k, size=n_samples, p=p)
        adv = r[draws] - r[int(np.argmax(logits))]
        count = n_samples
    else:
        groups = n_samples // group_size
        if groups < 1:
            raise GroupTooSmall(f"{n_samples} samples cannot fill a group of {group_size}")
        draws = rng.choice(k, size=(groups, group_size), p=p)
        rg = r[draws]
        if estimator == "rloo":
            adv = (group_size * rg - rg.sum(axis=1, keepdims=True)) / (group_size - 1)
        else:
            mean = rg.mean(axis=1, keepdims=True)
            std = rg.std(axis=1)
            denom = np.where(std > STD_GUARD, std, std + STD_GUARD)
            adv = (rg - mean) / denom[:, None]
        count = groups * group_size

    # d log pi(tau)/d logit_k = 1[tau = k] - p_k, accumulated per arm.
    weighted = np.bincount(draws.ravel(), weights=adv.ravel(), minlength=k)
    estimate = (weighted - p * float(adv.sum())) / count
    analytic = np.asarray(analytic_policy_gradient(logits, rewards))
    scale = float(np.linalg.norm(analytic))
    err = float(np.linalg.norm(estimate - analytic))
    rel_error = err / scale if scale > 0 else err
    return list(estimate), list(analytic), rel_error


@dataclass(frozen=True)
class SampleRecord:
    """One sampled generation from a JSON-lines record."""

    prompt_id: str
    tokens: str
    logprob: float = 0.0
    ref_logprob: float = 0.0
    greedy: bool = False


def read_sample_records(path: str) -> list[SampleRecord]:
    """Parse JSON-lines sample records.

    Tokens come inline (whitespace string or int list) or as a token_file
    path resolved relative to the JSONL file.
    """
    records = []
    base = os.path.dirname(os.path.abspath(path))
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
            if "tokens" in obj:
                tokens = obj["tokens"]
                if isinstance(tokens, list):
                    bad = [t for t in tokens if isinstance(t, bool) or not isinstance(t, int)]
                    if bad:
                        raise ValueError(f"{path}:{line_no}: non-integer token {bad[0]!r}")
                    tokens = " ".join(str(t) for t in tokens)
                elif not isinstance(tokens, str):
                    raise ValueError(f"{path}:{line_no}: 'tokens' must be a string or int list")
            elif "token_file" in obj:
                with open(os.path.join(base, obj["token_file"])) as tf:
                    tokens = tf.read()
            else:
                raise ValueError(f"{path}:{line_no}: record needs 'tokens' or 'token_file'")
            records.append(SampleRecord(
                prompt_id=str(obj.get("prompt_id", "")),
                tokens=tokens,
                logprob=float(obj.get("logprob", 0.0)),
                ref_logprob=float(obj.get("ref_logprob", 0.0)),
                greedy=bool(obj.get("greedy", False)),
            ))
    return records


def group_records(records: Sequence[SampleRecord]) -> dict[str, list[SampleRecord]]:
    """Bucket sample records per prompt, preserving file order."""
    groups: dict[str, list[SampleRecord]] = {}
    for rec in records:
        groups.setdefault(rec.prompt_id, []).append(rec)
    return groups


@dataclass(frozen=True)
class TrainingPreset:
    """One column of the shipped hyperparameter table."""

    effective_batch_size: int
    learning_rate: float
    top_p_sampling: float
    group_sample_size: int | None = None
    token_level_kl_penalty: float | None = None
    sequence_level_kl_penalty: float | None = None
    policy_clipping_ratio: float | None = None
    extra: dict = field(default_factory=dict)

    def estimator_config(self) -> EstimatorConfig:
        beta = self.sequence_level_kl_penalty
        if beta is None:
            beta = self.token_level_kl_penalty
        return EstimatorConfig(
            kl_beta=beta if beta is not None else 0.0,
            clip_epsilon=self.policy_clipping_ratio or 0.2,
            group_size=self.group_sample_size or 1,
        )


def load_presets() -> dict[str, TrainingPreset]:
    """Estimator presets bundled with the package (data/rl_presets.json)."""
    text = resources.files("profileforge").joinpath("data/rl_presets.json").read_text()
    raw = json.loads(text)
    out = {}
    for name, cfg in raw.items():
        known = {f for f in TrainingPreset.__dataclass_fields__ if f != "extra"}
        fields = {k: v for k, v in cfg.items() if k in known}
        extra = {k: v for k, v in cfg.items() if k not in known}
        out[name] = TrainingPreset(**fields, extra=extra)
    return out
