"""End-to-end extraction: profile in, replayable construction sequence out.

Chains normalization, cleanup, prompt selection, relation analysis and the
dataflow planner, then verifies the sequence by replaying it and measuring
the Hausdorff distance back to the cleaned profile.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .codec import canonicalize_refs
from .dataflow import (
    IncompleteConstruction,
    UnbreakableCycle,
    UnreachableGroup,
    build_sequence,
)
from .interpreter import replay, validate_topology
from .model import ConstructionSequence, SequenceError
from .preprocess import DegenerateProfile, Transform, normalize_profile, preprocess
from .profile import CircleLoop, Profile, densify_circle, densify_loop
from .promptgen import extract_prompt
from .quantization import OutOfRangeError
from .relations import analyze_relations

HAUSDORFF_SAGITTA = 1e-4

EXTRACTION_ERRORS = (
    DegenerateProfile,
    UnreachableGroup,
    UnbreakableCycle,
    IncompleteConstruction,
    SequenceError,
    OutOfRangeError,
)


@dataclass
class ExtractionResult:
    sequence: ConstructionSequence
    transform: Transform
    replayed: Profile
    hausdorff: float


def _profile_samples(p: Profile) -> np.ndarray:
    pts: list[tuple[float, float]] = []
    for loop in p.loops:
        if isinstance(loop, CircleLoop):
            samples = densify_circle(loop.circle, HAUSDORFF_SAGITTA)
        else:
            samples = densify_loop(loop, HAUSDORFF_SAGITTA)
        pts.extend((q.x, q.y) for q in samples)
    if not pts:
        return np.zeros((0, 2))
    return np.asarray(pts)


def profile_hausdorff(a: Profile, b: Profile) -> float:
    """Symmetric Hausdorff distance between sampled boundaries."""
    pa, pb = _profile_samples(a), _profile_samples(b)
    if len(pa) == 0 and len(pb) == 0:
        return 0.0
    if len(pa) == 0 or len(pb) == 0:
        return float("inf")
    d = np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def extract(
    profile: Profile, seed: int = 0, drop_prob: float = 0.5
) -> ExtractionResult:
    """Build and verify a construction sequence for the profile.

    Raises one of EXTRACTION_ERRORS when no sequence can be built;
    corpus generation skips such profiles.
    """
    normalized, transform = normalize_profile(profile)
    clean = preprocess(normalized)
    rng = random.Random(seed)
    prompt = extract_prompt(clean, rng, drop_prob)
    rel = analyze_relations(clean, prompt.symmetry_lines)
    seq = canonicalize_refs(build_sequence(clean, prompt, rel))

    problems = validate_topology(seq)
    if problems:
        raise SequenceError(f"extracted sequence is malformed: {problems[0]}")
    replayed, trace = replay(seq)
    if not trace.ok():
        failed = trace.failed_steps()[0]
        raise IncompleteConstruction(
            f"replay failed at step {failed.index}: {failed.error}"
        )
    return ExtractionResult(
        sequence=seq,
        transform=transform,
        replayed=replayed,
        hausdorff=profile_hausdorff(clean, replayed),
    )


def try_extract(
    profile: Profile, seed: int = 0, drop_prob: float = 0.5
) -> tuple[ExtractionResult | None, str | None]:
    """extract() with failures folded into an error string."""
    try:
        return extract(profile, seed, drop_prob), None
    except EXTRACTION_ERRORS as e:
        return None, f"{type(e).__name__}: {e}"
