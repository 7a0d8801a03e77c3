"""Deterministic contrast-AF simulator: coarse sweep over a plan, golden-section refine.

The sharpness model is a stand-in for an image contrast metric,
``S = 1 / (1 + (b / c)**2)`` with ``b`` the geometric blur of the scene's object.
It is unimodal in lens position with its peak at the object's sharp image
distance, and ``S = 0.5`` exactly at the DoF boundary.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import optics
from .actuator import from_code, to_code
from .errors import ParameterDomainError, PlanValidationError

INV_PHI = (math.sqrt(5) - 1) / 2
_MIN_SCORE = 1e-12


@dataclass(frozen=True)
class SimulatedScene:
    true_distance: float
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (self.true_distance > 0):
            raise ParameterDomainError("true_distance", "must be positive")
        if not (self.noise_sigma >= 0):
            raise ParameterDomainError("noise_sigma", "must be non-negative")


@dataclass
class SearchTrace:
    evaluations: list
    coarse_winner: int
    fine_result: float
    final_blur: float
    coarse_evaluations: list = field(default_factory=list)
    final_code: int = 0

    def to_dict(self):
        return {
            "coarse_evaluations": [[c, s] for c, s in self.coarse_evaluations],
            "evaluations": [[c, s] for c, s in self.evaluations],
            "coarse_winner": self.coarse_winner,
            "final_code": self.final_code,
            "final_lens_distance_mm": self.fine_result,
            "final_blur_mm": self.final_blur,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _noise(scene, d_i):
    # keyed on (seed, exact lens position): re-reading a position gives the same value
    bits = struct.unpack("<Q", struct.pack("<d", float(d_i)))[0]
    rng = np.random.default_rng([scene.seed & 0xFFFFFFFF, bits])
    return float(rng.normal(0.0, scene.noise_sigma))


def sharpness(scene, d_i, spec):
    """Sharpness score in (0, 1] with the lens image plane at ``d_i``."""
    if scene.true_distance <= spec.focal_length:
        raise optics.FocusDomainError("scene object is inside the focal length")
    b = optics.blur_at_lens_position(scene.true_distance, d_i, spec)
    score = 1.0 / (1.0 + (b / spec.coc) ** 2)
    if scene.noise_sigma > 0:
        score += _noise(scene, d_i)
    return min(1.0, max(_MIN_SCORE, score))


def _score_code(code, scene, cal, spec):
    return sharpness(scene, from_code(code, cal), spec)


def coarse_evaluate(plan, scene, cal):
    """Score every plan position through the actuator; returns ``[(code, score), ...]``."""
    if not plan.slices:
        raise PlanValidationError(["plan has no slices"])
    out = []
    for s in plan.slices:
        code = to_code(s.lens_distance, cal).code
        out.append((code, _score_code(code, scene, cal, plan.spec)))
    return out


def coarse_search(plan, scene, cal, evaluations=None):
    """Step index of the sharpest plan position; ties go to the nearer slice."""
    if evaluations is None:
        evaluations = coarse_evaluate(plan, scene, cal)
    best = 0
    for k, (_, score) in enumerate(evaluations):
        if score > evaluations[best][1]:
            best = k
    return plan.slices[best].index


def _slice_by_index(plan, index):
    for s in plan.slices:
        if s.index == index:
            return s
    raise ParameterDomainError("winner", f"no slice with step index {index}")


def fine_search(plan, winner, scene, cal, max_evals=30):
    """Golden-section refine over actuator codes spanning the winning slice.

    The bracket runs from the lens position of the slice's far limit (smaller
    image distance) to that of its near limit. Stops when the bracket is down to
    adjacent codes or ``max_evals`` distinct positions have been scored.
    """
    if max_evals < 3:
        raise ParameterDomainError("max_evals", "must be at least 3")
    s = _slice_by_index(plan, winner)
    spec = plan.spec
    f = spec.focal_length
    lo = to_code(optics.object_to_image(s.far, f), cal).code
    hi = to_code(optics.object_to_image(s.near, f), cal).code

    scores = {}
    order = []

    def score(code):
        if code not in scores:
            scores[code] = _score_code(code, scene, cal, spec)
            order.append((code, scores[code]))
        return scores[code]

    a, b = lo, hi
    while b - a > 2 and len(scores) + 2 <= max_evals:
        step = round(INV_PHI * (b - a))
        x1, x2 = b - step, a + step
        if x1 >= x2:
            x1, x2 = (a + b) // 2, (a + b) // 2 + 1
        s1, s2 = score(x1), score(x2)
        if s1 > s2:
            b = x2
        elif s2 > s1:
            a = x1
        else:
            a, b = x1, x2
    for code in range(a, b + 1):
        if len(scores) >= max_evals:
            break
        score(code)

    # ties go to the larger code, i.e. nearer focus, as in the coarse stage
    best = max(scores, key=lambda c: (scores[c], c))
    d_i = from_code(best, cal)
    return SearchTrace(
        evaluations=order,
        coarse_winner=winner,
        fine_result=d_i,
        final_blur=optics.blur_at_lens_position(scene.true_distance, d_i, spec),
        final_code=best,
    )


def autofocus(plan, scene, cal, max_evals=30):
    """Full coarse-then-fine run; the trace carries both stages' evaluations."""
    coarse = coarse_evaluate(plan, scene, cal)
    winner = coarse_search(plan, scene, cal, coarse)
    trace = fine_search(plan, winner, scene, cal, max_evals)
    trace.coarse_evaluations = coarse
    return trace
